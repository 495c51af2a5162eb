// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fencer {

enum class FenceType : std::uint8_t { Full, Lightweight, Control, Dependency };

inline constexpr std::array<FenceType, 4> kAllFenceTypes = {
    FenceType::Full, FenceType::Lightweight, FenceType::Control, FenceType::Dependency};

// Small bit set over FenceType.
using FenceMask = std::uint8_t;

constexpr FenceMask bit(FenceType t) { return static_cast<FenceMask>(1u << static_cast<unsigned>(t)); }
constexpr bool has(FenceMask m, FenceType t) { return (m & bit(t)) != 0; }

std::string_view fence_name(FenceType t);  // "f", "lwf", "cf", "dp"
std::optional<FenceType> parse_fence(std::string_view s);
std::string mask_names(FenceMask m);  // "{f,lwf}"

enum class Dir : std::uint8_t { R, W };

inline char dir_char(Dir d) { return d == Dir::R ? 'R' : 'W'; }

}  // namespace fencer
