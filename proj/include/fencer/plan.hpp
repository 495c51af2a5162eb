// SPDX-License-Identifier: Apache-2.0
//
// Fence plans: chosen (position, fence type) pairs.
#pragma once

#include <compare>
#include <tuple>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/arch.hpp"

namespace fencer {

enum class Strategy { Musketeer, Pensieve, Volatile, Escape, Heavy };

inline constexpr Strategy kAllStrategies[] = {Strategy::Musketeer, Strategy::Pensieve, Strategy::Volatile,
                                              Strategy::Escape, Strategy::Heavy};

std::string_view strategy_name(Strategy s);  // "m", "p", "v", "e", "h"
std::optional<Strategy> parse_strategy(std::string_view s);

enum class PositionPolicy { AfterFirst, BeforeLast };

std::string_view position_name(PositionPolicy p);  // "after-first", "before-last"
std::optional<PositionPolicy> parse_position(std::string_view s);

// Insertion point set in one body: a fence is inserted before each listed
// instruction index. Several indices cover the successors of a branch.
struct Slot {
  int body = -1;
  std::vector<int> indices;
  auto operator<=>(const Slot&) const = default;
};

// Just after the instruction of event e (both successors of a branch).
std::optional<Slot> after_slot(const Aeg& g, int e);
// Just before the instruction of event e.
std::optional<Slot> before_slot(const Aeg& g, int e);
// Where a fence of type t on pos edge `edge` goes. Control fences always sit
// before the target. Edges inside one assignment have no slot.
std::optional<Slot> edge_slot(const Aeg& g, int edge, FenceType t, PositionPolicy pol);

struct Placement {
  FenceType type = FenceType::Full;
  std::optional<Slot> slot;  // absent for graphs without a source program
  std::string local;         // dp: local carrying the source value
  std::vector<int> edges;    // pos edges fenced (f, lwf, cf)
  std::vector<std::pair<int, int>> pairs;  // dp: (source read, target access)
  std::vector<int> cycles;   // originating cycles, when known
  std::string where;         // "t0:3 (line 5)"

  auto key() const { return std::tie(slot, type, local, edges, pairs); }
};

struct FencePlan {
  Strategy strategy = Strategy::Musketeer;
  Architecture arch = Architecture::TSO;
  PositionPolicy position = PositionPolicy::AfterFirst;
  std::vector<Placement> placements;
  double cost = 0;
  bool cap_exceeded = false;
  std::string cap_reason;
  int unfixable = 0;
  std::vector<std::string> warnings;
  std::uint64_t program_hash = 0;  // of the normalized program the slots refer to

  int count(FenceType t) const;
};

}  // namespace fencer
