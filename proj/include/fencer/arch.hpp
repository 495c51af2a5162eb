// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>

#include "fencer/types.hpp"

namespace fencer {

enum class Architecture { SC, TSO, PSO, RMO, Power };

enum class DelayKind { poWR, poWW, poRW, poRR, rfe };

std::string_view arch_name(Architecture a);
// Accepts sc, tso, pso, rmo, power and arm (an alias for power).
std::optional<Architecture> parse_arch(std::string_view s);

std::string_view delay_name(DelayKind k);
DelayKind po_kind(Dir first, Dir second);

bool is_delay(DelayKind k, Architecture a);

// Fence types able to fix a delay of kind k. Throws std::invalid_argument when
// k is not a delay on a.
FenceMask fence_options(DelayKind k, Architecture a);

// True when the architecture has non-atomic writes, i.e. external read-from
// edges may be delays and fences need cumulativity.
inline bool has_rfe_delays(Architecture a) { return is_delay(DelayKind::rfe, a); }

}  // namespace fencer
