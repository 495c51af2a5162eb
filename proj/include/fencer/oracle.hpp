// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations, sharing no logic with the cycle
// search or the constraint builder.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/arch.hpp"
#include "fencer/cycles.hpp"
#include "fencer/plan.hpp"

namespace fencer {

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All simple cycles of pos plus cmp (both directions), filtered by the
// critical-cycle conditions. Throws TooLarge above max_events.
std::vector<CriticalCycle> brute_cycles(const Aeg& g, Architecture a, int max_events = 12);

struct CoverageVerdict {
  bool covered = true;
  int cycle = -1;  // witness, when not covered
  int delay = -1;
  std::string witness;  // "cycle 3, delay (g,h)": the uncovered delay with the fewest fixes
  int skipped = 0;      // rfe delays with nowhere to place a fence
};

CoverageVerdict verify_coverage(const std::vector<CriticalCycle>& cycles, const FencePlan& plan, const Aeg& g,
                                Architecture a);

}  // namespace fencer
