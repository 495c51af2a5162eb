// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "fencer/aeg.hpp"
#include "fencer/ir.hpp"
#include "fencer/plan.hpp"

namespace fencer {

class StalePlan : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t program_hash(const Program& p);

// Inserts the plan's fences into (the guard-normalized form of) p. f, lwf and
// cf become fence instructions; dp becomes "fence(dp, local);" just before
// the target. The position policy is fixed when the plan is made. Throws
// StalePlan when the plan was computed for another program.
Program insert_fences(const Program& p, const FencePlan& plan);

// One line per placement, a per-type total line when non-empty, and a final
// "N fences, cost C" line.
std::string report(const FencePlan& plan, const Aeg& g);

}  // namespace fencer
