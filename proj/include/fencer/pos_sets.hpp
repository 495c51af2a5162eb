// SPDX-License-Identifier: Apache-2.0
//
// Candidate pos-edge sets for fencing a delay.
#pragma once

#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/arch.hpp"

namespace fencer {

// Edges (e1,e2) with x pos* e1 and e2 pos* y. Throws std::invalid_argument
// when y is not pos+-reachable from x.
std::vector<int> between(const Aeg& g, int x, int y);

// between(x,y) restricted to branch-crossing edges whose target is a read.
std::vector<int> ctrl(const Aeg& g, int x, int y);

// Edges ending pos-before w (reflexively) or starting pos-after r.
std::vector<int> cumul(const Aeg& g, int w, int r);

// Kind of a pos edge by endpoint directions.
DelayKind edge_kind(const Aeg& g, int edge);

}  // namespace fencer
