// SPDX-License-Identifier: Apache-2.0
//
// Potential critical cycles of an Aeg.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/arch.hpp"

namespace fencer {

struct Delay {
  int from = 0;
  int to = 0;
  DelayKind kind = DelayKind::poWR;
  std::vector<int> path;  // pos edges of the cycle from `from` to `to`; empty for rfe
  bool covered = false;   // already fixed by fences present in the input
};

struct CriticalCycle {
  // Node sequence starting at the smallest event id; node i is followed by
  // node i+1 (cyclically) through a pos edge (same thread) or a cmp edge.
  std::vector<int> nodes;
  std::vector<Delay> delays;
  std::string id;  // canonical text form, e.g. "0 1 4 5"

  auto operator<=>(const CriticalCycle& o) const { return nodes <=> o.nodes; }
  bool operator==(const CriticalCycle& o) const { return nodes == o.nodes; }
};

struct CycleCaps {
  std::size_t max_cycles = 200000;
  double scc_timeout_s = 60.0;
};

struct CycleResult {
  std::vector<CriticalCycle> cycles;  // sorted by node sequence
  bool cap_exceeded = false;
  std::string cap_reason;
};

CycleResult enumerate_critical_cycles(const Aeg& g, Architecture a, const CycleCaps& caps = {});

// Tags the delays of a raw cycle (nodes as in CriticalCycle, any rotation).
// Segments whose endpoint pair is a delay become po delays, and on
// architectures with non-atomic writes every cmp arc traversed from a write to
// a read becomes an rfe delay. Coverage by pre-existing fences is filled in.
CriticalCycle classify_delays(const Aeg& g, std::vector<int> nodes, Architecture a);

// True when the fences and dependencies already in the Aeg fix the delay.
bool delay_covered(const Aeg& g, const Delay& d, Architecture a);

// Node ids joined by spaces, rotated to start at the smallest.
std::string canonical_id(std::vector<int> nodes);

// Strongly connected components of pos plus cmp in both directions; returns
// the component index of every event.
std::vector<int> strongly_connected(const Aeg& g);

}  // namespace fencer
