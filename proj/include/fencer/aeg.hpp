// SPDX-License-Identifier: Apache-2.0
//
// Abstract event graph: one event per (program point, location, direction),
// static program order `pos` inside threads and competing pairs `cmp` across
// threads.
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fencer/ir.hpp"
#include "fencer/shared_analysis.hpp"
#include "fencer/types.hpp"

namespace fencer {

struct Event {
  int id = 0;
  Dir dir = Dir::R;
  AbsLoc loc;
  int thread = 0;
  std::string name;  // display label; defaults to "e<id>"
  int line = 0;
  Origin origin;               // instruction that produced the event
  std::vector<int> after;      // insertion indices just after that instruction
  bool branch_boundary = false;  // last event before a conditional branch
  std::string dp_local;        // local holding the value read, if a dependency can start here
  bool is_volatile = false;
};

struct PosEdge {
  int from = 0;
  int to = 0;
  FenceMask fences = 0;  // pre-existing fences on every path from `from` to `to`
  bool poc = false;      // crosses a conditional branch
  bool intra = false;    // read -> write inside one assignment; no fence fits there
};

class Aeg {
 public:
  std::vector<Event> events;
  std::vector<PosEdge> pos;
  std::vector<std::pair<int, int>> cmp;  // unordered, stored with first < second
  std::set<std::pair<int, int>> deps;    // (source read, dependent access)
  std::vector<std::string> thread_names;

  int add_event(Dir d, AbsLoc loc, int thread, std::string name = {});
  // Adds or merges a pos edge: fences intersect, poc accumulates.
  int add_pos(int from, int to, FenceMask fences = 0, bool poc = false, bool intra = false);
  void add_cmp(int a, int b);
  // Fills cmp with every inter-thread pair on aliasing locations with a write.
  void compute_cmp();

  int find_pos(int from, int to) const;
  bool has_cmp(int a, int b) const;
  const std::vector<int>& out_edges(int e) const { return out_[e]; }
  const std::vector<int>& in_edges(int e) const { return in_[e]; }
  const std::vector<int>& cmp_neighbours(int e) const { return cmp_adj_[e]; }
  int thread_count() const;
  std::string event_label(int e) const;  // "a:Wx"

  // Reflexive-transitive pos reachability.
  std::vector<char> reach_forward(int from) const;
  std::vector<char> reach_backward(int to) const;

 private:
  std::map<std::pair<int, int>, int> pos_index_;
  std::set<std::pair<int, int>> cmp_set_;
  std::vector<std::vector<int>> out_, in_, cmp_adj_;
};

// Replicates once the body of every outermost loop containing an array access
// or a dereference whose target set is not a single precise object. The copies
// are chained without a back edge.
Program duplicate_loop_bodies(const Program& p, const PointsToMap& pt);

Aeg build_aeg(const Program& p, const PointsToMap& pt);

std::string export_dot(const Aeg& g);

}  // namespace fencer
