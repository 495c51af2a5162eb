// SPDX-License-Identifier: Apache-2.0
#include "fencer/pos_sets.hpp"

#include <stdexcept>

namespace fencer {

namespace {

bool pos_plus(const Aeg& g, int x, int y, const std::vector<char>& from_x) {
  if (x != y) return from_x[y] != 0;
  for (int ei : g.in_edges(y))
    if (from_x[g.pos[ei].from]) return true;
  return false;
}

}  // namespace

std::vector<int> between(const Aeg& g, int x, int y) {
  const auto fwd = g.reach_forward(x);
  if (!pos_plus(g, x, y, fwd)) throw std::invalid_argument("between: events are not ordered by pos");
  const auto bwd = g.reach_backward(y);
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(g.pos.size()); ++i)
    if (fwd[g.pos[i].from] && bwd[g.pos[i].to]) out.push_back(i);
  return out;
}

std::vector<int> ctrl(const Aeg& g, int x, int y) {
  std::vector<int> out;
  for (int e : between(g, x, y))
    if (g.pos[e].poc && g.events[g.pos[e].to].dir == Dir::R) out.push_back(e);
  return out;
}

std::vector<int> cumul(const Aeg& g, int w, int r) {
  const auto before_w = g.reach_backward(w);
  const auto after_r = g.reach_forward(r);
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(g.pos.size()); ++i)
    if (before_w[g.pos[i].to] || after_r[g.pos[i].from]) out.push_back(i);
  return out;
}

DelayKind edge_kind(const Aeg& g, int edge) {
  const PosEdge& e = g.pos.at(edge);
  return po_kind(g.events[e.from].dir, g.events[e.to].dir);
}

}  // namespace fencer
