// SPDX-License-Identifier: Apache-2.0
#include "fencer/placement.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fencer/ilp.hpp"

namespace fencer {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Musketeer: return "m";
    case Strategy::Pensieve: return "p";
    case Strategy::Volatile: return "v";
    case Strategy::Escape: return "e";
    case Strategy::Heavy: return "h";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  for (Strategy x : kAllStrategies)
    if (strategy_name(x) == s) return x;
  return std::nullopt;
}

std::string_view position_name(PositionPolicy p) {
  return p == PositionPolicy::AfterFirst ? "after-first" : "before-last";
}

std::optional<PositionPolicy> parse_position(std::string_view s) {
  if (s == "after-first") return PositionPolicy::AfterFirst;
  if (s == "before-last") return PositionPolicy::BeforeLast;
  return std::nullopt;
}

int FencePlan::count(FenceType t) const {
  return static_cast<int>(std::count_if(placements.begin(), placements.end(),
                                        [t](const Placement& p) { return p.type == t; }));
}

std::optional<Slot> after_slot(const Aeg& g, int e) {
  const Event& ev = g.events.at(e);
  if (!ev.origin.valid() || ev.after.empty()) return std::nullopt;
  return Slot{ev.origin.body, ev.after};
}

std::optional<Slot> before_slot(const Aeg& g, int e) {
  const Event& ev = g.events.at(e);
  if (!ev.origin.valid()) return std::nullopt;
  return Slot{ev.origin.body, {ev.origin.index}};
}

std::optional<Slot> edge_slot(const Aeg& g, int edge, FenceType t, PositionPolicy pol) {
  const PosEdge& pe = g.pos.at(edge);
  if (pe.intra) return std::nullopt;
  if (t == FenceType::Control || pol == PositionPolicy::BeforeLast) return before_slot(g, pe.to);
  return after_slot(g, pe.from);
}

std::uint64_t program_hash(const Program& p) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : print_program(p)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Program insert_fences(const Program& p, const FencePlan& plan) {
  if (plan.placements.empty()) return p;
  Program q = normalize_guards(p);
  if (program_hash(q) != plan.program_hash) throw StalePlan("plan was computed for a different program");
  // body -> index -> fences to insert there, in a fixed order
  std::map<int, std::map<int, std::set<std::pair<FenceType, std::string>>>> at;
  for (const auto& pl : plan.placements) {
    if (!pl.slot) throw StalePlan("placement has no program position");
    const Slot& s = *pl.slot;
    if (s.body < 0 || s.body >= q.body_count()) throw StalePlan("placement refers to a missing body");
    const int size = static_cast<int>(q.body(s.body).code.size());
    for (int i : s.indices) {
      if (i < 0 || i >= size) throw StalePlan("placement index out of range");
      at[s.body][i].insert({pl.type, pl.type == FenceType::Dependency ? pl.local : std::string()});
    }
  }
  for (auto& [b, by_index] : at) {
    Body& body = q.body(b);
    std::vector<Instruction> code;
    for (int i = 0; i < static_cast<int>(body.code.size()); ++i) {
      auto it = by_index.find(i);
      if (it != by_index.end()) {
        for (const auto& [t, local] : it->second) {
          Instruction f;
          f.op = Op::Fence;
          f.fence = t;
          f.name = local;
          f.pos = body.code[i].pos;
          code.push_back(std::move(f));
        }
      }
      code.push_back(body.code[i]);
    }
    body.code = std::move(code);
  }
  annotate_origins(q);
  return q;
}

std::string report(const FencePlan& plan, const Aeg& g) {
  std::ostringstream os;
  auto ev = [&](int e) { return e >= 0 && e < static_cast<int>(g.events.size()) ? g.event_label(e) : "?"; };
  for (const auto& pl : plan.placements) {
    os << fence_name(pl.type);
    if (!pl.where.empty()) os << " at " << pl.where;
    if (pl.type == FenceType::Dependency) {
      for (std::size_t i = 0; i < pl.pairs.size(); ++i)
        os << (i ? ", " : " from ") << ev(pl.pairs[i].first) << " to " << ev(pl.pairs[i].second);
      if (!pl.local.empty()) os << " via " << pl.local;
    } else if (!pl.edges.empty()) {
      os << " on";
      for (std::size_t i = 0; i < pl.edges.size(); ++i) {
        const PosEdge& e = g.pos.at(pl.edges[i]);
        os << (i ? ", " : " ") << ev(e.from) << "->" << ev(e.to);
      }
    }
    if (!pl.cycles.empty()) {
      os << "; cycles";
      constexpr std::size_t kShown = 8;
      for (std::size_t i = 0; i < pl.cycles.size() && i < kShown; ++i) os << (i ? "," : " ") << pl.cycles[i];
      if (pl.cycles.size() > kShown) os << " and " << pl.cycles.size() - kShown << " more";
    }
    os << '\n';
  }
  if (!plan.placements.empty()) {
    os << "totals:";
    for (FenceType t : kAllFenceTypes) os << ' ' << fence_name(t) << '=' << plan.count(t);
    os << '\n';
  }
  os << plan.placements.size() << " fences, cost " << format_number(plan.cost);
  return os.str();
}

}  // namespace fencer
