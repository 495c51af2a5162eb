// SPDX-License-Identifier: Apache-2.0
#include "fencer/strategies.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fencer/placement.hpp"
#include "fencer/pos_sets.hpp"

namespace fencer {

Analysis analyze(const Program& p, Architecture a, const StrategyOptions& o) {
  Analysis an;
  an.program = normalize_guards(p);
  const LocationTable table = classify_locations(an.program);
  an.points_to = points_to(an.program, table, o.precision);
  an.expanded = duplicate_loop_bodies(an.program, an.points_to);
  an.aeg = build_aeg(an.expanded, an.points_to);
  an.cycles = enumerate_critical_cycles(an.aeg, a, o.caps);
  return an;
}

SlotKeying::SlotKeying(const Aeg& g, PositionPolicy pol) : g_(g), pol_(pol) {}

int SlotKeying::intern(const Slot& s, const std::string& local) {
  auto [it, fresh] = index_.emplace(std::make_pair(s, local), static_cast<int>(slots_.size()));
  if (fresh) slots_.emplace_back(s, local);
  return it->second;
}

Keying SlotKeying::keying() {
  Keying k;
  k.edge_tag = 's';
  k.pair_tag = 'd';
  k.edge_key = [this](int edge, FenceType t) {
    auto s = edge_slot(g_, edge, t, pol_);
    return s ? intern(*s, {}) : -1;
  };
  k.pair_key = [this](int x, int y) {
    auto s = before_slot(g_, y);
    const std::string& l = g_.events[x].dp_local;
    return s && !l.empty() ? intern(*s, l) : -1;
  };
  return k;
}

namespace {

std::string where(const Program& p, const Slot& s) {
  if (s.body < 0 || s.body >= p.body_count()) return {};
  const Body& b = p.body(s.body);
  std::string out = b.name + ":";
  for (std::size_t i = 0; i < s.indices.size(); ++i) out += (i ? "," : "") + std::to_string(s.indices[i]);
  if (!s.indices.empty() && s.indices[0] < static_cast<int>(b.code.size()))
    out += " (line " + std::to_string(b.code[s.indices[0]].pos.line) + ")";
  return out;
}

void finish(FencePlan& plan, const CostModel& cm, const Analysis* an) {
  std::sort(plan.placements.begin(), plan.placements.end(),
            [](const Placement& x, const Placement& y) { return x.key() < y.key(); });
  plan.cost = 0;
  for (auto& pl : plan.placements) {
    plan.cost += cm.cost(pl.type);
    if (an && pl.slot) pl.where = where(an->program, *pl.slot);
  }
  if (an) {
    plan.program_hash = program_hash(an->program);
    if (an->cycles.cap_exceeded) {
      plan.cap_exceeded = true;
      plan.cap_reason = an->cycles.cap_reason;
    }
  }
}

// One placement per (slot, type); an f at a slot makes an lwf there redundant.
class SlotPlan {
 public:
  void add(const Slot& s, FenceType t, int edge = -1) {
    auto& e = by_slot_[s][t];
    if (edge >= 0 && std::find(e.begin(), e.end(), edge) == e.end()) e.push_back(edge);
  }
  std::vector<Placement> placements() const {
    std::vector<Placement> out;
    for (const auto& [s, types] : by_slot_)
      for (const auto& [t, edges] : types) {
        if (t == FenceType::Lightweight && types.count(FenceType::Full)) continue;
        Placement p;
        p.type = t;
        p.slot = s;
        p.edges = edges;
        std::sort(p.edges.begin(), p.edges.end());
        out.push_back(std::move(p));
      }
    return out;
  }

 private:
  std::map<Slot, std::map<FenceType, std::vector<int>>> by_slot_;
};

bool fences_edge(const Aeg& g, const Placement& pl, int edge) {
  const PosEdge& e = g.pos[edge];
  if (e.intra || !pl.slot) return false;
  return pl.slot == after_slot(g, e.from) || pl.slot == before_slot(g, e.to);
}

FencePlan pensieve(const Analysis& an, Architecture a, const StrategyOptions& o) {
  const Aeg& g = an.aeg;
  struct PoDelay {
    int x, y;
    FenceMask ok;  // acceptable fence types among f and lwf
    std::vector<int> region;
  };
  std::map<std::pair<int, int>, PoDelay> delays;
  for (const auto& c : an.cycles.cycles)
    for (const auto& d : c.delays) {
      if (d.covered || d.kind == DelayKind::rfe || delays.count({d.from, d.to})) continue;
      const FenceMask opts = fence_options(d.kind, a) & (bit(FenceType::Full) | bit(FenceType::Lightweight));
      delays[{d.from, d.to}] = {d.from, d.to, opts, between(g, d.from, d.to)};
    }
  SlotPlan sp;
  for (const auto& [key, d] : delays) {
    FenceType t = FenceType::Full;
    if (has(d.ok, FenceType::Lightweight) && o.cost.lwf <= o.cost.f) t = FenceType::Lightweight;
    for (int e : d.region)
      if (auto s = edge_slot(g, e, t, o.position)) sp.add(*s, t, e);
  }
  std::vector<Placement> kept = sp.placements();
  std::vector<char> alive(kept.size(), 1);

  auto cut = [&](const PoDelay& d) {
    std::set<int> region(d.region.begin(), d.region.end());
    std::vector<char> seen(g.events.size(), 0);
    std::vector<int> stack{d.x};
    seen[d.x] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int ei : g.out_edges(u)) {
        if (!region.count(ei)) continue;
        bool blocked = false;
        for (std::size_t k = 0; k < kept.size() && !blocked; ++k)
          blocked = alive[k] && has(d.ok, kept[k].type) && fences_edge(g, kept[k], ei);
        if (blocked) continue;
        const int v = g.pos[ei].to;
        if (v == d.y) return false;
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return true;
  };
  for (std::size_t k = kept.size(); k-- > 0;) {
    alive[k] = 0;
    bool fine = true;
    for (const auto& [key, d] : delays)
      if (!cut(d)) {
        fine = false;
        break;
      }
    if (!fine) alive[k] = 1;
  }
  FencePlan plan;
  for (std::size_t k = 0; k < kept.size(); ++k)
    if (alive[k]) plan.placements.push_back(kept[k]);
  return plan;
}

FencePlan after_events(const Aeg& g, const std::function<bool(const Event&)>& pick) {
  SlotPlan sp;
  for (const auto& e : g.events)
    if (pick(e))
      if (auto s = after_slot(g, e.id)) sp.add(*s, FenceType::Full);
  FencePlan plan;
  plan.placements = sp.placements();
  return plan;
}

FencePlan volatile_plan(const Analysis& an, Architecture a) {
  FencePlan plan;
  bool any = false;
  for (const auto& v : an.program.vars) any = any || v.is_volatile;
  if (!any) {
    plan.warnings.push_back("no volatile annotations; the v plan is empty");
    return plan;
  }
  if (a != Architecture::Power) return plan;
  SlotPlan sp;
  for (const auto& e : an.aeg.events) {
    if (!e.is_volatile) continue;
    auto s = e.dir == Dir::W ? before_slot(an.aeg, e.id) : after_slot(an.aeg, e.id);
    if (s) sp.add(*s, FenceType::Lightweight);
  }
  plan.placements = sp.placements();
  return plan;
}

}  // namespace

FencePlan plan_from_solution(const IlpProblem& ilp, const Solution& sol, const Aeg& g, Architecture a,
                             const SlotKeying* slots) {
  (void)g;
  FencePlan plan;
  plan.arch = a;
  std::vector<std::vector<int>> cycles_of(ilp.vars.size());
  for (const auto& r : ilp.rows)
    for (int v : r.vars)
      if (sol.assignment[v])
        for (const auto& o : r.origins) cycles_of[v].push_back(o.cycle);
  for (auto& cs : cycles_of) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  }
  for (std::size_t i = 0; i < ilp.vars.size(); ++i) {
    if (!sol.assignment[i]) continue;
    const IlpVar& v = ilp.vars[i];
    Placement pl;
    pl.type = v.type;
    pl.edges = v.edges;
    pl.pairs = v.pairs;
    pl.cycles = std::move(cycles_of[i]);
    if (slots && (v.tag == 's' || v.tag == 'd')) {
      pl.slot = slots->slot(v.id);
      pl.local = slots->local(v.id);
    }
    plan.placements.push_back(std::move(pl));
  }
  plan.unfixable = ilp.unfixable;
  plan.cost = sol.objective;
  if (sol.status == SolveStatus::CapExceeded) {
    plan.cap_exceeded = true;
    plan.cap_reason = "solver node or time cap";
  }
  return plan;
}

StrategyRun run_strategy(const Program& p, Architecture a, Strategy s, const StrategyOptions& o) {
  StrategyRun run;
  run.analysis = analyze(p, a, o);
  const Analysis& an = run.analysis;
  switch (s) {
    case Strategy::Musketeer: {
      SlotKeying slots(an.aeg, o.position);
      run.ilp = build_ilp(an.aeg, an.cycles.cycles, a, o.cost, slots.keying());
      run.solution = solve(run.ilp, o.solver);
      run.plan = plan_from_solution(run.ilp, run.solution, an.aeg, a, &slots);
      break;
    }
    case Strategy::Pensieve: run.plan = pensieve(an, a, o); break;
    case Strategy::Escape:
      run.plan = after_events(an.aeg, [](const Event&) { return true; });
      break;
    case Strategy::Heavy: {
      const bool all = a == Architecture::RMO || a == Architecture::Power;
      run.plan = after_events(an.aeg, [all](const Event& e) { return all || e.dir == Dir::W; });
      break;
    }
    case Strategy::Volatile: run.plan = volatile_plan(an, a); break;
  }
  const bool capped = run.plan.cap_exceeded;
  const std::string reason = run.plan.cap_reason;
  run.plan.strategy = s;
  run.plan.arch = a;
  run.plan.position = o.position;
  finish(run.plan, o.cost, &an);
  if (capped) {
    run.plan.cap_exceeded = true;
    if (run.plan.cap_reason.empty()) run.plan.cap_reason = reason;
  }
  if (run.plan.unfixable > 0)
    run.plan.warnings.push_back(std::to_string(run.plan.unfixable) +
                                " rfe delay(s) have no placeable cumulative fence");
  return run;
}

FencePlan apply_strategy(const Program& p, Architecture a, Strategy s, const StrategyOptions& o) {
  return run_strategy(p, a, s, o).plan;
}

}  // namespace fencer
