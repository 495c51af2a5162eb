// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "fencer/oracle.hpp"
#include "fencer/placement.hpp"
#include "fencer/strategies.hpp"
#include "fixtures.hpp"

using namespace fencer;

namespace {

constexpr Architecture kWeak[] = {Architecture::TSO, Architecture::PSO, Architecture::RMO, Architecture::Power};

int access_instructions(const Program& p) {
  int n = 0;
  for (int b = 0; b < p.body_count(); ++b)
    for (const auto& ins : p.body(b).code)
      if (ins.op != Op::Call && touches_shared(p, ins)) ++n;
  return n;
}

}  // namespace

TEST_CASE("message passing on TSO needs nothing") {
  FencePlan plan = apply_strategy(testing::corpus_program("mp"), Architecture::TSO, Strategy::Musketeer);
  CHECK(plan.placements.empty());
  CHECK(plan.cost == 0);
}

TEST_CASE("message passing on Power") {
  StrategyRun r = run_strategy(testing::corpus_program("mp"), Architecture::Power, Strategy::Musketeer);
  const FencePlan& plan = r.plan;
  REQUIRE(plan.placements.size() == 2);
  const Aeg& g = r.analysis.aeg;
  bool writer = false, reader = false;
  for (const auto& pl : plan.placements) {
    if (pl.type == FenceType::Full || pl.type == FenceType::Lightweight) {
      REQUIRE(pl.edges.size() == 1);
      const auto& e = g.pos[pl.edges[0]];
      writer = writer || (g.events[e.from].dir == Dir::W && g.events[e.to].dir == Dir::W);
    }
    if (pl.type == FenceType::Dependency) {
      REQUIRE(pl.pairs.size() == 1);
      reader = g.events[pl.pairs[0].first].dir == Dir::R && g.events[pl.pairs[0].second].dir == Dir::R;
      CHECK(pl.local == "r1");
    }
  }
  CHECK(writer);
  CHECK(reader);
  CHECK(plan.cost == 3);
  CHECK(verify_coverage(r.analysis.cycles.cycles, plan, g, Architecture::Power).covered);
}

TEST_CASE("eager strategy fences every access instruction") {
  for (const auto& name : testing::corpus_names()) {
    CAPTURE(name);
    Program p = testing::corpus_program(name);
    FencePlan plan = apply_strategy(p, Architecture::TSO, Strategy::Escape);
    CHECK(static_cast<int>(plan.placements.size()) == access_instructions(normalize_guards(p)));
    CHECK(plan.count(FenceType::Full) == static_cast<int>(plan.placements.size()));
  }
}

TEST_CASE("volatile strategy") {
  Program p = testing::corpus_program("mp");
  FencePlan tso = apply_strategy(p, Architecture::TSO, Strategy::Volatile);
  CHECK(tso.placements.empty());
  FencePlan power = apply_strategy(p, Architecture::Power, Strategy::Volatile);
  CHECK(power.placements.empty());
  REQUIRE(power.warnings.size() == 1);
  CHECK(power.warnings[0] == "no volatile annotations; the v plan is empty");

  Program v = parse_program(
      "shared x\nshared y volatile\nlocal r1, r2\nthread t0 {\n  x = 1;\n  y = 1;\n  end_thread\n}\n"
      "thread t1 {\n  r1 = y;\n  r2 = x;\n  end_thread\n}\n");
  CHECK(apply_strategy(v, Architecture::TSO, Strategy::Volatile).placements.empty());
  FencePlan pv = apply_strategy(v, Architecture::Power, Strategy::Volatile);
  CHECK(pv.count(FenceType::Lightweight) == 2);
  CHECK(pv.placements.size() == 2);
  CHECK(pv.warnings.empty());
}

TEST_CASE("heavy strategy fences writes on TSO") {
  Program p = testing::corpus_program("mp");
  CHECK(apply_strategy(p, Architecture::TSO, Strategy::Heavy).placements.size() == 2);
  CHECK(apply_strategy(p, Architecture::Power, Strategy::Heavy).placements.size() == 4);
}

TEST_CASE("cost dominance on the corpus") {
  for (const auto& name : testing::corpus_names()) {
    Program p = testing::corpus_program(name);
    for (auto a : {Architecture::TSO, Architecture::PSO, Architecture::RMO}) {
      CAPTURE(name);
      CAPTURE(arch_name(a));
      const double m = apply_strategy(p, a, Strategy::Musketeer).cost;
      const double pe = apply_strategy(p, a, Strategy::Pensieve).cost;
      const double e = apply_strategy(p, a, Strategy::Escape).cost;
      CHECK(m <= pe);
      CHECK(pe <= e);
    }
  }
}

TEST_CASE("plans cover every cycle and survive re-analysis") {
  for (const auto& name : testing::corpus_names()) {
    Program p = testing::corpus_program(name);
    for (auto a : kWeak) {
      for (auto s : {Strategy::Musketeer, Strategy::Pensieve, Strategy::Escape, Strategy::Heavy}) {
        CAPTURE(name);
        CAPTURE(arch_name(a));
        CAPTURE(strategy_name(s));
        StrategyRun r = run_strategy(p, a, s);
        CHECK(verify_coverage(r.analysis.cycles.cycles, r.plan, r.analysis.aeg, a).covered);
        Program fenced = insert_fences(p, r.plan);
        CHECK(validate(fenced).empty());
        Analysis again = analyze(fenced, a);
        for (const auto& c : again.cycles.cycles) {
          bool open = false;
          for (const auto& d : c.delays) open = open || !d.covered;
          CHECK_FALSE(open);
        }
      }
    }
  }
}

TEST_CASE("before-last plans are sound too") {
  StrategyOptions before;
  before.position = PositionPolicy::BeforeLast;
  for (const auto& name : testing::corpus_names()) {
    Program p = testing::corpus_program(name);
    for (auto a : kWeak) {
      CAPTURE(name);
      CAPTURE(arch_name(a));
      StrategyRun r = run_strategy(p, a, Strategy::Musketeer, before);
      CHECK(r.plan.position == PositionPolicy::BeforeLast);
      CHECK(verify_coverage(r.analysis.cycles.cycles, r.plan, r.analysis.aeg, a).covered);
      CHECK(apply_strategy(insert_fences(p, r.plan), a, Strategy::Musketeer, before).placements.empty());
    }
  }
}

TEST_CASE("plans for a bare graph carry edges") {
  Aeg g = testing::seven_thread_aeg();
  std::vector<CriticalCycle> cs;
  for (const auto& n : testing::seven_thread_cycle_nodes()) cs.push_back(classify_delays(g, n, Architecture::RMO));
  IlpProblem ilp = build_ilp(g, cs, Architecture::RMO);
  FencePlan plan = plan_from_solution(ilp, solve(ilp), g, Architecture::RMO);
  CHECK(plan.cost == 5);
  REQUIRE(plan.placements.size() == 2);
  for (const auto& pl : plan.placements) {
    CHECK_FALSE(pl.slot);
    CHECK(pl.edges.size() == 1);
  }
  CHECK(verify_coverage(cs, plan, g, Architecture::RMO).covered);
}

TEST_CASE("strategy and position names") {
  for (auto s : kAllStrategies) CHECK(parse_strategy(strategy_name(s)) == s);
  CHECK_FALSE(parse_strategy("x"));
  CHECK(parse_position("after-first") == PositionPolicy::AfterFirst);
  CHECK(parse_position("before-last") == PositionPolicy::BeforeLast);
  CHECK_FALSE(parse_position("middle"));
}
