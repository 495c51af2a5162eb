// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fencer/ilp.hpp"
#include "fixtures.hpp"

using namespace fencer;

namespace {

enum { A, B, C, D, E, F, G, H, I, J, K, L };

std::set<std::pair<int, int>> ends(const Aeg& g, const std::vector<int>& edges) {
  std::set<std::pair<int, int>> s;
  for (int e : edges) s.insert({g.pos[e].from, g.pos[e].to});
  return s;
}

using Pairs = std::set<std::pair<int, int>>;

Aeg branching_aeg() {
  Program p = testing::corpus_program("branching");
  return build_aeg(p, points_to(p, Precision::Precise));
}

std::vector<CriticalCycle> seven_thread_cycles() {
  Aeg g = testing::seven_thread_aeg();
  std::vector<CriticalCycle> cs;
  for (const auto& n : testing::seven_thread_cycle_nodes()) cs.push_back(classify_delays(g, n, Architecture::RMO));
  return cs;
}

std::vector<std::string> rows_text(const IlpProblem& p, const Aeg& g) {
  std::vector<std::string> out;
  for (const auto& r : p.rows) out.push_back(format_row(p, r, g));
  return out;
}

}  // namespace

TEST_CASE("between on a chain, an adjacent pair and a diamond") {
  Aeg g = testing::seven_thread_aeg();
  CHECK(ends(g, between(g, E, G)) == Pairs{{E, F}, {F, G}});
  CHECK(ends(g, between(g, F, G)) == Pairs{{F, G}});
  Aeg d = branching_aeg();
  CHECK(ends(d, between(d, 0, 3)) == Pairs{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CHECK(ends(d, between(d, 0, 1)) == Pairs{{0, 1}});
  CHECK_THROWS_AS(between(g, G, E), std::invalid_argument);
  CHECK_THROWS_AS(between(d, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(between(d, 0, 4), std::invalid_argument);
}

TEST_CASE("ctrl keeps branch-crossing edges into reads") {
  Aeg d = branching_aeg();
  // 0 -> 2 crosses the branch into a read; 0 -> 1 goes into a write.
  CHECK(ends(d, ctrl(d, 0, 3)) == Pairs{{0, 2}});
  CHECK(ctrl(d, 0, 1).empty());
  CHECK(ctrl(d, 4, 6).empty());
}

TEST_CASE("cumul collects edges before the write and after the read") {
  Aeg g = testing::seven_thread_aeg();
  const auto gi = ends(g, cumul(g, G, I));
  CHECK(gi == Pairs{{E, F}, {F, G}, {I, J}});
  // Restricted to the pos edges of the cycle through f, g, i, j.
  const Pairs cycle_edges{{F, G}, {I, J}};
  Pairs restricted;
  std::set_intersection(gi.begin(), gi.end(), cycle_edges.begin(), cycle_edges.end(),
                        std::inserter(restricted, restricted.begin()));
  CHECK(restricted == Pairs{{F, G}, {I, J}});

  Aeg m = testing::mp_aeg();
  CHECK(cumul(m, 0, 3).empty());
  CHECK(ends(m, cumul(m, 1, 2)) == Pairs{{0, 1}, {2, 3}});
}

TEST_CASE("edge kinds") {
  Aeg m = testing::mp_aeg();
  CHECK(edge_kind(m, m.find_pos(0, 1)) == DelayKind::poWW);
  CHECK(edge_kind(m, m.find_pos(2, 3)) == DelayKind::poRR);
}

TEST_CASE("seven-thread fixture constraints") {
  Aeg g = testing::seven_thread_aeg();
  IlpProblem p = build_ilp(g, seven_thread_cycles(), Architecture::RMO);
  CHECK(rows_text(p, g) == testing::kSevenThreadRows);
  for (const auto& v : p.vars) CHECK(v.cost == CostModel{}.cost(v.type));
  CHECK(p.unfixable == 0);
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    REQUIRE(p.rows[i].origins.size() == 1);
    CHECK(p.rows[i].origins[0].cycle == static_cast<int>(i));
  }
}

TEST_CASE("message passing constraints on Power") {
  Aeg g = testing::mp_aeg();
  auto cs = enumerate_critical_cycles(g, Architecture::Power).cycles;
  IlpProblem p = build_ilp(g, cs, Architecture::Power);
  const auto rows = rows_text(p, g);
  REQUIRE(rows.size() == 3);
  const std::string ab = "(" + g.events[0].name + "," + g.events[1].name + ")";
  const std::string cd = "(" + g.events[2].name + "," + g.events[3].name + ")";
  CHECK(std::count(rows.begin(), rows.end(), "f_" + ab + " + lwf_" + ab + " >= 1") == 1);
  CHECK(std::count(rows.begin(), rows.end(), "dp_" + cd + " + f_" + cd + " + lwf_" + cd + " >= 1") == 1);
  CHECK(std::count(rows.begin(), rows.end(), "f_" + ab + " + f_" + cd + " + lwf_" + ab + " + lwf_" + cd + " >= 1") == 1);
}

TEST_CASE("empty cycle list gives an empty problem") {
  IlpProblem p = build_ilp(testing::mp_aeg(), {}, Architecture::Power);
  CHECK(p.vars.empty());
  CHECK(p.rows.empty());
  CHECK(p.satisfied({}));
  CHECK(p.objective({}) == 0);
}

TEST_CASE("single store-load delay") {
  Aeg g;
  const int wx = g.add_event(Dir::W, AbsLoc::named("x"), 0);
  const int ry = g.add_event(Dir::R, AbsLoc::named("y"), 0);
  const int wy = g.add_event(Dir::W, AbsLoc::named("y"), 1);
  const int rx = g.add_event(Dir::R, AbsLoc::named("x"), 1);
  g.add_pos(wx, ry);
  g.add_pos(wy, rx, bit(FenceType::Full));
  g.compute_cmp();
  IlpProblem p = build_ilp(g, enumerate_critical_cycles(g, Architecture::TSO).cycles, Architecture::TSO);
  REQUIRE(p.vars.size() == 1);
  CHECK(p.vars[0].type == FenceType::Full);
  REQUIRE(p.rows.size() == 1);
  CHECK(p.rows[0].vars == std::vector<int>{0});
}

TEST_CASE("cost model") {
  CostModel d;
  CHECK(d.cost(FenceType::Full) == 3);
  CHECK(d.cost(FenceType::Lightweight) == 2);
  CHECK(d.cost(FenceType::Control) == 1);
  CHECK(d.cost(FenceType::Dependency) == 1);
  auto m = CostModel::parse("f=5,lwf=2.5");
  REQUIRE(m);
  CHECK(m->f == 5);
  CHECK(m->lwf == 2.5);
  CHECK(m->dp == 1);
  CHECK_FALSE(CostModel::parse("f=0"));
  CHECK_FALSE(CostModel::parse("f=-1"));
  CHECK_FALSE(CostModel::parse("q=1"));
  CHECK_FALSE(CostModel::parse("f="));
  CHECK(CostModel::parse(d.str())->str() == d.str());
  CHECK(format_number(3) == "3");
  CHECK(format_number(2.5) == "2.5");
}

TEST_CASE("trencher-style counting") {
  CHECK(trencher_set_count(IlpProblem{}) == std::optional<std::size_t>{0});
  for (int k = 1; k <= 4; ++k) {
    Aeg g = testing::diamond_aeg(k);
    IlpProblem p = build_ilp(g, enumerate_critical_cycles(g, Architecture::TSO).cycles, Architecture::TSO);
    CHECK(trencher_set_count(p) == std::optional<std::size_t>{std::size_t{1} << k});
  }
}

TEST_CASE("constraint properties on random graphs") {
  std::mt19937_64 rng(4242);
  for (int it = 0; it < 200; ++it) {
    Aeg g = testing::random_aeg(rng);
    for (auto a : {Architecture::TSO, Architecture::PSO, Architecture::RMO, Architecture::Power}) {
      CAPTURE(it);
      CAPTURE(arch_name(a));
      auto cs = enumerate_critical_cycles(g, a).cycles;
      IlpProblem p = build_ilp(g, cs, a);

      // Setting every full fence satisfies every row that has one.
      std::vector<char> all_f(p.vars.size(), 0);
      for (std::size_t i = 0; i < p.vars.size(); ++i) all_f[i] = p.vars[i].type == FenceType::Full;
      CHECK(p.satisfied(all_f));

      std::set<int> cycle_edges;
      std::size_t open = 0;
      for (const auto& c : cs) {
        for (std::size_t k = 0; k < c.nodes.size(); ++k) {
          const int e = g.find_pos(c.nodes[k], c.nodes[(k + 1) % c.nodes.size()]);
          if (e >= 0) cycle_edges.insert(e);
        }
        for (const auto& d : c.delays) open += !d.covered;
      }
      std::size_t origins = 0;
      for (const auto& r : p.rows) {
        CHECK_FALSE(r.vars.empty());
        CHECK(std::is_sorted(r.vars.begin(), r.vars.end()));
        for (int v : r.vars) CHECK(v < static_cast<int>(p.vars.size()));
        origins += r.origins.size();
      }
      CHECK(origins + p.unfixable == open);

      if (!cs.empty()) {
        auto fewer = cs;
        fewer.pop_back();
        IlpProblem q = build_ilp(g, fewer, a);
        CHECK(q.rows.size() <= p.rows.size());
        CHECK(q.vars.size() <= p.vars.size());
      }
    }
  }
}
