// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <set>

#include "fencer/aeg.hpp"
#include "fixtures.hpp"

using namespace fencer;

namespace {

Aeg build(const std::string& text, Precision pr = Precision::Precise) {
  Program p = normalize_guards(parse_program(text));
  PointsToMap pt = points_to(p, pr);
  return build_aeg(duplicate_loop_bodies(p, pt), pt);
}

std::set<std::pair<int, int>> pos_pairs(const Aeg& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.pos) s.insert({e.from, e.to});
  return s;
}

std::set<std::pair<int, int>> cmp_pairs(const Aeg& g) { return {g.cmp.begin(), g.cmp.end()}; }

void check_well_formed(const Aeg& g) {
  for (const auto& e : g.pos) CHECK(g.events[e.from].thread == g.events[e.to].thread);
  for (auto [a, b] : g.cmp) {
    CHECK(a < b);
    CHECK(g.events[a].thread != g.events[b].thread);
    CHECK(may_alias(g.events[a].loc, g.events[b].loc));
    CHECK((g.events[a].dir == Dir::W || g.events[b].dir == Dir::W));
  }
  // cmp is exactly the set of conflicting inter-thread pairs.
  std::size_t expected = 0;
  for (std::size_t i = 0; i < g.events.size(); ++i)
    for (std::size_t j = i + 1; j < g.events.size(); ++j) {
      const auto& a = g.events[i];
      const auto& b = g.events[j];
      if (a.thread != b.thread && may_alias(a.loc, b.loc) && (a.dir == Dir::W || b.dir == Dir::W)) ++expected;
    }
  CHECK(g.cmp.size() == expected);
}

}  // namespace

TEST_CASE("branching example graph") {
  Program p = testing::corpus_program("branching");
  Aeg g = build_aeg(p, points_to(p, Precision::Precise));
  REQUIRE(g.events.size() == 7);
  const char* labels[] = {"Wx", "Wy", "Rz", "Wx", "Ry", "Rz", "Rx"};
  for (int i = 0; i < 7; ++i) CHECK(g.events[i].name + ":" + labels[i] == g.event_label(i));
  CHECK(pos_pairs(g) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 5}, {5, 6}});
  CHECK(cmp_pairs(g) == std::set<std::pair<int, int>>{{0, 6}, {1, 4}, {3, 6}});
  CHECK(g.pos[g.find_pos(0, 1)].poc);
  CHECK(g.pos[g.find_pos(0, 2)].poc);
  CHECK_FALSE(g.pos[g.find_pos(2, 3)].poc);
  CHECK(g.thread_count() == 2);
  check_well_formed(g);
}

TEST_CASE("single access per thread") {
  Aeg g = build("shared x\nlocal r\nthread a {\n  x = 1;\n  end_thread\n}\nthread b {\n  r = x;\n  end_thread\n}\n");
  CHECK(g.events.size() == 2);
  CHECK(g.pos.empty());
  CHECK(cmp_pairs(g) == std::set<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("two reads never compete") {
  Aeg g = build("shared x\nlocal r, s\nthread a {\n  r = x;\n  end_thread\n}\nthread b {\n  s = x;\n  end_thread\n}\n");
  CHECK(g.cmp.empty());
}

TEST_CASE("locals produce no events") {
  Aeg g = build("local a, b\nthread t {\n  a = 1;\n  b = a + 2;\n  end_thread\n}\n");
  CHECK(g.events.empty());
}

TEST_CASE("assignment reads precede its write") {
  Aeg g = build("shared x\nthread t {\n  x = x + 1;\n  end_thread\n}\n");
  REQUIRE(g.events.size() == 2);
  CHECK(g.events[0].dir == Dir::R);
  CHECK(g.events[1].dir == Dir::W);
  REQUIRE(g.find_pos(0, 1) >= 0);
  CHECK(g.pos[g.find_pos(0, 1)].intra);
}

TEST_CASE("explicit fences annotate the crossing pos edge") {
  Aeg g = build("shared x\nshared y\nthread t {\n  x = 1;\n  fence(lwf);\n  y = 1;\n  end_thread\n}\n");
  REQUIRE(g.pos.size() == 1);
  CHECK(g.pos[0].fences == bit(FenceType::Lightweight));
}

TEST_CASE("atomic sections are bracketed by full fences") {
  Aeg g = build(
      "shared x\nshared y\nthread t {\n  x = 0;\n  atomic_begin;\n  x = 1;\n  y = 1;\n  atomic_end;\n  y = 0;\n  end_thread\n}\n");
  REQUIRE(g.events.size() == 4);
  CHECK(has(g.pos[g.find_pos(0, 1)].fences, FenceType::Full));
  CHECK(g.pos[g.find_pos(1, 2)].fences == 0);
  CHECK(has(g.pos[g.find_pos(2, 3)].fences, FenceType::Full));
}

TEST_CASE("a fence on only one branch does not fence the join") {
  Aeg g = build(
      "shared x\nshared y\nlocal c\nthread t {\n  x = 1;\n  [c] goto L;\n  fence(f);\nL:\n  y = 1;\n  end_thread\n}\n");
  REQUIRE(g.find_pos(0, 1) >= 0);
  CHECK(g.pos[g.find_pos(0, 1)].fences == 0);
}

TEST_CASE("calls are inlined at each call site") {
  Aeg g = build("shared x\nfunc f {\n  x = 1;\n  end_function\n}\nthread t {\n  call f;\n  call f;\n  end_thread\n}\n");
  CHECK(g.events.size() == 2);
  CHECK(pos_pairs(g) == std::set<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("loops close with a back edge") {
  Aeg g = build("shared x\nshared y\nlocal c\nthread t {\nL:\n  x = 1;\n  [c] goto L;\n  y = 1;\n  end_thread\n}\n");
  CHECK(g.events.size() == 2);
  CHECK(pos_pairs(g).count({0, 0}));
  CHECK(pos_pairs(g).count({0, 1}));
}

TEST_CASE("array accesses in a loop are represented twice") {
  Aeg g = build("shared t[4]\nlocal i\nthread m {\nL:\n  t[i] = 1;\n  i = i + 1;\n  [i < 4] goto L;\n  end_thread\n}\n",
                Precision::IndexInsensitive);
  REQUIRE(g.events.size() == 2);
  CHECK(g.events[0].loc == AbsLoc::array_any("t"));
  CHECK(g.events[1].loc == AbsLoc::array_any("t"));
  CHECK(pos_pairs(g) == std::set<std::pair<int, int>>{{0, 1}});
}

TEST_CASE("unknown targets alias everything") {
  Aeg g = build("shared x\nshared y\nlocal q, r\nthread a {\n  *q = 1;\n  end_thread\n}\nthread b {\n  r = y;\n  end_thread\n}\n",
                Precision::Imprecise);
  REQUIRE(g.events.size() == 2);
  CHECK(g.events[0].loc == AbsLoc::any());
  CHECK(g.has_cmp(0, 1));
}

TEST_CASE("threads without start_thread run concurrently") {
  Aeg a = build("shared x\nlocal r\nthread t0 {\n  x = 1;\n  end_thread\n}\nthread t1 {\n  r = x;\n  end_thread\n}\n");
  Aeg b = build(
      "shared x\nlocal r\nthread t0 {\n  start_thread t1;\n  x = 1;\n  end_thread\n}\nthread t1 {\n  r = x;\n  end_thread\n}\n");
  CHECK(a.cmp.size() == 1);
  CHECK(b.cmp.size() == 1);
}

TEST_CASE("dependency sources") {
  Program p = testing::corpus_program("mp");
  Aeg g = build_aeg(p, points_to(p, Precision::Precise));
  REQUIRE(g.events.size() == 4);
  CHECK(g.events[2].dp_local == "r1");
  CHECK(g.events[0].dp_local.empty());
  // A local assigned twice cannot carry a dependency.
  Aeg h = build("shared x\nshared y\nlocal r\nthread t {\n  r = x;\n  r = y;\n  end_thread\n}\n");
  for (const auto& e : h.events) CHECK(e.dp_local.empty());
}

TEST_CASE("data dependencies through locals") {
  Aeg g = build("shared x\nshared y\nlocal r\nthread t {\n  r = x;\n  y = r + 1;\n  end_thread\n}\n");
  REQUIRE(g.events.size() == 2);
  CHECK(g.deps.count({0, 1}));
}

TEST_CASE("dot export lists every event and edge") {
  Aeg g = testing::seven_thread_aeg();
  const std::string dot = export_dot(g);
  for (std::size_t i = 0; i < g.events.size(); ++i) CHECK(dot.find("n" + std::to_string(i) + " [") != std::string::npos);
  CHECK(dot.find("color=red") != std::string::npos);
  CHECK(dot.rfind("digraph", 0) == 0);
}

TEST_CASE("graphs of the corpus are well formed") {
  for (const auto& name : testing::corpus_names()) {
    CAPTURE(name);
    Program p = normalize_guards(testing::corpus_program(name));
    for (auto pr : {Precision::Precise, Precision::IndexInsensitive, Precision::Imprecise}) {
      PointsToMap pt = points_to(p, pr);
      Aeg g = build_aeg(duplicate_loop_bodies(p, pt), pt);
      CHECK_FALSE(g.events.empty());
      check_well_formed(g);
    }
  }
}

TEST_CASE("graphs of generated programs are well formed") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Aeg g = build(testing::generated_program(3, 12, 2, 3, seed));
    check_well_formed(g);
  }
}
