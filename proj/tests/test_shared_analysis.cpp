// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fencer/shared_analysis.hpp"
#include "fixtures.hpp"

using namespace fencer;

namespace {

// Target set of the first dereference or index site in the program.
TargetSet first_site(const PointsToMap& m) {
  REQUIRE(!m.sites.empty());
  return m.sites.begin()->second;
}

constexpr Precision kLevels[] = {Precision::Precise, Precision::IndexInsensitive, Precision::Imprecise};

}  // namespace

TEST_CASE("classification of the branching example") {
  LocationTable t = classify_locations(testing::corpus_program("branching"));
  for (const char* s : {"x", "y", "z"}) CHECK(t.is_shared(s));
  for (const char* l : {"r1", "r2", "r3", "r4", "input", "tmp"}) CHECK(t.is_local(l));
  CHECK(t.shared_count() == 3);
}

TEST_CASE("locals only and arrays") {
  CHECK(classify_locations(parse_program("local a\nthread t { a = 1; end_thread }")).shared_count() == 0);
  LocationTable t = classify_locations(parse_program("shared t[4]\nthread m { t[0] = 1; end_thread }"));
  REQUIRE(t.find("t"));
  CHECK(t.find("t")->shared);
  CHECK(t.find("t")->is_array);
}

TEST_CASE("undeclared variables are rejected") {
  Program p = parse_unchecked("thread t { q = 1; end_thread }");
  CHECK_THROWS_AS(classify_locations(p), IrError);
}

TEST_CASE("pointer arithmetic keeps the base object") {
  Program p = parse_program("shared t[8]\nshared y\nshared z\nlocal r\nthread m {\n  *(&t + y + r) = z + 3;\n  end_thread\n}");
  const TargetSet ts = first_site(points_to(p, Precision::Precise));
  CHECK_FALSE(ts.unknown);
  REQUIRE(ts.locs.size() == 1);
  CHECK(ts.locs[0] == AbsLoc::named("t"));
}

TEST_CASE("array index at index-insensitive precision") {
  Program p = parse_program("shared t[4]\nlocal i\nthread m {\nL:\n  t[i] = 1;\n  i = i + 1;\n  [i < 4] goto L;\n  end_thread\n}");
  const TargetSet ts = first_site(points_to(p, Precision::IndexInsensitive));
  REQUIRE(ts.locs.size() == 1);
  CHECK(ts.locs[0] == AbsLoc::array_any("t"));
  CHECK(ts.index_insensitive());
}

TEST_CASE("unresolvable pointer at imprecise precision") {
  Program p = parse_program("shared x\nshared y\nlocal q\nthread m {\n  q = &x;\n  *q = 1;\n  end_thread\n}");
  const PointsToMap m = points_to(p, Precision::Imprecise);
  const TargetSet ts = first_site(m);
  CHECK(ts.unknown);
  CHECK(ts.objects(classify_locations(p)) == std::set<std::string>{"x", "y"});
  Program u = parse_program("shared x\nlocal q\nthread m {\n  *q = 1;\n  end_thread\n}");
  CHECK(first_site(points_to(u, Precision::Precise)).unknown);
}

TEST_CASE("address of a local yields no shared target") {
  Program p = parse_program("shared x\nlocal a, q\nthread m {\n  q = &a;\n  *q = 1;\n  end_thread\n}");
  const TargetSet ts = first_site(points_to(p, Precision::Precise));
  CHECK_FALSE(ts.unknown);
  CHECK(ts.locs.empty());
}

TEST_CASE("lowering precision never shrinks a target set") {
  const std::string text =
      "shared t[4]\nshared u[2]\nshared x\nlocal p, q, i\nthread m {\n  p = &x;\n  q = &t;\n  [i] q = &u;\n"
      "  *p = 1;\n  *(q + i) = 2;\n  t[i] = *q;\n  u[1] = 3;\n  end_thread\n}";
  Program p = parse_program(text);
  const LocationTable table = classify_locations(p);
  std::vector<PointsToMap> maps;
  for (auto lv : kLevels) maps.push_back(points_to(p, table, lv));
  for (const auto& [site, ts] : maps[0].sites) {
    CAPTURE(site);
    std::set<std::string> prev = ts.objects(table);
    for (std::size_t k = 1; k < maps.size(); ++k) {
      const auto cur = maps[k].at(site).objects(table);
      for (const auto& o : prev) CHECK(cur.count(o));
      prev = cur;
    }
  }
}

TEST_CASE("named base object is always a target") {
  Program p = parse_program("shared t[4]\nlocal i\nthread m {\n  t[i] = 1;\n  i = t[2];\n  end_thread\n}");
  const LocationTable table = classify_locations(p);
  for (auto lv : kLevels) {
    const PointsToMap m = points_to(p, table, lv);
    for (const auto& [site, ts] : m.sites) CHECK(ts.objects(table).count("t"));
  }
}
