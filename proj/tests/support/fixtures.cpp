// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef FENCER_CORPUS_DIR
#define FENCER_CORPUS_DIR "tests/corpus"
#endif

namespace fencer::testing {

std::string corpus_path(const std::string& name) { return std::string(FENCER_CORPUS_DIR) + "/" + name + ".ir"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program corpus_program(const std::string& name) { return parse_program(read_file(corpus_path(name))); }

const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {"mp", "branching", "dekker", "peterson", "lamport", "szymanski", "parker"};
  return names;
}

namespace {

int ev(Aeg& g, const char* name, Dir d, const char* loc, int thread) {
  return g.add_event(d, AbsLoc::named(loc), thread, name);
}

}  // namespace

Aeg seven_thread_aeg() {
  Aeg g;
  const FenceMask f = bit(FenceType::Full);
  const int a = ev(g, "a", Dir::W, "t", 0), b = ev(g, "b", Dir::W, "y", 0);
  const int c = ev(g, "c", Dir::R, "z", 1), d = ev(g, "d", Dir::W, "x", 1);
  const int e = ev(g, "e", Dir::R, "x", 2), fe = ev(g, "f", Dir::R, "y", 2);
  const int gg = ev(g, "g", Dir::W, "z", 2), h = ev(g, "h", Dir::R, "t", 2);
  const int i = ev(g, "i", Dir::R, "z", 3), j = ev(g, "j", Dir::W, "y", 3);
  const int k = ev(g, "k", Dir::W, "t", 4), l = ev(g, "l", Dir::R, "z", 4);
  g.thread_names = {"T0", "T1", "T2", "T3", "T4"};
  g.events[e].dp_local = "re";
  g.events[fe].dp_local = "rf";
  g.add_pos(a, b, f);
  g.add_pos(c, d, f);
  g.add_pos(e, fe);
  g.add_pos(fe, gg);
  g.add_pos(gg, h);
  g.add_pos(i, j, f);
  g.add_pos(k, l, f);
  g.add_cmp(d, e);
  g.add_cmp(gg, c);
  g.add_cmp(gg, i);
  g.add_cmp(j, fe);
  g.add_cmp(b, fe);
  g.add_cmp(h, a);
  g.add_cmp(h, k);
  g.add_cmp(l, gg);
  return g;
}

std::vector<std::vector<int>> seven_thread_cycle_nodes() {
  return {{2, 3, 4, 5, 6}, {5, 6, 8, 9}, {0, 1, 5, 6, 7}, {6, 7, 10, 11}};
}

Aeg mp_aeg() {
  Aeg g;
  const int a = ev(g, "a", Dir::W, "x", 0), b = ev(g, "b", Dir::W, "y", 0);
  const int c = ev(g, "c", Dir::R, "y", 1), d = ev(g, "d", Dir::R, "x", 1);
  g.thread_names = {"T0", "T1"};
  g.events[c].dp_local = "r1";
  g.add_pos(a, b);
  g.add_pos(c, d);
  g.compute_cmp();
  return g;
}

Aeg diamond_aeg(int k) {
  Aeg g;
  const int a = ev(g, "a", Dir::W, "x", 0);
  std::vector<int> mids;
  for (int i = 0; i < k; ++i)
    mids.push_back(g.add_event(Dir::W, AbsLoc::named("p" + std::to_string(i)), 0, "b" + std::to_string(i)));
  const int c = ev(g, "c", Dir::R, "y", 0);
  const int d = ev(g, "d", Dir::W, "y", 1), e = ev(g, "e", Dir::R, "x", 1);
  g.thread_names = {"T0", "T1"};
  for (int m : mids) {
    g.add_pos(a, m);
    g.add_pos(m, c);
  }
  g.add_pos(d, e, bit(FenceType::Full));
  g.compute_cmp();
  return g;
}

Aeg random_aeg(std::mt19937_64& rng, const RandomAegOptions& o) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  Aeg g;
  const int threads = uni(2, o.max_threads);
  const int n = uni(threads, o.max_events);
  std::vector<int> thread_of(n);
  for (int i = 0; i < n; ++i) thread_of[i] = i < threads ? i : uni(0, threads - 1);
  std::sort(thread_of.begin(), thread_of.end());
  for (int i = 0; i < n; ++i) {
    const Dir d = chance(0.5) ? Dir::W : Dir::R;
    AbsLoc loc = chance(0.05) ? AbsLoc::any() : AbsLoc::named(std::string(1, static_cast<char>('x' + uni(0, o.locations - 1))));
    const int id = g.add_event(d, loc, thread_of[i]);
    if (d == Dir::R && chance(0.4)) g.events[id].dp_local = "r" + std::to_string(id);
  }
  for (int t = 0; t < threads; ++t) g.thread_names.push_back("T" + std::to_string(t));
  auto random_fences = [&]() -> FenceMask {
    if (!o.fences || !chance(0.2)) return 0;
    return static_cast<FenceMask>(bit(kAllFenceTypes[uni(0, 2)]));
  };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      if (x == y || thread_of[x] != thread_of[y]) continue;
      const bool forward = x < y;
      if ((forward && (y == x + 1 ? chance(0.85) : chance(0.25))) || (!forward && chance(0.06))) {
        const bool intra = forward && g.events[x].dir == Dir::R && g.events[y].dir == Dir::W && chance(0.1);
        g.add_pos(x, y, random_fences(), chance(0.2), intra);
        if (intra) g.deps.insert({x, y});
      }
    }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y && thread_of[x] == thread_of[y] && g.events[x].dir == Dir::R && chance(0.05))
        g.deps.insert({x, y});
  if (chance(0.8)) {
    g.compute_cmp();
  } else {
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        if (thread_of[x] != thread_of[y] && may_alias(g.events[x].loc, g.events[y].loc) &&
            (g.events[x].dir == Dir::W || g.events[y].dir == Dir::W) && chance(0.6))
          g.add_cmp(x, y);
  }
  return g;
}

IlpProblem random_ilp(std::mt19937_64& rng, int max_vars, int max_rows) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  IlpProblem p;
  const int n = uni(1, max_vars);
  for (int v = 0; v < n; ++v) {
    IlpVar var;
    var.type = kAllFenceTypes[uni(0, 3)];
    var.tag = 'e';
    var.id = v;
    var.cost = uni(1, 5);
    p.vars.push_back(var);
  }
  const int m = uni(0, max_rows);
  for (int r = 0; r < m; ++r) {
    std::vector<int> vs;
    const int len = uni(1, std::min(n, 5));
    while (static_cast<int>(vs.size()) < len) {
      const int v = uni(0, n - 1);
      if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
    }
    std::sort(vs.begin(), vs.end());
    p.rows.push_back({vs, {}});
  }
  return p;
}

std::string generated_program(int threads, int length, int contended, int contended_every, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::ostringstream os;
  for (int t = 0; t < threads; ++t)
    for (int v = 0; v < 4; ++v) os << "shared o" << t << "_" << v << "\n";
  for (int c = 0; c < contended; ++c) os << "shared c" << c << "\n";
  os << "local r\n\n";
  for (int t = 0; t < threads; ++t) {
    os << "thread t" << t << " {\n";
    for (int i = 0; i < length; ++i) {
      const bool hot = contended > 0 && i % contended_every == contended_every - 1;
      const std::string var = hot ? "c" + std::to_string(rng() % contended)
                                  : "o" + std::to_string(t) + "_" + std::to_string(rng() % 4);
      if (rng() % 2) os << "  " << var << " = " << i << ";\n";
      else os << "  r = " << var << ";\n";
    }
    os << "  end_thread\n}\n\n";
  }
  return os.str();
}

}  // namespace fencer::testing
