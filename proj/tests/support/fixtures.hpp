// SPDX-License-Identifier: Apache-2.0
//
// Hand-built graphs, random generators and corpus access shared by the unit
// tests and the acceptance runner.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/ilp.hpp"
#include "fencer/ir.hpp"

namespace fencer::testing {

std::string corpus_path(const std::string& name);
std::string read_file(const std::string& path);
Program corpus_program(const std::string& name);
const std::vector<std::string>& corpus_names();

// Five threads {a,b} {c,d} {e,f,g,h} {i,j} {k,l}; only the competing pairs
// used by the four intended cycles are present. Pos edges outside the third
// thread carry a full fence. Event ids follow the letters (a = 0).
Aeg seven_thread_aeg();
// The four intended cycles as node lists (any rotation), in the order
// (c,d,e,f,g), (f,g,i,j), (a,b,f,g,h), (g,h,k,l).
std::vector<std::vector<int>> seven_thread_cycle_nodes();
inline const std::vector<std::string> kSevenThreadRows = {
    "dp_(e,g) + f_(e,f) + f_(f,g) + lwf_(e,f) + lwf_(f,g) >= 1",
    "dp_(f,g) + f_(f,g) + lwf_(f,g) >= 1",
    "dp_(f,h) + f_(f,g) + f_(g,h) + lwf_(f,g) + lwf_(g,h) >= 1",
    "f_(g,h) >= 1",
};

// Message passing: Wx -> Wy in one thread, Ry -> Rx in the other; the first
// read feeds a local.
Aeg mp_aeg();

// Thread 0: a (Wx) -> b_i (Wp_i) -> c (Ry) for i < k. Thread 1: Wy -> Rx with
// a full fence. On TSO each path gives one cycle with a poWR delay (a, c).
Aeg diamond_aeg(int k);

struct RandomAegOptions {
  int max_events = 12;
  int max_threads = 4;
  int locations = 3;
  bool fences = true;
};
Aeg random_aeg(std::mt19937_64& rng, const RandomAegOptions& o = {});

// Covering problem over n variables with random costs in {1,...,5}.
IlpProblem random_ilp(std::mt19937_64& rng, int max_vars = 16, int max_rows = 12);

// Program with `threads` threads, each `length` assignments long. Most
// accesses hit thread-owned variables; every `contended_every`-th
// instruction touches one of `contended` shared variables.
std::string generated_program(int threads, int length, int contended, int contended_every, std::uint64_t seed);

}  // namespace fencer::testing
