// SPDX-License-Identifier: Apache-2.0
//
// 0/1 covering program over fence placements.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fencer/aeg.hpp"
#include "fencer/arch.hpp"
#include "fencer/cycles.hpp"
#include "fencer/pos_sets.hpp"

namespace fencer {

struct CostModel {
  double f = 3, lwf = 2, cf = 1, dp = 1;

  double cost(FenceType t) const;
  // "f=3,lwf=2,dp=1,cf=1"; unspecified types keep their default. Costs must
  // be strictly positive.
  static std::optional<CostModel> parse(std::string_view s);
  std::string str() const;
};

// Number text without trailing zeros ("3", "2.5").
std::string format_number(double v);

struct IlpVar {
  FenceType type = FenceType::Full;
  char tag = 'e';  // e: pos edge, p: delay pair, s: placement slot, d: dependency slot
  int id = 0;
  double cost = 0;
  int u = -1, v = -1;  // representative event pair, for ordering and display
  std::vector<int> edges;                   // pos edges this variable fences
  std::vector<std::pair<int, int>> pairs;   // dependency pairs it realizes

  std::string name() const;  // "f_e0", "dp_p1"
};

struct RowOrigin {
  int cycle = 0;  // index into the cycle list
  int delay = 0;  // index into that cycle's delays
};

struct IlpRow {
  std::vector<int> vars;  // sorted variable indices; the row reads sum >= 1
  std::vector<RowOrigin> origins;
};

struct IlpProblem {
  std::vector<IlpVar> vars;  // canonical order
  std::vector<IlpRow> rows;
  int unfixable = 0;  // uncovered delays with no placeable variable

  double objective(const std::vector<char>& x) const;
  bool satisfied(const std::vector<char>& x) const;
};

// Maps pos edges and delay pairs to variable keys. A key of -1 means no
// variable. Variables sharing a key and type are the same variable.
struct Keying {
  char edge_tag = 'e';
  char pair_tag = 'p';
  std::function<int(int edge, FenceType t)> edge_key;
  std::function<int(int from, int to)> pair_key;
};

// Keys edges by index and dependency pairs by their rank among the pairs
// used; intra-assignment edges get no variable.
Keying edge_keying(const Aeg& g);

IlpProblem build_ilp(const Aeg& g, const std::vector<CriticalCycle>& cycles, Architecture a,
                     const CostModel& cm, const Keying& keying);
IlpProblem build_ilp(const Aeg& g, const std::vector<CriticalCycle>& cycles, Architecture a,
                     const CostModel& cm = {});

// "dp_(e,g) + f_(e,f) + lwf_(e,f) >= 1" using event names.
std::string format_row(const IlpProblem& p, const IlpRow& r, const Aeg& g);
std::string format_var(const IlpVar& v, const Aeg& g);

// Number of distinct irreducible fence sets obtained by picking one variable
// per row (measurement only; exponential). Returns nullopt past `limit`
// partial products.
std::optional<std::size_t> trencher_set_count(const IlpProblem& p, std::size_t limit = 1u << 22);

}  // namespace fencer
