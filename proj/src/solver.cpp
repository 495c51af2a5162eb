// SPDX-License-Identifier: Apache-2.0
#include "fencer/solver.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace fencer {

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::CapExceeded: return "cap-exceeded";
  }
  return "?";
}

namespace {

constexpr double kEps = 1e-9;

// Covering instance over variables 0..n-1.
struct Cover {
  std::vector<double> cost;
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<int>> rows_of;  // per variable

  void index() {
    rows_of.assign(cost.size(), {});
    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
      for (int v : rows[r]) rows_of[v].push_back(r);
  }
};

double dual_bound(const Cover& c, const std::vector<int>& x, const std::vector<char>& covered) {
  std::vector<double> slack(c.cost.size());
  for (std::size_t v = 0; v < slack.size(); ++v) slack[v] = x[v] < 0 ? c.cost[v] : 0;
  double lb = 0;
  for (std::size_t r = 0; r < c.rows.size(); ++r) {
    if (covered[r]) continue;
    double y = -1;
    for (int v : c.rows[r])
      if (x[v] < 0) y = y < 0 ? slack[v] : std::min(y, slack[v]);
    if (y <= 0) continue;
    lb += y;
    for (int v : c.rows[r])
      if (x[v] < 0) slack[v] -= y;
  }
  return lb;
}

std::vector<char> greedy(const Cover& c) {
  const int n = static_cast<int>(c.cost.size());
  std::vector<char> x(n, 0), covered(c.rows.size(), 0);
  std::size_t left = c.rows.size();
  while (left > 0) {
    int best = -1;
    double best_ratio = 0;
    for (int v = 0; v < n; ++v) {
      if (x[v]) continue;
      int gain = 0;
      for (int r : c.rows_of[v]) gain += covered[r] ? 0 : 1;
      if (gain == 0) continue;
      const double ratio = c.cost[v] / gain;
      if (best < 0 || ratio < best_ratio - kEps) {
        best = v;
        best_ratio = ratio;
      }
    }
    if (best < 0) break;  // an empty row: infeasible
    x[best] = 1;
    for (int r : c.rows_of[best])
      if (!covered[r]) {
        covered[r] = 1;
        --left;
      }
  }
  // Drop variables whose rows stay covered without them, most expensive first.
  std::vector<int> cnt(c.rows.size(), 0);
  for (int v = 0; v < n; ++v)
    if (x[v])
      for (int r : c.rows_of[v]) ++cnt[r];
  std::vector<int> chosen;
  for (int v = 0; v < n; ++v)
    if (x[v]) chosen.push_back(v);
  std::stable_sort(chosen.begin(), chosen.end(), [&](int a, int b) { return c.cost[a] > c.cost[b]; });
  for (int v : chosen) {
    if (std::all_of(c.rows_of[v].begin(), c.rows_of[v].end(), [&](int r) { return cnt[r] > 1; })) {
      x[v] = 0;
      for (int r : c.rows_of[v]) --cnt[r];
    }
  }
  return x;
}

// Removes rows implied by a subset row and fixes to 0 every variable whose
// rows are all hit by a cheaper variable, or by an equally cheap later one.
// Both keep the lexicographically smallest optimum. Returns the kept
// variables in increasing order; `c` is rewritten over them.
std::vector<int> presolve(Cover& c) {
  const int n = static_cast<int>(c.cost.size());
  std::vector<char> alive(n, 1);
  std::vector<int> mark(n, -1);
  for (bool changed = true; changed;) {
    changed = false;
    c.index();
    // Row dominance, smallest rows first.
    std::vector<int> order(c.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return c.rows[a].size() < c.rows[b].size(); });
    std::vector<char> dead(c.rows.size(), 0);
    std::vector<int> stamp(n, -1);
    for (int r : order) {
      if (dead[r]) continue;
      int rare = c.rows[r][0];
      for (int v : c.rows[r]) {
        stamp[v] = r;
        if (c.rows_of[v].size() < c.rows_of[rare].size()) rare = v;
      }
      for (int q : c.rows_of[rare]) {
        if (q == r || dead[q] || c.rows[q].size() < c.rows[r].size()) continue;
        if (c.rows[q].size() == c.rows[r].size() && q < r) continue;
        std::size_t hit = 0;
        for (int v : c.rows[q]) hit += stamp[v] == r;
        if (hit == c.rows[r].size()) dead[q] = 1;
      }
    }
    std::vector<std::vector<int>> rows;
    for (std::size_t r = 0; r < c.rows.size(); ++r)
      if (!dead[r]) rows.push_back(std::move(c.rows[r]));
    changed = rows.size() != c.rows.size();
    c.rows = std::move(rows);
    c.index();
    std::fill(mark.begin(), mark.end(), -1);
    // Variable dominance. Removing v leaves the row indices of the others intact.
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      if (c.rows_of[v].empty()) {
        alive[v] = 0;
        continue;
      }
      // Candidates: variables present in every row of v.
      std::vector<int> cand;
      for (int w : c.rows[c.rows_of[v][0]])
        if (w != v && alive[w]) cand.push_back(w);
      for (std::size_t k = 1; k < c.rows_of[v].size() && !cand.empty(); ++k) {
        const int r = c.rows_of[v][k];
        for (int w : c.rows[r]) mark[w] = r;
        cand.erase(std::remove_if(cand.begin(), cand.end(), [&](int w) { return mark[w] != r; }), cand.end());
      }
      for (int w : cand) {
        if (c.cost[w] < c.cost[v] - kEps || (c.cost[w] <= c.cost[v] + kEps && w > v)) {
          alive[v] = 0;
          for (int r : c.rows_of[v]) {
            auto& row = c.rows[r];
            row.erase(std::find(row.begin(), row.end(), v));
          }
          c.rows_of[v].clear();
          changed = true;
          break;
        }
      }
    }
  }
  std::vector<int> kept, local(n, -1);
  for (int v = 0; v < n; ++v)
    if (alive[v]) {
      local[v] = static_cast<int>(kept.size());
      kept.push_back(v);
    }
  Cover out;
  for (int v : kept) out.cost.push_back(c.cost[v]);
  for (auto& r : c.rows) {
    std::vector<int> lr;
    for (int v : r) lr.push_back(local[v]);
    std::sort(lr.begin(), lr.end());
    out.rows.push_back(std::move(lr));
  }
  out.index();
  c = std::move(out);
  return kept;
}

class BranchAndBound {
 public:
  BranchAndBound(const Cover& c, std::uint64_t& nodes, std::uint64_t cap,
                 std::chrono::steady_clock::time_point deadline)
      : c_(c), nodes_(nodes), cap_(cap), deadline_(deadline), x_(c.cost.size(), -1), cov_(c.rows.size(), 0),
        free_(c.rows.size(), 0) {
    for (std::size_t r = 0; r < c.rows.size(); ++r) free_[r] = static_cast<int>(c.rows[r].size());
    for (std::size_t r = 0; r < c.rows.size(); ++r)
      if (free_[r] == 0) infeasible_ = true;
  }

  bool infeasible() const { return infeasible_ || !found_any_; }
  bool capped() const { return capped_; }
  const std::vector<char>& best() const { return best_x_; }

  void run() {
    if (infeasible_) return;
    best_x_ = greedy(c_);
    best_ = 0;
    for (std::size_t v = 0; v < best_x_.size(); ++v)
      if (best_x_[v]) best_ += c_.cost[v];
    found_any_ = true;
    from_search_ = false;
    uncovered_ = static_cast<int>(c_.rows.size());
    dfs(0, 0.0);
  }

 private:
  const Cover& c_;
  std::uint64_t& nodes_;
  std::uint64_t cap_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<int> x_;
  std::vector<char> cov_;
  std::vector<int> free_;
  int uncovered_ = 0;
  bool infeasible_ = false;
  bool found_any_ = false;
  bool capped_ = false;
  bool from_search_ = false;  // incumbent found by the search itself (ties resolved)
  double best_ = 0;
  std::vector<char> best_x_;

  void dfs(int i, double cost) {
    if (capped_) return;
    if (++nodes_ > cap_ || (nodes_ % 256 == 0 && std::chrono::steady_clock::now() > deadline_)) {
      capped_ = true;
      return;
    }
    if (uncovered_ == 0) {
      if (cost < best_ - kEps || (!from_search_ && cost <= best_ + kEps)) {
        best_ = cost;
        best_x_.assign(x_.size(), 0);
        for (std::size_t v = 0; v < x_.size(); ++v) best_x_[v] = x_[v] == 1;
        from_search_ = true;
      }
      return;
    }
    if (i == static_cast<int>(x_.size())) return;
    const double bound = cost + dual_bound(c_, x_, cov_);
    if (from_search_ ? bound >= best_ - kEps : bound > best_ + kEps) return;

    bool useful = false;
    for (int r : c_.rows_of[i]) useful = useful || !cov_[r];
    // Branch 0.
    bool ok = true;
    for (int r : c_.rows_of[i]) {
      --free_[r];
      if (!cov_[r] && free_[r] == 0) ok = false;
    }
    x_[i] = 0;
    if (ok) dfs(i + 1, cost);
    x_[i] = -1;
    if (!useful) {
      for (int r : c_.rows_of[i]) ++free_[r];
      return;
    }
    // Branch 1.
    x_[i] = 1;
    for (int r : c_.rows_of[i])
      if (cov_[r]++ == 0) --uncovered_;
    dfs(i + 1, cost + c_.cost[i]);
    for (int r : c_.rows_of[i])
      if (--cov_[r] == 0) ++uncovered_;
    for (int r : c_.rows_of[i]) ++free_[r];
    x_[i] = -1;
  }
};

// Splits p into independent covering instances; returns the global variable
// list of each, in increasing order.
std::vector<std::vector<int>> components(const IlpProblem& p) {
  const int n = static_cast<int>(p.vars.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (const auto& r : p.rows)
    for (std::size_t k = 1; k < r.vars.size(); ++k) parent[find(r.vars[k])] = find(r.vars[0]);
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < n; ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [root, vs] : groups) out.push_back(std::move(vs));
  return out;
}

Cover whole(const IlpProblem& p) {
  Cover c;
  for (const auto& v : p.vars) c.cost.push_back(v.cost);
  for (const auto& r : p.rows) c.rows.push_back(r.vars);
  c.index();
  return c;
}

}  // namespace

Solution solve(const IlpProblem& p, const SolverOptions& opt) {
  Solution s;
  s.assignment.assign(p.vars.size(), 0);
  for (const auto& r : p.rows)
    if (r.vars.empty()) {
      s.status = SolveStatus::Infeasible;
      return s;
    }
  auto comps = components(p);
  std::vector<int> comp_of(p.vars.size()), local(p.vars.size());
  for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci)
    for (int k = 0; k < static_cast<int>(comps[ci].size()); ++k) {
      comp_of[comps[ci][k]] = ci;
      local[comps[ci][k]] = k;
    }
  std::vector<Cover> covers(comps.size());
  for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci)
    for (int v : comps[ci]) covers[ci].cost.push_back(p.vars[v].cost);
  for (const auto& r : p.rows) {
    std::vector<int> lr;
    for (int v : r.vars) lr.push_back(local[v]);
    covers[comp_of[r.vars[0]]].rows.push_back(std::move(lr));
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(opt.time_limit_s));
  for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
    Cover& c = covers[ci];
    if (c.rows.empty()) continue;
    const std::vector<int> kept = presolve(c);
    BranchAndBound bb(c, s.nodes, opt.node_cap, deadline);
    bb.run();
    if (bb.capped()) s.status = SolveStatus::CapExceeded;
    for (std::size_t k = 0; k < kept.size(); ++k) s.assignment[comps[ci][kept[k]]] = bb.best()[k];
  }
  s.objective = p.objective(s.assignment);
  return s;
}

Solution brute_force_solve(const IlpProblem& p) {
  const std::size_t n = p.vars.size();
  if (n > kBruteForceMaxVars)
    throw TooManyVariables("brute force limited to " + std::to_string(kBruteForceMaxVars) + " variables");
  std::vector<std::uint32_t> row_masks;
  for (const auto& r : p.rows) {
    std::uint32_t m = 0;
    for (int v : r.vars) m |= 1u << v;
    row_masks.push_back(m);
  }
  Solution s;
  s.assignment.assign(n, 0);
  bool found = false;
  double best = 0;
  std::uint32_t best_mask = 0;
  // Bit v stands for variable v; lexicographic order on (x0, x1, ...) is the
  // order on bit-reversed masks.
  auto lex_less = [n](std::uint32_t a, std::uint32_t b) {
    for (std::size_t v = 0; v < n; ++v) {
      const bool x = a >> v & 1u, y = b >> v & 1u;
      if (x != y) return !x;
    }
    return false;
  };
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    const auto mask = static_cast<std::uint32_t>(m);
    bool ok = true;
    for (auto r : row_masks)
      if (!(r & mask)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    double cost = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (mask >> v & 1u) cost += p.vars[v].cost;
    if (!found || cost < best - kEps || (cost <= best + kEps && lex_less(mask, best_mask))) {
      found = true;
      best = cost;
      best_mask = mask;
    }
  }
  if (!found) {
    s.status = SolveStatus::Infeasible;
    return s;
  }
  for (std::size_t v = 0; v < n; ++v) s.assignment[v] = best_mask >> v & 1u;
  s.objective = p.objective(s.assignment);
  s.nodes = std::uint64_t{1} << n;
  return s;
}

double lp_lower_bound(const IlpProblem& p) {
  Cover c = whole(p);
  std::vector<int> x(c.cost.size(), -1);
  std::vector<char> covered(c.rows.size(), 0);
  return dual_bound(c, x, covered);
}

std::vector<char> greedy_cover(const IlpProblem& p) { return greedy(whole(p)); }

// ---------------------------------------------------------------- LP text

std::string export_lp(const IlpProblem& p) {
  std::ostringstream os;
  os << "Minimize\n obj:";
  for (std::size_t i = 0; i < p.vars.size(); ++i)
    os << (i ? " + " : " ") << format_number(p.vars[i].cost) << ' ' << p.vars[i].name();
  os << "\nSubject To";
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    os << "\n c" << r << ':';
    for (std::size_t k = 0; k < p.rows[r].vars.size(); ++k)
      os << (k ? " + " : " ") << p.vars[p.rows[r].vars[k]].name();
    os << " >= 1";
  }
  if (!p.vars.empty()) {
    os << "\nBinary";
    for (const auto& v : p.vars) os << "\n " << v.name();
  }
  os << "\nEnd";
  return os.str();
}

namespace {

IlpVar parse_var_name(const std::string& n) {
  const auto us = n.find('_');
  if (us == std::string::npos || us + 2 > n.size()) throw std::invalid_argument("bad variable name '" + n + "'");
  auto t = parse_fence(std::string_view(n).substr(0, us));
  if (!t) throw std::invalid_argument("bad fence type in '" + n + "'");
  IlpVar v;
  v.type = *t;
  v.tag = n[us + 1];
  const char* b = n.data() + us + 2;
  const char* e = n.data() + n.size();
  auto [ptr, ec] = std::from_chars(b, e, v.id);
  if (ec != std::errc() || ptr != e || b == e) throw std::invalid_argument("bad variable id in '" + n + "'");
  return v;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

IlpProblem read_lp(const std::string& text) {
  IlpProblem p;
  std::map<std::string, int> index;
  std::map<std::string, double> costs;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> binaries;
  enum { None, Obj, Rows, Bin, Done } section = None;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    auto w = words(line);
    if (w.empty()) continue;
    if (w.size() == 1 && w[0] == "Minimize") { section = Obj; continue; }
    if (w.size() == 2 && w[0] == "Subject" && w[1] == "To") { section = Rows; continue; }
    if (w.size() == 1 && w[0] == "Binary") { section = Bin; continue; }
    if (w.size() == 1 && w[0] == "End") { section = Done; continue; }
    switch (section) {
      case Obj: {
        if (w[0] != "obj:") throw std::invalid_argument("expected objective");
        for (std::size_t k = 1; k < w.size();) {
          if (w[k] == "+") { ++k; continue; }
          if (k + 1 >= w.size()) throw std::invalid_argument("dangling objective term");
          double c = 0;
          auto [ptr, ec] = std::from_chars(w[k].data(), w[k].data() + w[k].size(), c);
          if (ec != std::errc() || ptr != w[k].data() + w[k].size()) throw std::invalid_argument("bad coefficient " + w[k]);
          costs[w[k + 1]] = c;
          k += 2;
        }
        break;
      }
      case Rows: {
        if (w.size() < 4 || w[0].back() != ':' || w[w.size() - 2] != ">=" || w.back() != "1")
          throw std::invalid_argument("bad constraint: " + line);
        std::vector<std::string> names;
        for (std::size_t k = 1; k + 2 < w.size(); ++k)
          if (w[k] != "+") names.push_back(w[k]);
        rows.push_back(std::move(names));
        break;
      }
      case Bin:
        for (const auto& n : w) binaries.push_back(n);
        break;
      default: throw std::invalid_argument("unexpected line: " + line);
    }
  }
  if (section != Done) throw std::invalid_argument("missing End");
  std::vector<std::string> names = binaries;
  for (const auto& [n, c] : costs)
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  for (const auto& n : names) {
    IlpVar v = parse_var_name(n);
    auto it = costs.find(n);
    v.cost = it == costs.end() ? 0 : it->second;
    index[n] = static_cast<int>(p.vars.size());
    p.vars.push_back(v);
  }
  for (const auto& r : rows) {
    IlpRow row;
    for (const auto& n : r) {
      auto it = index.find(n);
      if (it == index.end()) throw std::invalid_argument("undeclared variable " + n);
      row.vars.push_back(it->second);
    }
    std::sort(row.vars.begin(), row.vars.end());
    p.rows.push_back(std::move(row));
  }
  return p;
}

}  // namespace fencer
