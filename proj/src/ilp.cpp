// SPDX-License-Identifier: Apache-2.0
#include "fencer/ilp.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace fencer {

double CostModel::cost(FenceType t) const {
  switch (t) {
    case FenceType::Full: return f;
    case FenceType::Lightweight: return lwf;
    case FenceType::Control: return cf;
    case FenceType::Dependency: return dp;
  }
  return f;
}

std::optional<CostModel> CostModel::parse(std::string_view s) {
  CostModel cm;
  while (!s.empty()) {
    const auto comma = s.find(',');
    std::string_view item = s.substr(0, comma);
    s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    auto t = parse_fence(item.substr(0, eq));
    if (!t) return std::nullopt;
    std::string_view num = item.substr(eq + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(v > 0)) return std::nullopt;
    switch (*t) {
      case FenceType::Full: cm.f = v; break;
      case FenceType::Lightweight: cm.lwf = v; break;
      case FenceType::Control: cm.cf = v; break;
      case FenceType::Dependency: cm.dp = v; break;
    }
  }
  return cm;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string CostModel::str() const {
  return "f=" + format_number(f) + ",lwf=" + format_number(lwf) + ",cf=" + format_number(cf) +
         ",dp=" + format_number(dp);
}

std::string IlpVar::name() const {
  return std::string(fence_name(type)) + "_" + tag + std::to_string(id);
}

double IlpProblem::objective(const std::vector<char>& x) const {
  double s = 0;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (x[i]) s += vars[i].cost;
  return s;
}

bool IlpProblem::satisfied(const std::vector<char>& x) const {
  for (const auto& r : rows)
    if (std::none_of(r.vars.begin(), r.vars.end(), [&](int v) { return x[v] != 0; })) return false;
  return true;
}

Keying edge_keying(const Aeg& g) {
  Keying k;
  k.edge_key = [&g](int edge, FenceType) { return g.pos[edge].intra ? -1 : edge; };
  return k;
}

namespace {

struct VarKey {
  FenceType type;
  char tag;
  int key;
  auto operator<=>(const VarKey&) const = default;
};

}  // namespace

IlpProblem build_ilp(const Aeg& g, const std::vector<CriticalCycle>& cycles, Architecture a,
                     const CostModel& cm) {
  return build_ilp(g, cycles, a, cm, edge_keying(g));
}

IlpProblem build_ilp(const Aeg& g, const std::vector<CriticalCycle>& cycles, Architecture a,
                     const CostModel& cm, const Keying& keying) {
  IlpProblem p;
  auto dp_ok = [&](const Delay& d) {
    return has(fence_options(d.kind, a), FenceType::Dependency) && g.events[d.from].dir == Dir::R &&
           !g.events[d.from].dp_local.empty();
  };

  std::function<int(int, int)> pair_key = keying.pair_key;
  if (!pair_key) {
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : cycles)
      for (const auto& d : c.delays)
        if (!d.covered && d.kind != DelayKind::rfe && dp_ok(d)) pairs.insert({d.from, d.to});
    std::map<std::pair<int, int>, int> rank;
    for (const auto& pr : pairs) rank.emplace(pr, static_cast<int>(rank.size()));
    pair_key = [rank](int x, int y) {
      auto it = rank.find({x, y});
      return it == rank.end() ? -1 : it->second;
    };
  }

  std::map<VarKey, int> index;
  std::vector<IlpVar> vars;
  auto var = [&](FenceType t, char tag, int key) {
    auto [it, fresh] = index.emplace(VarKey{t, tag, key}, static_cast<int>(vars.size()));
    if (fresh) {
      IlpVar v;
      v.type = t;
      v.tag = tag;
      v.id = key;
      v.cost = cm.cost(t);
      vars.push_back(v);
    }
    return it->second;
  };
  auto note = [](IlpVar& v, int x, int y) {
    if (v.u < 0 || std::make_pair(x, y) < std::make_pair(v.u, v.v)) {
      v.u = x;
      v.v = y;
    }
  };
  auto edge_var = [&](int edge, FenceType t, std::set<int>& row) {
    const int k = keying.edge_key(edge, t);
    if (k < 0) return;
    const int vi = var(t, keying.edge_tag, k);
    IlpVar& v = vars[vi];
    if (std::find(v.edges.begin(), v.edges.end(), edge) == v.edges.end()) v.edges.push_back(edge);
    note(v, g.pos[edge].from, g.pos[edge].to);
    row.insert(vi);
  };

  // Rows over pre-sort variable ids, deduplicated as they are produced. A
  // delay's row depends only on its endpoints and path, so it is computed
  // once per distinct delay.
  std::vector<std::pair<std::vector<int>, std::vector<RowOrigin>>> raw;
  std::map<std::vector<int>, int> row_index;
  std::map<std::tuple<int, int, std::vector<int>>, int> delay_row;
  for (int ci = 0; ci < static_cast<int>(cycles.size()); ++ci) {
    const auto& c = cycles[ci];
    for (int di = 0; di < static_cast<int>(c.delays.size()); ++di) {
      const Delay& d = c.delays[di];
      if (d.covered || !is_delay(d.kind, a)) continue;
      auto key = std::make_tuple(d.from, d.to, d.kind == DelayKind::rfe ? std::vector<int>{} : d.path);
      auto known = delay_row.find(key);
      if (known != delay_row.end()) {
        if (known->second < 0) ++p.unfixable;
        else raw[known->second].second.push_back({ci, di});
        continue;
      }
      const FenceMask opts = fence_options(d.kind, a);
      std::set<int> row;
      if (d.kind == DelayKind::rfe) {
        for (int e : cumul(g, d.from, d.to)) {
          edge_var(e, FenceType::Full, row);
          const DelayKind k = edge_kind(g, e);
          if (k != DelayKind::poWR && k != DelayKind::poRW) edge_var(e, FenceType::Lightweight, row);
        }
      } else {
        for (int e : d.path) {
          edge_var(e, FenceType::Full, row);
          if (has(opts, FenceType::Lightweight)) edge_var(e, FenceType::Lightweight, row);
          if (has(opts, FenceType::Control) && g.pos[e].poc && g.events[g.pos[e].to].dir == Dir::R)
            edge_var(e, FenceType::Control, row);
        }
        if (dp_ok(d)) {
          const int k = pair_key(d.from, d.to);
          if (k >= 0) {
            const int vi = var(FenceType::Dependency, keying.pair_tag, k);
            IlpVar& v = vars[vi];
            if (std::find(v.pairs.begin(), v.pairs.end(), std::make_pair(d.from, d.to)) == v.pairs.end())
              v.pairs.emplace_back(d.from, d.to);
            note(v, d.from, d.to);
            row.insert(vi);
          }
        }
      }
      if (row.empty()) {
        delay_row.emplace(std::move(key), -1);
        ++p.unfixable;
        continue;
      }
      std::vector<int> vs(row.begin(), row.end());
      auto [it, fresh] = row_index.emplace(vs, static_cast<int>(raw.size()));
      if (fresh) raw.push_back({std::move(vs), {}});
      raw[it->second].second.push_back({ci, di});
      delay_row.emplace(std::move(key), it->second);
    }
  }

  std::vector<int> order(vars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const IlpVar& a1 = vars[x];
    const IlpVar& b1 = vars[y];
    return std::tie(a1.u, a1.v, a1.type, a1.tag, a1.id) < std::tie(b1.u, b1.v, b1.type, b1.tag, b1.id);
  });
  std::vector<int> remap(vars.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = static_cast<int>(i);
    p.vars.push_back(std::move(vars[order[i]]));
  }
  for (auto& v : p.vars) {
    std::sort(v.edges.begin(), v.edges.end());
    std::sort(v.pairs.begin(), v.pairs.end());
  }

  for (auto& [row, origins] : raw) {
    std::vector<int> vs;
    for (int v : row) vs.push_back(remap[v]);
    std::sort(vs.begin(), vs.end());
    p.rows.push_back({std::move(vs), std::move(origins)});
  }
  return p;
}

std::string format_var(const IlpVar& v, const Aeg& g) {
  auto nm = [&](int e) { return e >= 0 && e < static_cast<int>(g.events.size()) ? g.events[e].name : "?"; };
  return std::string(fence_name(v.type)) + "_(" + nm(v.u) + "," + nm(v.v) + ")";
}

std::string format_row(const IlpProblem& p, const IlpRow& r, const Aeg& g) {
  auto rank = [](FenceType t) {
    switch (t) {
      case FenceType::Dependency: return 0;
      case FenceType::Full: return 1;
      case FenceType::Lightweight: return 2;
      case FenceType::Control: return 3;
    }
    return 4;
  };
  std::vector<int> vs = r.vars;
  std::stable_sort(vs.begin(), vs.end(), [&](int x, int y) { return rank(p.vars[x].type) < rank(p.vars[y].type); });
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? " + " : "") + format_var(p.vars[vs[i]], g);
  return out + " >= 1";
}

std::optional<std::size_t> trencher_set_count(const IlpProblem& p, std::size_t limit) {
  std::set<std::vector<int>> sets{{}};
  for (const auto& r : p.rows) {
    std::set<std::vector<int>> next;
    for (const auto& s : sets)
      for (int v : r.vars) {
        std::vector<int> t = s;
        if (!std::binary_search(t.begin(), t.end(), v)) t.insert(std::lower_bound(t.begin(), t.end(), v), v);
        next.insert(std::move(t));
        if (next.size() > limit) return std::nullopt;
      }
    sets = std::move(next);
  }
  // Keep the irreducible sets: no proper subset is also a candidate.
  std::size_t count = 0;
  for (const auto& s : sets) {
    bool minimal = true;
    for (const auto& t : sets) {
      if (t.size() >= s.size()) continue;
      if (std::includes(s.begin(), s.end(), t.begin(), t.end())) {
        minimal = false;
        break;
      }
    }
    if (minimal && !p.rows.empty()) ++count;
  }
  return count;
}

}  // namespace fencer
