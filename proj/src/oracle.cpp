// SPDX-License-Identifier: Apache-2.0
#include "fencer/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace fencer {

namespace {

std::vector<std::vector<int>> successors(const Aeg& g) {
  std::vector<std::vector<int>> s(g.events.size());
  for (const auto& e : g.pos) s[e.from].push_back(e.to);
  for (const auto& [x, y] : g.cmp) {
    s[x].push_back(y);
    s[y].push_back(x);
  }
  for (auto& v : s) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return s;
}

int pos_edge(const Aeg& g, int x, int y) {
  for (int i = 0; i < static_cast<int>(g.pos.size()); ++i)
    if (g.pos[i].from == x && g.pos[i].to == y) return i;
  return -1;
}

// Events reachable by pos* from `start`, forwards or backwards.
std::vector<char> closure(const Aeg& g, int start, bool forward) {
  std::vector<char> in(g.events.size(), 0);
  in[start] = 1;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& e : g.pos) {
      const int a = forward ? e.from : e.to;
      const int b = forward ? e.to : e.from;
      if (in[a] && !in[b]) in[b] = grew = 1;
    }
  }
  return in;
}

std::vector<int> cumulative_edges(const Aeg& g, int w, int r) {
  const auto to_w = closure(g, w, false);
  const auto from_r = closure(g, r, true);
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(g.pos.size()); ++i)
    if (!g.pos[i].intra && (to_w[g.pos[i].to] || from_r[g.pos[i].from])) out.push_back(i);
  return out;
}

bool lwf_allowed(const Aeg& g, int edge) {
  const Dir a = g.events[g.pos[edge].from].dir;
  const Dir b = g.events[g.pos[edge].to].dir;
  return !(a == Dir::W && b == Dir::R) && !(a == Dir::R && b == Dir::W);
}

DelayKind kind_of(Dir a, Dir b) {
  if (a == Dir::W) return b == Dir::R ? DelayKind::poWR : DelayKind::poWW;
  return b == Dir::R ? DelayKind::poRR : DelayKind::poRW;
}

// Checks a delay against fence masks per pos edge and a set of dependencies.
bool satisfied(const Aeg& g, const Delay& d, const std::vector<FenceMask>& mask,
               const std::set<std::pair<int, int>>& deps) {
  const FenceMask F = bit(FenceType::Full), L = bit(FenceType::Lightweight);
  if (d.kind == DelayKind::rfe) {
    for (int e : cumulative_edges(g, d.from, d.to))
      if ((mask[e] & F) || ((mask[e] & L) && lwf_allowed(g, e))) return true;
    return false;
  }
  const bool dp = deps.count({d.from, d.to}) != 0;
  for (int e : d.path) {
    switch (d.kind) {
      case DelayKind::poWR:
        if (mask[e] & F) return true;
        break;
      case DelayKind::poWW:
      case DelayKind::poRW:
        if (mask[e] & (F | L)) return true;
        break;
      case DelayKind::poRR:
        if (mask[e] & (F | L)) return true;
        if ((mask[e] & bit(FenceType::Control)) && g.pos[e].poc && g.events[g.pos[e].to].dir == Dir::R) return true;
        break;
      default: break;
    }
  }
  return (d.kind == DelayKind::poRW || d.kind == DelayKind::poRR) && dp;
}

std::vector<FenceMask> existing(const Aeg& g) {
  std::vector<FenceMask> m;
  for (const auto& e : g.pos) m.push_back(e.intra ? 0 : e.fences);
  return m;
}

}  // namespace

std::vector<CriticalCycle> brute_cycles(const Aeg& g, Architecture a, int max_events) {
  const int n = static_cast<int>(g.events.size());
  if (n > max_events) throw TooLarge("brute-force cycle search limited to " + std::to_string(max_events) + " events");
  const auto succ = successors(g);
  std::vector<std::vector<int>> raw;
  std::vector<int> path;
  std::vector<char> on(n, 0);
  std::function<void(int, int)> dfs = [&](int root, int u) {
    for (int v : succ[u]) {
      if (v == root && path.size() >= 2) raw.push_back(path);
      if (v <= root || on[v]) continue;
      on[v] = 1;
      path.push_back(v);
      dfs(root, v);
      path.pop_back();
      on[v] = 0;
    }
  };
  for (int root = 0; root < n; ++root) {
    path = {root};
    on[root] = 1;
    dfs(root, root);
    on[root] = 0;
  }

  const auto base_mask = existing(g);
  std::vector<CriticalCycle> out;
  for (const auto& c : raw) {
    const int len = static_cast<int>(c.size());
    auto th = [&](int i) { return g.events[c[(i + len) % len]].thread; };
    int pos_arcs = 0, cmp_arcs = 0;
    for (int i = 0; i < len; ++i) (th(i) == th(i + 1) ? pos_arcs : cmp_arcs)++;
    if (pos_arcs == 0 || cmp_arcs == 0) continue;
    std::set<int> threads;
    for (int i = 0; i < len; ++i) threads.insert(th(i));
    if (static_cast<int>(threads.size()) != cmp_arcs) continue;  // some thread visited twice

    // Start at a node entered by a cmp arc and cut into segments.
    int s = 0;
    while (th(s - 1) == th(s)) ++s;
    bool ok = true;
    std::map<AbsLoc, int> per_loc;
    std::vector<Delay> delays;
    for (int k = 0; k < len && ok;) {
      const int i = s + k;
      int j = i;
      Delay d;
      while (th(j + 1) == th(i)) {
        d.path.push_back(pos_edge(g, c[j % len], c[(j + 1) % len]));
        ++j;
      }
      const int entry = c[i % len], exit = c[j % len];
      ++per_loc[g.events[entry].loc];
      if (entry != exit) {
        if (g.events[entry].loc == g.events[exit].loc) ok = false;
        ++per_loc[g.events[exit].loc];
        d.from = entry;
        d.to = exit;
        d.kind = kind_of(g.events[entry].dir, g.events[exit].dir);
        if (is_delay(d.kind, a)) delays.push_back(d);
      }
      const int next = c[(j + 1) % len];
      if (a == Architecture::Power && g.events[exit].dir == Dir::W && g.events[next].dir == Dir::R) {
        Delay r;
        r.from = exit;
        r.to = next;
        r.kind = DelayKind::rfe;
        delays.push_back(r);
      }
      k += j - i + 1;
    }
    if (!ok) continue;
    if (std::any_of(per_loc.begin(), per_loc.end(), [](const auto& kv) { return kv.second > 3; })) continue;
    if (delays.empty()) continue;
    bool open = false;
    for (auto& d : delays) {
      d.covered = satisfied(g, d, base_mask, g.deps);
      open = open || !d.covered;
    }
    if (!open) continue;

    CriticalCycle cc;
    cc.nodes = c;  // the DFS roots every cycle at its smallest node
    for (std::size_t i = 0; i < c.size(); ++i) cc.id += (i ? " " : "") + std::to_string(c[i]);
    // Order delays as the main search does: by position from the first node.
    std::vector<int> rank(n, 0);
    for (int i = 0; i < len; ++i) rank[c[i]] = i;
    std::stable_sort(delays.begin(), delays.end(), [&](const Delay& x, const Delay& y) {
      return std::make_pair(rank[x.from], x.kind == DelayKind::rfe) < std::make_pair(rank[y.from], y.kind == DelayKind::rfe);
    });
    cc.delays = std::move(delays);
    out.push_back(std::move(cc));
  }
  std::sort(out.begin(), out.end(), [](const CriticalCycle& x, const CriticalCycle& y) { return x.nodes < y.nodes; });
  return out;
}

CoverageVerdict verify_coverage(const std::vector<CriticalCycle>& cycles, const FencePlan& plan, const Aeg& g,
                                Architecture a) {
  std::vector<FenceMask> mask = existing(g);
  std::set<std::pair<int, int>> deps = g.deps;
  auto after = [&](int e) {
    const Event& ev = g.events[e];
    return Slot{ev.origin.body, ev.after};
  };
  auto before = [&](int e) {
    const Event& ev = g.events[e];
    return Slot{ev.origin.body, {ev.origin.index}};
  };
  for (const auto& pl : plan.placements) {
    const FenceMask b = bit(pl.type);
    if (!pl.slot) {
      for (int e : pl.edges)
        if (!g.pos.at(e).intra) mask[e] |= b;
      for (const auto& pr : pl.pairs) deps.insert(pr);
      continue;
    }
    if (pl.type == FenceType::Dependency) {
      for (const auto& ev : g.events)
        if (ev.dir == Dir::R && ev.dp_local == pl.local)
          for (const auto& tv : g.events)
            if (tv.thread == ev.thread && tv.origin.valid() && before(tv.id) == *pl.slot) deps.insert({ev.id, tv.id});
      continue;
    }
    for (int i = 0; i < static_cast<int>(g.pos.size()); ++i) {
      const PosEdge& e = g.pos[i];
      if (e.intra) continue;
      const bool at_from = g.events[e.from].origin.valid() && !g.events[e.from].after.empty() && after(e.from) == *pl.slot;
      const bool at_to = g.events[e.to].origin.valid() && before(e.to) == *pl.slot;
      if (at_from || at_to) mask[i] |= b;
    }
  }
  CoverageVerdict v;
  std::size_t best_ways = 0;
  for (int ci = 0; ci < static_cast<int>(cycles.size()); ++ci) {
    const auto& c = cycles[ci];
    for (int di = 0; di < static_cast<int>(c.delays.size()); ++di) {
      const Delay& d = c.delays[di];
      if (!is_delay(d.kind, a)) continue;
      if (d.kind == DelayKind::rfe && cumulative_edges(g, d.from, d.to).empty()) {
        ++v.skipped;
        continue;
      }
      if (satisfied(g, d, mask, deps)) continue;
      // Report the most constrained uncovered delay: fewest ways to fix it.
      std::size_t ways = d.kind == DelayKind::rfe ? cumulative_edges(g, d.from, d.to).size()
                                                  : d.path.size() * std::size_t{2} + 1;
      if (d.kind == DelayKind::poWR) ways = d.path.size();
      if (v.covered || ways < best_ways) {
        v.covered = false;
        best_ways = ways;
        v.cycle = ci;
        v.delay = di;
        v.witness = "cycle " + std::to_string(ci + 1) + ", delay (" + g.events[d.from].name + "," +
                    g.events[d.to].name + ")";
      }
    }
  }
  return v;
}

}  // namespace fencer
