// SPDX-License-Identifier: Apache-2.0
#include "fencer/cycles.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include "fencer/pos_sets.hpp"

namespace fencer {

std::string canonical_id(std::vector<int> nodes) {
  if (!nodes.empty()) std::rotate(nodes.begin(), std::min_element(nodes.begin(), nodes.end()), nodes.end());
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes.size(); ++i) os << (i ? " " : "") << nodes[i];
  return os.str();
}

bool delay_covered(const Aeg& g, const Delay& d, Architecture a) {
  if (!is_delay(d.kind, a)) return true;
  const FenceMask opts = fence_options(d.kind, a);
  if (d.kind == DelayKind::rfe) {
    for (int e : cumul(g, d.from, d.to)) {
      const PosEdge& pe = g.pos[e];
      if (pe.intra) continue;
      if (has(pe.fences, FenceType::Full)) return true;
      const DelayKind k = edge_kind(g, e);
      if (has(pe.fences, FenceType::Lightweight) && k != DelayKind::poWR && k != DelayKind::poRW) return true;
    }
    return false;
  }
  for (int e : d.path) {
    const PosEdge& pe = g.pos[e];
    if (pe.intra) continue;
    if (pe.fences & opts & (bit(FenceType::Full) | bit(FenceType::Lightweight))) return true;
    if (has(opts, FenceType::Control) && has(pe.fences, FenceType::Control) && pe.poc &&
        g.events[pe.to].dir == Dir::R)
      return true;
  }
  return has(opts, FenceType::Dependency) && g.deps.count({d.from, d.to}) != 0;
}

CriticalCycle classify_delays(const Aeg& g, std::vector<int> nodes, Architecture a) {
  CriticalCycle c;
  if (nodes.empty()) return c;
  std::rotate(nodes.begin(), std::min_element(nodes.begin(), nodes.end()), nodes.end());
  c.nodes = nodes;
  c.id = canonical_id(nodes);
  const int n = static_cast<int>(nodes.size());
  auto thread = [&](int i) { return g.events[nodes[((i % n) + n) % n]].thread; };
  int start = -1;
  for (int i = 0; i < n && start < 0; ++i)
    if (thread(i - 1) != thread(i)) start = i;
  if (start < 0) return c;  // a single thread: not a cycle we classify
  const bool rfe = has_rfe_delays(a);
  for (int k = 0; k < n;) {
    const int i = start + k;
    int j = i;
    Delay d;
    while (thread(j + 1) == thread(i)) {
      d.path.push_back(g.find_pos(nodes[j % n], nodes[(j + 1) % n]));
      ++j;
    }
    const int entry = nodes[i % n];
    const int exit = nodes[j % n];
    if (entry != exit) {
      d.from = entry;
      d.to = exit;
      d.kind = po_kind(g.events[entry].dir, g.events[exit].dir);
      if (is_delay(d.kind, a)) {
        d.covered = delay_covered(g, d, a);
        c.delays.push_back(d);
      }
    }
    const int next = nodes[(j + 1) % n];
    if (rfe && g.events[exit].dir == Dir::W && g.events[next].dir == Dir::R) {
      Delay r;
      r.from = exit;
      r.to = next;
      r.kind = DelayKind::rfe;
      r.covered = delay_covered(g, r, a);
      c.delays.push_back(r);
    }
    k += j - i + 1;
  }
  return c;
}

std::vector<int> strongly_connected(const Aeg& g) {
  const int n = static_cast<int>(g.events.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0, comps = 0;
  auto succ = [&](int u) {
    std::vector<int> out;
    for (int ei : g.out_edges(u)) out.push_back(g.pos[ei].to);
    for (int v : g.cmp_neighbours(u)) out.push_back(v);
    return out;
  };
  struct Frame {
    int u;
    std::vector<int> next;
    std::size_t i;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> frames;
    auto open = [&](int u) {
      index[u] = low[u] = counter++;
      stack.push_back(u);
      on_stack[u] = 1;
      frames.push_back({u, succ(u), 0});
    };
    open(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.i < f.next.size()) {
        const int v = f.next[f.i++];
        if (index[v] < 0) open(v);
        else if (on_stack[v]) low[f.u] = std::min(low[f.u], index[v]);
        continue;
      }
      const int u = f.u;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().u] = std::min(low[frames.back().u], low[u]);
      if (low[u] == index[u]) {
        int v;
        do {
          v = stack.back();
          stack.pop_back();
          on_stack[v] = 0;
          comp[v] = comps;
        } while (v != u);
        ++comps;
      }
    }
  }
  return comp;
}

namespace {

using Clock = std::chrono::steady_clock;

class Search {
 public:
  Search(const Aeg& g, Architecture a, const CycleCaps& caps, CycleResult& out)
      : g_(g), a_(a), caps_(caps), out_(out), comp_(strongly_connected(g)),
        on_path_(g.events.size(), 0), used_(g.thread_count(), 0) {
    std::map<AbsLoc, int> ids;
    for (const auto& e : g.events) loc_.push_back(ids.emplace(e.loc, static_cast<int>(ids.size())).first->second);
    loc_count_.assign(ids.size(), 0);
    build_runs();
  }

  void run() {
    std::map<int, std::vector<int>> members;
    for (int v = 0; v < static_cast<int>(g_.events.size()); ++v) members[comp_[v]].push_back(v);
    for (const auto& [c, nodes] : members) {
      if (nodes.size() < 3) continue;
      deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(caps_.scc_timeout_s));
      for (int s : nodes) {
        if (stop_) return;
        s_ = s;
        enter(s);
        extend(s, s);
        leave(s);
      }
    }
  }

 private:
  const Aeg& g_;
  Architecture a_;
  const CycleCaps& caps_;
  CycleResult& out_;
  std::vector<int> comp_;
  std::vector<int> loc_;
  std::vector<int> loc_count_;
  std::vector<char> on_path_;
  std::vector<char> used_;
  std::vector<int> path_;
  int s_ = 0;
  int pos_arcs_ = 0;
  bool stop_ = false;
  std::size_t steps_ = 0;
  Clock::time_point deadline_;
  // Per pos edge: the forced nodes it leads through and the first node
  // where the search has a choice.
  std::vector<std::vector<int>> run_;
  std::vector<int> run_end_;

  bool has_cmp_in_component(int v) const {
    for (int w : g_.cmp_neighbours(v))
      if (comp_[w] == comp_[v]) return true;
    return false;
  }

  // A node with a single pos predecessor, a single pos successor and no
  // competing partner in its component can only be passed through.
  void build_runs() {
    const int n = static_cast<int>(g_.events.size());
    std::vector<char> forced(n, 0);
    for (int v = 0; v < n; ++v)
      forced[v] = g_.in_edges(v).size() == 1 && g_.out_edges(v).size() == 1 && !has_cmp_in_component(v);
    run_.assign(g_.pos.size(), {});
    run_end_.assign(g_.pos.size(), -1);
    for (int ei = 0; ei < static_cast<int>(g_.pos.size()); ++ei) {
      const int u = g_.pos[ei].from;
      int v = g_.pos[ei].to;
      while (forced[v] && v != u) {
        run_[ei].push_back(v);
        v = g_.pos[g_.out_edges(v)[0]].to;
        if (static_cast<int>(run_[ei].size()) > n) break;
      }
      run_end_[ei] = v;
    }
  }

  void enter(int v) {
    path_.push_back(v);
    on_path_[v] = 1;
    used_[g_.events[v].thread] = 1;
  }
  void leave(int v) {
    path_.pop_back();
    on_path_[v] = 0;
    used_[g_.events[v].thread] = 0;
  }

  bool out_of_time() {
    if (++steps_ % 1024 == 0 && Clock::now() > deadline_) {
      stop_ = true;
      out_.cap_exceeded = true;
      out_.cap_reason = "scc timeout";
    }
    return stop_;
  }

  // u ends the current path; entry is the first node of u's segment.
  void extend(int u, int entry) {
    if (out_of_time()) return;
    const int t = g_.events[u].thread;
    for (int ei : g_.out_edges(u)) {
      const int v = run_end_[ei];
      if (on_path_[v] || comp_[v] != comp_[s_]) continue;
      const auto& run = run_[ei];
      path_.insert(path_.end(), run.begin(), run.end());
      path_.push_back(v);
      on_path_[v] = 1;
      const int arcs = static_cast<int>(run.size()) + 1;
      pos_arcs_ += arcs;
      extend(v, entry);
      pos_arcs_ -= arcs;
      on_path_[v] = 0;
      path_.resize(path_.size() - run.size() - 1);
      if (stop_) return;
    }
    // Leave the segment at u.
    if (entry != u && loc_[entry] == loc_[u]) return;
    bool ok = ++loc_count_[loc_[entry]] <= 3;
    if (entry != u) ok = ++loc_count_[loc_[u]] <= 3 && ok;
    if (ok) {
      for (int v : g_.cmp_neighbours(u)) {
        if (v == s_) {
          if (t != g_.events[s_].thread && pos_arcs_ > 0) record();
        } else if (v > s_ && comp_[v] == comp_[s_] && !used_[g_.events[v].thread] && loc_count_[loc_[v]] < 3) {
          enter(v);
          extend(v, v);
          leave(v);
        }
        if (stop_) break;
      }
    }
    --loc_count_[loc_[entry]];
    if (entry != u) --loc_count_[loc_[u]];
  }

  void record() {
    CriticalCycle c = classify_delays(g_, path_, a_);
    if (c.delays.empty()) return;
    if (std::all_of(c.delays.begin(), c.delays.end(), [](const Delay& d) { return d.covered; })) return;
    out_.cycles.push_back(std::move(c));
    if (out_.cycles.size() >= caps_.max_cycles) {
      stop_ = true;
      out_.cap_exceeded = true;
      out_.cap_reason = "max cycles";
    }
  }
};

}  // namespace

CycleResult enumerate_critical_cycles(const Aeg& g, Architecture a, const CycleCaps& caps) {
  CycleResult r;
  if (a == Architecture::SC) return r;
  Search(g, a, caps, r).run();
  std::sort(r.cycles.begin(), r.cycles.end());
  return r;
}

}  // namespace fencer
