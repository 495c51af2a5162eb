// SPDX-License-Identifier: Apache-2.0
#include "fencer/aeg.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace fencer {

// ---------------------------------------------------------------- Aeg

int Aeg::add_event(Dir d, AbsLoc loc, int thread, std::string name) {
  Event e;
  e.id = static_cast<int>(events.size());
  e.dir = d;
  e.loc = std::move(loc);
  e.thread = thread;
  e.name = name.empty() ? "e" + std::to_string(e.id) : std::move(name);
  events.push_back(std::move(e));
  out_.emplace_back();
  in_.emplace_back();
  cmp_adj_.emplace_back();
  while (static_cast<int>(thread_names.size()) <= thread) thread_names.push_back("t" + std::to_string(thread_names.size()));
  return events.back().id;
}

int Aeg::add_pos(int from, int to, FenceMask fences, bool poc, bool intra) {
  if (events.at(from).thread != events.at(to).thread)
    throw std::invalid_argument("pos edge across threads");
  auto it = pos_index_.find({from, to});
  if (it != pos_index_.end()) {
    PosEdge& e = pos[it->second];
    e.fences &= fences;
    e.poc = e.poc || poc;
    e.intra = e.intra && intra;
    return it->second;
  }
  const int id = static_cast<int>(pos.size());
  pos.push_back({from, to, fences, poc, intra});
  pos_index_[{from, to}] = id;
  out_[from].push_back(id);
  in_[to].push_back(id);
  return id;
}

void Aeg::add_cmp(int a, int b) {
  if (events.at(a).thread == events.at(b).thread) throw std::invalid_argument("cmp edge inside a thread");
  if (a > b) std::swap(a, b);
  if (!cmp_set_.insert({a, b}).second) return;
  cmp.emplace_back(a, b);
  cmp_adj_[a].push_back(b);
  cmp_adj_[b].push_back(a);
}

void Aeg::compute_cmp() {
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      const Event& a = events[i];
      const Event& b = events[j];
      if (a.thread != b.thread && may_alias(a.loc, b.loc) && (a.dir == Dir::W || b.dir == Dir::W))
        add_cmp(a.id, b.id);
    }
}

int Aeg::find_pos(int from, int to) const {
  auto it = pos_index_.find({from, to});
  return it == pos_index_.end() ? -1 : it->second;
}

bool Aeg::has_cmp(int a, int b) const {
  if (a > b) std::swap(a, b);
  return cmp_set_.count({a, b}) != 0;
}

int Aeg::thread_count() const {
  int n = static_cast<int>(thread_names.size());
  for (const auto& e : events) n = std::max(n, e.thread + 1);
  return n;
}

std::string Aeg::event_label(int e) const {
  const Event& ev = events.at(e);
  return ev.name + ":" + dir_char(ev.dir) + ev.loc.str();
}

std::vector<char> Aeg::reach_forward(int from) const {
  std::vector<char> seen(events.size(), 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int ei : out_[u])
      if (!seen[pos[ei].to]) {
        seen[pos[ei].to] = 1;
        stack.push_back(pos[ei].to);
      }
  }
  return seen;
}

std::vector<char> Aeg::reach_backward(int to) const {
  std::vector<char> seen(events.size(), 0);
  std::vector<int> stack{to};
  seen[to] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int ei : in_[u])
      if (!seen[pos[ei].from]) {
        seen[pos[ei].from] = 1;
        stack.push_back(pos[ei].from);
      }
  }
  return seen;
}

// ---------------------------------------------------------------- helpers

namespace {

const Instruction& core(const Instruction& ins) { return ins.body ? *ins.body : ins; }

std::map<std::string, int> label_indices(const Body& b) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < b.code.size(); ++i)
    if (b.code[i].op == Op::Label && !m.count(b.code[i].name)) m[b.code[i].name] = static_cast<int>(i);
  return m;
}

void visit(const Expr& e, const std::function<void(const Expr&)>& f) {
  f(e);
  for (const auto& k : e.kids) visit(*k, f);
}

bool triggers_duplication(const Instruction& ins, const PointsToMap& pt) {
  bool hit = false;
  auto check = [&](const Expr& root) {
    visit(root, [&](const Expr& e) {
      if (e.kind == Expr::Kind::Index) hit = true;
      if (e.kind == Expr::Kind::Deref) {
        const TargetSet& ts = pt.at(e.site);
        if (ts.unknown || ts.index_insensitive() || ts.locs.size() > 1) hit = true;
      }
    });
  };
  const Instruction* cur = &ins;
  while (cur) {
    if (cur->lhs) check(*cur->lhs);
    if (cur->expr) check(*cur->expr);
    cur = cur->body.get();
  }
  return hit;
}

Instruction make_label(const std::string& n, const Instruction& like) {
  Instruction l;
  l.op = Op::Label;
  l.name = n;
  l.pos = like.pos;
  l.origin = like.origin;
  return l;
}

Instruction retarget(const Instruction& ins, const std::string& target) {
  Instruction out = ins;
  if (out.op == Op::Goto) {
    out.name = target;
  } else if (out.body && out.body->op == Op::Goto) {
    auto g = std::make_shared<Instruction>(*out.body);
    g->name = target;
    out.body = g;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- duplication

Program duplicate_loop_bodies(const Program& p, const PointsToMap& pt) {
  Program q = p;
  for (int b = 0; b < q.body_count(); ++b) {
    Body& body = q.body(b);
    auto loops = find_loops(body);
    std::sort(loops.begin(), loops.end(), [](const LoopSpan& x, const LoopSpan& y) {
      return x.head != y.head ? x.head < y.head : x.tail > y.tail;
    });
    std::vector<LoopSpan> chosen;
    int covered_to = -1;
    for (const auto& l : loops) {
      if (l.head <= covered_to) continue;
      bool trig = false;
      for (int i = l.head; i <= l.tail && !trig; ++i) trig = triggers_duplication(body.code[i], pt);
      if (!trig) continue;
      chosen.push_back(l);
      covered_to = l.tail;
    }
    if (chosen.empty()) continue;

    std::set<std::string> used;
    for (const auto& ins : body.code)
      if (ins.op == Op::Label) used.insert(ins.name);
    int counter = 0;
    auto fresh = [&](const std::string& base) {
      std::string n;
      do n = base + "__d" + std::to_string(counter++);
      while (used.count(n));
      used.insert(n);
      return n;
    };
    std::string end_label;  // lazily created label just before the body end

    std::vector<Instruction> code;
    int next = 0;
    for (const auto& l : chosen) {
      for (; next < l.head; ++next) code.push_back(body.code[next]);
      const Instruction& head = body.code[l.head];
      const Instruction& back = body.code[l.tail];
      const std::string& head_name = head.name;
      std::map<std::string, std::string> renamed;
      for (int i = l.head + 1; i < l.tail; ++i)
        if (body.code[i].op == Op::Label) renamed[body.code[i].name] = fresh(body.code[i].name);
      const std::string second = fresh(head_name);
      const std::string after = fresh(head_name + "_exit");

      code.push_back(head);
      // First copy: internal labels renamed, jumps to the head go to the second copy.
      for (int i = l.head + 1; i < l.tail; ++i) {
        Instruction ins = body.code[i];
        if (ins.op == Op::Label) {
          ins.name = renamed[ins.name];
        } else {
          const Instruction& c = core(ins);
          if (c.op == Op::Goto) {
            if (c.name == head_name) ins = retarget(ins, second);
            else if (renamed.count(c.name)) ins = retarget(ins, renamed[c.name]);
          }
        }
        code.push_back(ins);
      }
      code.push_back(retarget(back, second));
      code.push_back(make_label(second, head));
      // Second copy: jumps to the head leave the loop.
      auto exit_target = [&](const Instruction& ins) -> std::string {
        if (ins.op == Op::Goto) {
          if (end_label.empty()) end_label = fresh("end");
          return end_label;
        }
        return after;
      };
      for (int i = l.head + 1; i < l.tail; ++i) {
        Instruction ins = body.code[i];
        if (ins.op != Op::Label && core(ins).op == Op::Goto && core(ins).name == head_name)
          ins = retarget(ins, exit_target(ins));
        code.push_back(ins);
      }
      code.push_back(retarget(back, exit_target(back)));
      code.push_back(make_label(after, back));
      next = l.tail + 1;
    }
    for (; next < static_cast<int>(body.code.size()); ++next) {
      if (next == static_cast<int>(body.code.size()) - 1 && !end_label.empty())
        code.push_back(make_label(end_label, body.code[next]));
      code.push_back(body.code[next]);
    }
    body.code = std::move(code);
  }
  return q;
}

// ---------------------------------------------------------------- builder

namespace {

struct Entry {
  int ev;  // >= 0: event; < 0: loop head marker -(vid + 1)
  FenceMask fences;
  bool branch;
};

using Frontier = std::vector<Entry>;

void merge(Frontier& f, const Entry& e) {
  for (auto& x : f)
    if (x.ev == e.ev) {
      x.fences &= e.fences;
      x.branch = x.branch || e.branch;
      return;
    }
  f.push_back(e);
}

void merge(Frontier& f, const Frontier& g) {
  for (const auto& e : g) merge(f, e);
}

struct EventInfo {
  std::set<std::string> dep_locals;  // locals the access depends on
  std::string read_into;              // lhs local when the read feeds an assignment to a local
  int assign = -1;                    // index into Builder::assigns_
};

struct AssignRec {
  int thread;
  std::string local;  // lhs local, if any
  bool in_loop;
  std::vector<int> reads, writes;
  std::set<std::string> rhs_locals;
};

class Builder {
 public:
  Builder(const Program& p, const PointsToMap& pt) : p_(p), pt_(pt), table_(classify_locations(p)) {}

  Aeg run() {
    std::deque<int> queue;
    if (p_.uses_start_thread()) {
      queue.push_back(0);
    } else {
      for (int i = 0; i < static_cast<int>(p_.threads.size()); ++i) queue.push_back(i);
    }
    std::map<int, int> instances;
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      const int tid = static_cast<int>(g_.thread_names.size());
      const int k = instances[t]++;
      g_.thread_names.push_back(k == 0 ? p_.threads[t].name : p_.threads[t].name + "#" + std::to_string(k));
      thread_ = tid;
      run_body(p_.threads[t], {}, false);
      for (int s : started_) queue.push_back(s);
      started_.clear();
    }
    g_.compute_cmp();
    finish_dependencies();
    return std::move(g_);
  }

 private:
  const Program& p_;
  const PointsToMap& pt_;
  LocationTable table_;
  Aeg g_;
  int thread_ = 0;
  std::vector<int> started_;
  std::vector<Frontier> first_after_;  // per loop-head marker
  std::set<std::string> pending_dp_;
  std::vector<EventInfo> info_;
  std::vector<AssignRec> assigns_;

  struct Instance {
    const Body* body;
    std::map<std::string, int> labels;
    std::map<std::string, int> head_vid;
    std::map<std::string, Frontier> pending;
    std::vector<LoopSpan> loops;
    bool in_loop;  // the whole instance runs inside a loop of a caller
  };

  bool inside_loop(const Instance& in, int i) const {
    if (in.in_loop) return true;
    for (const auto& l : in.loops)
      if (l.head <= i && i <= l.tail) return true;
    return false;
  }

  Frontier run_body(const Body& body, Frontier f, bool in_loop) {
    Instance in{&body, label_indices(body), {}, {}, find_loops(body), in_loop};
    std::set<std::string> heads;
    for (const auto& l : in.loops) heads.insert(body.code[l.head].name);
    for (const auto& h : heads) {
      in.head_vid[h] = static_cast<int>(first_after_.size());
      first_after_.emplace_back();
    }
    for (int i = 0; i < static_cast<int>(body.code.size()); ++i) {
      const Instruction& ins = body.code[i];
      if (ins.op == Op::EndThread || ins.op == Op::EndFunction) break;
      if (ins.op == Op::Label) {
        auto it = in.pending.find(ins.name);
        if (it != in.pending.end()) merge(f, it->second);
        auto hv = in.head_vid.find(ins.name);
        if (hv != in.head_vid.end()) merge(f, Entry{-(hv->second + 1), 0, false});
        continue;
      }
      f = step(in, i, ins, std::move(f));
    }
    // Loop-head markers never leave their body instance.
    f.erase(std::remove_if(f.begin(), f.end(), [](const Entry& e) { return e.ev < 0; }), f.end());
    return f;
  }

  Frontier step(Instance& in, int i, const Instruction& ins, Frontier f) {
    switch (ins.op) {
      case Op::Assign: return assign(in, i, ins, std::move(f));
      case Op::Guard: return guard(in, i, ins, std::move(f));
      case Op::Goto: jump(in, i, ins.name, f); return {};
      case Op::Fence:
        if (ins.fence == FenceType::Dependency) {
          if (!ins.name.empty()) pending_dp_.insert(ins.name);
          return f;
        }
        for (auto& e : f) e.fences |= bit(ins.fence);
        return f;
      case Op::AtomicBegin:
      case Op::AtomicEnd:
        for (auto& e : f) e.fences |= bit(FenceType::Full);
        return f;
      case Op::Call: {
        const Body* fn = p_.find_function(ins.name);
        if (!fn) throw std::invalid_argument("call to undefined function " + ins.name);
        return run_body(*fn, std::move(f), inside_loop(in, i));
      }
      case Op::StartThread: started_.push_back(p_.thread_index(ins.name)); return f;
      default: return f;
    }
  }

  void jump(Instance& in, int i, const std::string& label, const Frontier& f) {
    auto it = in.labels.find(label);
    if (it == in.labels.end()) throw std::invalid_argument("undefined label " + label);
    if (it->second > i) {
      merge(in.pending[label], f);
      return;
    }
    const int vid = in.head_vid.at(label);
    const Frontier targets = first_after_[vid];
    for (const auto& e : f) {
      if (e.ev >= 0) {
        for (const auto& t : targets) link(e.ev, t.ev, e.fences | t.fences, e.branch || t.branch);
      } else if (-(e.ev + 1) != vid) {
        for (const auto& t : targets)
          merge(first_after_[-(e.ev + 1)], Entry{t.ev, static_cast<FenceMask>(e.fences | t.fences), e.branch || t.branch});
      }
    }
  }

  void link(int from, int to, FenceMask fences, bool branch, bool intra = false) {
    g_.add_pos(from, to, fences, branch, intra);
    if (branch) g_.events[from].branch_boundary = true;
  }

  void connect(const Frontier& f, int v) {
    for (const auto& e : f) {
      if (e.ev >= 0) link(e.ev, v, e.fences, e.branch);
      else merge(first_after_[-(e.ev + 1)], Entry{v, e.fences, e.branch});
    }
  }

  int new_event(const Instruction& ins, Dir d, const AbsLoc& loc, std::set<std::string> deps) {
    const int id = g_.add_event(d, loc, thread_);
    Event& ev = g_.events[id];
    ev.line = ins.pos.line;
    ev.origin = ins.origin;
    if (ins.origin.valid()) {
      ev.after.push_back(ins.origin.index + 1);
      if (ins.is_branch() && ins.origin_target >= 0 && ins.origin_target + 1 != ins.origin.index + 1)
        ev.after.push_back(ins.origin_target + 1);
      std::sort(ev.after.begin(), ev.after.end());
    }
    if (loc.kind != AbsLoc::Kind::Any) {
      const VarInfo* v = table_.find(loc.object);
      ev.is_volatile = v && v->is_volatile;
    }
    deps.insert(pending_dp_.begin(), pending_dp_.end());
    info_.push_back({std::move(deps), {}, -1});
    return id;
  }

  std::set<std::string> locals_in(const Expr& e) const {
    std::set<std::string> out;
    visit(e, [&](const Expr& x) {
      if (x.kind == Expr::Kind::Var && table_.is_local(x.name)) out.insert(x.name);
    });
    return out;
  }

  std::vector<AbsLoc> targets(const Expr& e) const {
    if (e.kind == Expr::Kind::Var) {
      if (table_.is_shared(e.name)) return {AbsLoc::named(e.name)};
      return {};
    }
    const TargetSet& ts = pt_.at(e.site);
    if (ts.unknown) return {AbsLoc::any()};
    return ts.locs;
  }

  // Read events for every shared access in e (value reads).
  void collect_reads(const Instruction& ins, const Expr& e, std::vector<int>& reads) {
    switch (e.kind) {
      case Expr::Kind::Var:
        if (table_.is_shared(e.name)) reads.push_back(new_event(ins, Dir::R, AbsLoc::named(e.name), {}));
        break;
      case Expr::Kind::Index:
      case Expr::Kind::Deref: {
        collect_reads(ins, *e.kids[0], reads);
        for (const auto& loc : targets(e)) reads.push_back(new_event(ins, Dir::R, loc, locals_in(*e.kids[0])));
        break;
      }
      case Expr::Kind::Unary:
      case Expr::Kind::Binary:
        for (const auto& k : e.kids) collect_reads(ins, *k, reads);
        break;
      default: break;
    }
  }

  Frontier assign(Instance& in, int i, const Instruction& ins, Frontier f) {
    const Expr& lhs = *ins.lhs;
    std::vector<int> reads;
    collect_reads(ins, *ins.expr, reads);
    if (lhs.kind != Expr::Kind::Var) collect_reads(ins, *lhs.kids[0], reads);
    std::set<std::string> wdeps = locals_in(*ins.expr);
    if (lhs.kind != Expr::Kind::Var) {
      auto more = locals_in(*lhs.kids[0]);
      wdeps.insert(more.begin(), more.end());
    }
    std::vector<int> writes;
    for (const auto& loc : targets(lhs)) writes.push_back(new_event(ins, Dir::W, loc, wdeps));
    pending_dp_.clear();

    AssignRec rec{thread_, {}, inside_loop(in, i), reads, writes, locals_in(*ins.expr)};
    if (lhs.kind == Expr::Kind::Var && table_.is_local(lhs.name)) rec.local = lhs.name;
    const int ai = static_cast<int>(assigns_.size());
    for (int r : reads) info_[r].assign = ai;
    for (int w : writes) info_[w].assign = ai;
    assigns_.push_back(std::move(rec));

    for (int r : reads) connect(f, r);
    if (writes.empty()) {
      if (reads.empty()) return f;
      Frontier out;
      for (int r : reads) out.push_back({r, 0, false});
      return out;
    }
    for (int w : writes) {
      if (reads.empty()) connect(f, w);
      for (int r : reads) link(r, w, 0, false, true);
    }
    Frontier out;
    for (int w : writes) out.push_back({w, 0, false});
    return out;
  }

  Frontier guard(Instance& in, int i, const Instruction& ins, Frontier f) {
    std::vector<int> reads;
    collect_reads(ins, *ins.expr, reads);
    if (!reads.empty()) pending_dp_.clear();
    for (int r : reads) connect(f, r);
    Frontier cond;
    if (reads.empty()) {
      cond = std::move(f);
      for (auto& e : cond) e.branch = true;
    } else {
      for (int r : reads) cond.push_back({r, 0, true});
    }
    const Instruction& body = *ins.body;
    if (body.op == Op::Goto) {
      jump(in, i, body.name, cond);
      return cond;
    }
    Frontier through = step(in, i, body, cond);
    merge(through, cond);
    return through;
  }

  void finish_dependencies() {
    // Locals assigned exactly once per thread and outside loops carry a
    // well-defined value; only those are used for dependencies.
    std::map<std::pair<int, std::string>, int> count;
    std::map<std::pair<int, std::string>, int> def;
    for (int a = 0; a < static_cast<int>(assigns_.size()); ++a) {
      const auto& r = assigns_[a];
      if (r.local.empty()) continue;
      auto key = std::make_pair(r.thread, r.local);
      count[key] += r.in_loop ? 2 : 1;
      def[key] = a;
    }
    auto single = [&](int thread, const std::string& l) {
      auto it = count.find({thread, l});
      return it != count.end() && it->second == 1;
    };
    std::map<std::pair<int, std::string>, std::set<int>> sources;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [key, a] : def) {
        if (!single(key.first, key.second)) continue;
        auto& dst = sources[key];
        const auto& r = assigns_[a];
        for (int x : r.reads)
          if (g_.events[x].dir == Dir::R) changed = dst.insert(x).second || changed;
        for (const auto& m : r.rhs_locals) {
          if (!single(key.first, m)) continue;
          auto it = sources.find({key.first, m});
          if (it == sources.end()) continue;
          for (int x : std::set<int>(it->second)) changed = dst.insert(x).second || changed;
        }
      }
    }
    for (const auto& r : assigns_)
      for (int x : r.reads)
        for (int w : r.writes) g_.deps.insert({x, w});
    for (int e = 0; e < static_cast<int>(info_.size()); ++e) {
      const int t = g_.events[e].thread;
      for (const auto& l : info_[e].dep_locals) {
        if (!single(t, l)) continue;
        auto it = sources.find({t, l});
        if (it == sources.end()) continue;
        for (int s : it->second)
          if (s != e) g_.deps.insert({s, e});
      }
      const int a = info_[e].assign;
      if (a >= 0 && g_.events[e].dir == Dir::R && !assigns_[a].local.empty() &&
          single(t, assigns_[a].local))
        g_.events[e].dp_local = assigns_[a].local;
    }
  }
};

}  // namespace

Aeg build_aeg(const Program& p, const PointsToMap& pt) { return Builder(p, pt).run(); }

// ---------------------------------------------------------------- dot

std::string export_dot(const Aeg& g) {
  std::ostringstream os;
  os << "digraph aeg {\n";
  for (int t = 0; t < g.thread_count(); ++t) {
    bool any = false;
    for (const auto& e : g.events) any = any || e.thread == t;
    if (!any) continue;
    os << "  subgraph cluster_" << t << " {\n    label=\"" << g.thread_names[t] << "\";\n";
    for (const auto& e : g.events)
      if (e.thread == t)
        os << "    n" << e.id << " [label=\"" << e.name << ": " << dir_char(e.dir) << e.loc.str() << "\"];\n";
    os << "  }\n";
  }
  for (const auto& e : g.pos) {
    os << "  n" << e.from << " -> n" << e.to << " [style=dashed";
    std::string label;
    if (e.poc) label = "poC";
    if (e.fences) label += (label.empty() ? "" : " ") + mask_names(e.fences);
    if (!label.empty()) os << ", label=\"" << label << "\"";
    os << "];\n";
  }
  for (const auto& [a, b] : g.cmp) os << "  n" << a << " -> n" << b << " [dir=none, color=red];\n";
  os << "}\n";
  return os.str();
}

}  // namespace fencer
