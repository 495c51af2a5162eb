// SPDX-License-Identifier: Apache-2.0
#include "fencer/shared_analysis.hpp"

#include <functional>

namespace fencer {

const VarInfo* LocationTable::find(const std::string& n) const {
  for (const auto& v : vars)
    if (v.name == n) return &v;
  return nullptr;
}
bool LocationTable::is_shared(const std::string& n) const {
  const VarInfo* v = find(n);
  return v && v->shared;
}
bool LocationTable::is_local(const std::string& n) const {
  const VarInfo* v = find(n);
  return v && !v->shared;
}
std::vector<std::string> LocationTable::shared_names() const {
  std::vector<std::string> out;
  for (const auto& v : vars)
    if (v.shared) out.push_back(v.name);
  return out;
}
std::size_t LocationTable::shared_count() const { return shared_names().size(); }

namespace {

void visit(const Expr& e, const std::function<void(const Expr&)>& f) {
  f(e);
  for (const auto& k : e.kids) visit(*k, f);
}

void for_each_instruction(const Program& p, const std::function<void(const Instruction&)>& f) {
  for (int b = 0; b < p.body_count(); ++b)
    for (const auto& ins : p.body(b).code) {
      f(ins);
      if (ins.body) f(*ins.body);
    }
}

void for_each_expr(const Program& p, const std::function<void(const Expr&, const Instruction&)>& f) {
  for_each_instruction(p, [&](const Instruction& ins) {
    if (ins.lhs) visit(*ins.lhs, [&](const Expr& e) { f(e, ins); });
    if (ins.expr) visit(*ins.expr, [&](const Expr& e) { f(e, ins); });
  });
}

}  // namespace

LocationTable classify_locations(const Program& p) {
  LocationTable t;
  for (const auto& d : p.vars) t.vars.push_back({d.name, d.shared, d.is_array, d.is_volatile});
  for_each_expr(p, [&](const Expr& e, const Instruction& ins) {
    if ((e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Index || e.kind == Expr::Kind::AddrOf) &&
        !t.find(e.name))
      throw IrError({Diagnostic::Kind::UndeclaredVariable, "undeclared variable '" + e.name + "'", ins.pos});
  });
  return t;
}

std::string AbsLoc::str() const {
  switch (kind) {
    case Kind::Named: return object;
    case Kind::ArrayAny: return object + "[*]";
    case Kind::Any: return "*";
  }
  return "?";
}

bool may_alias(const AbsLoc& a, const AbsLoc& b) {
  if (a.kind == AbsLoc::Kind::Any || b.kind == AbsLoc::Kind::Any) return true;
  return a.object == b.object;
}

std::optional<Precision> parse_precision(std::string_view s) {
  if (s == "precise") return Precision::Precise;
  if (s == "index-insensitive") return Precision::IndexInsensitive;
  if (s == "imprecise") return Precision::Imprecise;
  return std::nullopt;
}

bool TargetSet::index_insensitive() const {
  for (const auto& l : locs)
    if (l.kind == AbsLoc::Kind::ArrayAny) return true;
  return false;
}

std::set<std::string> TargetSet::objects(const LocationTable& t) const {
  if (unknown) {
    auto names = t.shared_names();
    return {names.begin(), names.end()};
  }
  std::set<std::string> out;
  for (const auto& l : locs) out.insert(l.object);
  return out;
}

const TargetSet& PointsToMap::at(int site) const {
  static const TargetSet kUnknown{true, {}};
  auto it = sites.find(site);
  return it == sites.end() ? kUnknown : it->second;
}

namespace {

// Flow-insensitive inclusion-based propagation over locals. Base objects of
// an expression come from &x and from locals holding addresses; integer
// offsets do not change the base.
class Andersen {
 public:
  Andersen(const Program& p, const LocationTable& t) : p_(p), t_(t) {
    bool changed = true;
    while (changed) {
      changed = false;
      for_each_instruction(p_, [&](const Instruction& ins) {
        if (ins.op != Op::Assign || ins.lhs->kind != Expr::Kind::Var || !t_.is_local(ins.lhs->name)) return;
        auto& dst = pts_[ins.lhs->name];
        for (const auto& o : bases(*ins.expr))
          changed = dst.insert(o).second || changed;
      });
    }
  }

  std::set<std::string> bases(const Expr& e) const {
    std::set<std::string> out;
    switch (e.kind) {
      case Expr::Kind::AddrOf: out.insert(e.name); break;
      case Expr::Kind::Var:
        if (t_.is_local(e.name)) {
          auto it = pts_.find(e.name);
          if (it != pts_.end()) out = it->second;
        }
        break;
      case Expr::Kind::Unary:
      case Expr::Kind::Binary:
        for (const auto& k : e.kids) {
          auto s = bases(*k);
          out.insert(s.begin(), s.end());
        }
        break;
      default: break;
    }
    return out;
  }

 private:
  const Program& p_;
  const LocationTable& t_;
  std::map<std::string, std::set<std::string>> pts_;
};

}  // namespace

PointsToMap points_to(const Program& p, const LocationTable& t, Precision precision) {
  PointsToMap m;
  m.precision = precision;
  Andersen a(p, t);
  auto array_loc = [&](const std::string& o) {
    return precision == Precision::Precise ? AbsLoc::named(o) : AbsLoc::array_any(o);
  };
  for_each_expr(p, [&](const Expr& e, const Instruction&) {
    if (e.kind == Expr::Kind::Index) {
      TargetSet ts;
      const VarInfo* v = t.find(e.name);
      if (v && v->shared) ts.locs.push_back(v->is_array ? array_loc(e.name) : AbsLoc::named(e.name));
      m.sites[e.site] = ts;
    } else if (e.kind == Expr::Kind::Deref) {
      TargetSet ts;
      auto bases = a.bases(*e.kids[0]);
      if (bases.empty() || precision == Precision::Imprecise) {
        ts.unknown = true;
      } else {
        for (const auto& o : bases) {
          const VarInfo* v = t.find(o);
          if (!v || !v->shared) continue;
          ts.locs.push_back(v->is_array ? array_loc(o) : AbsLoc::named(o));
        }
      }
      m.sites[e.site] = ts;
    }
  });
  return m;
}

PointsToMap points_to(const Program& p, Precision precision) {
  return points_to(p, classify_locations(p), precision);
}

}  // namespace fencer
