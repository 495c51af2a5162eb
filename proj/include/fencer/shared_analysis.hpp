// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fencer/ir.hpp"

namespace fencer {

struct VarInfo {
  std::string name;
  bool shared = false;
  bool is_array = false;
  bool is_volatile = false;
};

class LocationTable {
 public:
  std::vector<VarInfo> vars;

  const VarInfo* find(const std::string& n) const;
  bool is_shared(const std::string& n) const;
  bool is_local(const std::string& n) const;
  std::vector<std::string> shared_names() const;
  std::size_t shared_count() const;
};

// Throws IrError(UndeclaredVariable) on a reference to an undeclared name.
LocationTable classify_locations(const Program& p);

// Abstract memory location of an event.
struct AbsLoc {
  enum class Kind { Named, ArrayAny, Any };
  Kind kind = Kind::Named;
  std::string object;  // empty for Any

  static AbsLoc named(std::string o) { return {Kind::Named, std::move(o)}; }
  static AbsLoc array_any(std::string o) { return {Kind::ArrayAny, std::move(o)}; }
  static AbsLoc any() { return {Kind::Any, {}}; }

  std::string str() const;  // "x", "t[*]", "*"
  auto operator<=>(const AbsLoc&) const = default;
};

bool may_alias(const AbsLoc& a, const AbsLoc& b);

enum class Precision { Precise, IndexInsensitive, Imprecise };

std::optional<Precision> parse_precision(std::string_view s);

// Target set of one access site. `unknown` stands for every shared object.
struct TargetSet {
  bool unknown = false;
  std::vector<AbsLoc> locs;

  bool index_insensitive() const;
  // Shared objects possibly accessed; all of them when unknown.
  std::set<std::string> objects(const LocationTable& t) const;
};

struct PointsToMap {
  Precision precision = Precision::Precise;
  std::map<int, TargetSet> sites;  // keyed by Expr::site

  const TargetSet& at(int site) const;
};

PointsToMap points_to(const Program& p, const LocationTable& t, Precision precision);
PointsToMap points_to(const Program& p, Precision precision);

}  // namespace fencer
