// SPDX-License-Identifier: Apache-2.0
#include "fencer/arch.hpp"

#include <stdexcept>
#include <string>

namespace fencer {

std::string_view fence_name(FenceType t) {
  switch (t) {
    case FenceType::Full: return "f";
    case FenceType::Lightweight: return "lwf";
    case FenceType::Control: return "cf";
    case FenceType::Dependency: return "dp";
  }
  return "?";
}

std::optional<FenceType> parse_fence(std::string_view s) {
  for (FenceType t : kAllFenceTypes)
    if (fence_name(t) == s) return t;
  return std::nullopt;
}

std::string mask_names(FenceMask m) {
  std::string out = "{";
  for (FenceType t : kAllFenceTypes) {
    if (!has(m, t)) continue;
    if (out.size() > 1) out += ',';
    out += fence_name(t);
  }
  return out + "}";
}

std::string_view arch_name(Architecture a) {
  switch (a) {
    case Architecture::SC: return "sc";
    case Architecture::TSO: return "tso";
    case Architecture::PSO: return "pso";
    case Architecture::RMO: return "rmo";
    case Architecture::Power: return "power";
  }
  return "?";
}

std::optional<Architecture> parse_arch(std::string_view s) {
  if (s == "sc") return Architecture::SC;
  if (s == "tso") return Architecture::TSO;
  if (s == "pso") return Architecture::PSO;
  if (s == "rmo") return Architecture::RMO;
  if (s == "power" || s == "arm") return Architecture::Power;
  return std::nullopt;
}

std::string_view delay_name(DelayKind k) {
  switch (k) {
    case DelayKind::poWR: return "poWR";
    case DelayKind::poWW: return "poWW";
    case DelayKind::poRW: return "poRW";
    case DelayKind::poRR: return "poRR";
    case DelayKind::rfe: return "rfe";
  }
  return "?";
}

DelayKind po_kind(Dir first, Dir second) {
  if (first == Dir::W) return second == Dir::R ? DelayKind::poWR : DelayKind::poWW;
  return second == Dir::W ? DelayKind::poRW : DelayKind::poRR;
}

bool is_delay(DelayKind k, Architecture a) {
  switch (a) {
    case Architecture::SC: return false;
    case Architecture::TSO: return k == DelayKind::poWR;
    case Architecture::PSO: return k == DelayKind::poWR || k == DelayKind::poWW;
    case Architecture::RMO: return k != DelayKind::rfe;
    case Architecture::Power: return true;
  }
  return false;
}

FenceMask fence_options(DelayKind k, Architecture a) {
  if (!is_delay(k, a))
    throw std::invalid_argument(std::string(delay_name(k)) + " is not a delay on " +
                                std::string(arch_name(a)));
  const FenceMask f = bit(FenceType::Full), lwf = bit(FenceType::Lightweight);
  switch (k) {
    case DelayKind::poWR: return f;
    case DelayKind::poWW: return f | lwf;
    case DelayKind::poRW: return f | lwf | bit(FenceType::Dependency);
    case DelayKind::poRR: return f | lwf | bit(FenceType::Dependency) | bit(FenceType::Control);
    case DelayKind::rfe: return f | lwf;
  }
  return 0;
}

}  // namespace fencer
