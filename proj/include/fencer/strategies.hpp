// SPDX-License-Identifier: Apache-2.0
//
// Analysis pipeline and the five fencing strategies.
#pragma once

#include <string>

#include "fencer/aeg.hpp"
#include "fencer/cycles.hpp"
#include "fencer/ilp.hpp"
#include "fencer/ir.hpp"
#include "fencer/plan.hpp"
#include "fencer/shared_analysis.hpp"
#include "fencer/solver.hpp"

namespace fencer {

struct StrategyOptions {
  CostModel cost;
  Precision precision = Precision::Precise;
  PositionPolicy position = PositionPolicy::AfterFirst;
  CycleCaps caps;
  SolverOptions solver;
};

struct Analysis {
  Program program;   // guard-normalized input; plan slots refer to it
  Program expanded;  // after loop duplication
  PointsToMap points_to;
  Aeg aeg;
  CycleResult cycles;
};

// normalize -> points-to -> loop duplication -> Aeg -> cycles.
Analysis analyze(const Program& p, Architecture a, const StrategyOptions& o = {});

// Variable keying by insertion slot, so that two pos edges fenced by the same
// instruction share one variable.
class SlotKeying {
 public:
  SlotKeying(const Aeg& g, PositionPolicy pol);
  Keying keying();
  const Slot& slot(int key) const { return slots_.at(key).first; }
  const std::string& local(int key) const { return slots_.at(key).second; }

 private:
  const Aeg& g_;
  PositionPolicy pol_;
  std::vector<std::pair<Slot, std::string>> slots_;
  std::map<std::pair<Slot, std::string>, int> index_;
  int intern(const Slot& s, const std::string& local);
};

struct StrategyRun {
  Analysis analysis;
  FencePlan plan;
  IlpProblem ilp;     // m only
  Solution solution;  // m only
};

StrategyRun run_strategy(const Program& p, Architecture a, Strategy s, const StrategyOptions& o = {});
FencePlan apply_strategy(const Program& p, Architecture a, Strategy s, const StrategyOptions& o = {});

// Optimal plan for a bare Aeg (no source program): placements carry edges
// and pairs instead of slots.
FencePlan plan_from_solution(const IlpProblem& ilp, const Solution& sol, const Aeg& g, Architecture a,
                             const SlotKeying* slots = nullptr);

}  // namespace fencer
