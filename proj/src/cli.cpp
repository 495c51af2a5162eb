// SPDX-License-Identifier: Apache-2.0
#include "fencer/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fencer/oracle.hpp"
#include "fencer/placement.hpp"

namespace fencer {

namespace {

std::optional<Program> load(const std::string& path, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_program(ss.str());
  } catch (const IrError& e) {
    err << path << ": " << format(e.diagnostic()) << '\n';
    return std::nullopt;
  }
}

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream f(path);
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  return true;
}

}  // namespace

std::string format_cycles(const CycleResult& r, const Aeg& g) {
  std::ostringstream os;
  for (const auto& c : r.cycles) {
    os << c.id << " |";
    for (int n : c.nodes) os << ' ' << g.event_label(n);
    os << " |";
    for (const auto& d : c.delays)
      os << ' ' << delay_name(d.kind) << '(' << g.events[d.from].name << ',' << g.events[d.to].name << ')'
         << (d.covered ? "*" : "");
    os << '\n';
  }
  if (r.cap_exceeded) os << "# cap exceeded: " << r.cap_reason << '\n';
  return os.str();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto prog = load(cfg.input, err);
  if (!prog) return kExitDiagnostics;
  try {
    StrategyRun sr;
    if (cfg.export_only) {
      sr.analysis = analyze(*prog, cfg.arch, cfg.options);
      SlotKeying slots(sr.analysis.aeg, cfg.options.position);
      sr.ilp = build_ilp(sr.analysis.aeg, sr.analysis.cycles.cycles, cfg.arch, cfg.options.cost, slots.keying());
    } else {
      sr = run_strategy(*prog, cfg.arch, cfg.strategy, cfg.options);
      if (cfg.strategy != Strategy::Musketeer && !cfg.dump_ilp.empty()) {
        SlotKeying slots(sr.analysis.aeg, cfg.options.position);
        sr.ilp = build_ilp(sr.analysis.aeg, sr.analysis.cycles.cycles, cfg.arch, cfg.options.cost, slots.keying());
      }
    }
    const Analysis& an = sr.analysis;
    if (!cfg.dump_aeg.empty() && !write_file(cfg.dump_aeg, export_dot(an.aeg), err)) return kExitDiagnostics;
    if (!cfg.dump_cycles.empty() && !write_file(cfg.dump_cycles, format_cycles(an.cycles, an.aeg), err))
      return kExitDiagnostics;
    if (!cfg.dump_ilp.empty() && !write_file(cfg.dump_ilp, export_lp(sr.ilp), err)) return kExitDiagnostics;
    if (cfg.export_only) {
      if (cfg.dump_ilp.empty()) out << export_lp(sr.ilp) << '\n';
      return an.cycles.cap_exceeded ? kExitCap : kExitOk;
    }
    for (const auto& w : sr.plan.warnings) err << "warning: " << w << '\n';
    out << report(sr.plan, an.aeg) << '\n';
    if (!cfg.out.empty() && !write_file(cfg.out, print_program(insert_fences(an.program, sr.plan)), err))
      return kExitDiagnostics;
    if (sr.plan.cap_exceeded) {
      err << "cap exceeded: " << sr.plan.cap_reason << '\n';
      return kExitCap;
    }
    if (cfg.verify) {
      const CoverageVerdict v = verify_coverage(an.cycles.cycles, sr.plan, an.aeg, cfg.arch);
      if (!v.covered) {
        err << "verify: uncovered " << v.witness << '\n';
        return kExitUncovered;
      }
      out << "verify: covered\n";
    }
    return kExitOk;
  } catch (const IrError& e) {
    err << cfg.input << ": " << format(e.diagnostic()) << '\n';
    return kExitDiagnostics;
  }
}

int compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto prog = load(cfg.input, err);
  if (!prog) return kExitDiagnostics;
  out << "strategy,arch,f,lwf,cf,dp,cost,ms\n";
  bool capped = false;
  for (Strategy s : kAllStrategies) {
    const auto t0 = std::chrono::steady_clock::now();
    FencePlan plan;
    try {
      plan = apply_strategy(*prog, cfg.arch, s, cfg.options);
    } catch (const IrError& e) {
      err << cfg.input << ": " << format(e.diagnostic()) << '\n';
      return kExitDiagnostics;
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    capped = capped || plan.cap_exceeded;
    char msbuf[32];
    std::snprintf(msbuf, sizeof msbuf, "%.1f", ms);
    out << strategy_name(s) << (plan.cap_exceeded ? "(cap)" : "") << ',' << arch_name(cfg.arch) << ','
        << plan.count(FenceType::Full) << ',' << plan.count(FenceType::Lightweight) << ','
        << plan.count(FenceType::Control) << ',' << plan.count(FenceType::Dependency) << ','
        << format_number(plan.cost) << ',' << msbuf << '\n';
  }
  return capped ? kExitCap : kExitOk;
}

int dump(const RunConfig& cfg, const std::string& what, std::ostream& out, std::ostream& err) {
  auto prog = load(cfg.input, err);
  if (!prog) return kExitDiagnostics;
  if (what == "program") {
    out << print_program(normalize_guards(*prog));
    return kExitOk;
  }
  const Analysis an = analyze(*prog, cfg.arch, cfg.options);
  if (what == "aeg") {
    out << export_dot(an.aeg);
  } else if (what == "cycles") {
    out << format_cycles(an.cycles, an.aeg);
  } else if (what == "ilp") {
    SlotKeying slots(an.aeg, cfg.options.position);
    out << export_lp(build_ilp(an.aeg, an.cycles.cycles, cfg.arch, cfg.options.cost, slots.keying())) << '\n';
  } else {
    err << "error: unknown dump kind '" << what << "'\n";
    return kExitDiagnostics;
  }
  return an.cycles.cap_exceeded ? kExitCap : kExitOk;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fence inference for weak memory models"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string arch = "tso", strategy = "m", cost, precision = "precise", position = "after-first",
              solver = "builtin", what = "aeg";
  std::size_t max_cycles = cfg.options.caps.max_cycles;
  double scc_timeout = cfg.options.caps.scc_timeout_s;
  std::uint64_t node_cap = cfg.options.solver.node_cap;
  double solver_timeout = cfg.options.solver.time_limit_s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "IR program")->required();
    sub->add_option("--arch", arch, "sc, tso, pso, rmo, power (arm is an alias of power)")
        ->capture_default_str();
    sub->add_option("--cost", cost, "per-type costs, e.g. f=3,lwf=2,dp=1,cf=1");
    sub->add_option("--points-to", precision, "precise, index-insensitive or imprecise")->capture_default_str();
    sub->add_option("--position", position, "after-first or before-last")->capture_default_str();
    sub->add_option("--max-cycles", max_cycles, "cycle enumeration cap")->capture_default_str();
    sub->add_option("--scc-timeout", scc_timeout, "seconds per strongly connected component")
        ->capture_default_str();
    sub->add_option("--node-cap", node_cap, "branch-and-bound node cap")->capture_default_str();
    sub->add_option("--solver-timeout", solver_timeout, "seconds of branch and bound")->capture_default_str();
  };
  CLI::App* an = app.add_subcommand("analyze", "infer fences for one strategy");
  common(an);
  an->add_option("--strategy", strategy, "m, p, v, e or h")->capture_default_str();
  an->add_option("--solver", solver, "builtin or export-only")->capture_default_str();
  an->add_option("--out", cfg.out, "write the fenced program here");
  an->add_option("--dump-aeg", cfg.dump_aeg, "write the event graph as DOT");
  an->add_option("--dump-cycles", cfg.dump_cycles, "write one critical cycle per line");
  an->add_option("--dump-ilp", cfg.dump_ilp, "write the ILP in CPLEX LP format");
  an->add_flag("--verify", cfg.verify, "check every constraint against the plan");
  CLI::App* cmp = app.add_subcommand("compare", "run all strategies and print CSV");
  common(cmp);
  CLI::App* dm = app.add_subcommand("dump", "print an intermediate artifact");
  common(dm);
  dm->add_option("--what", what, "program, aeg, cycles or ilp")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitDiagnostics;
  }

  auto a = parse_arch(arch);
  auto s = parse_strategy(strategy);
  auto pr = parse_precision(precision);
  auto pos = parse_position(position);
  if (!a) { err << "error: unknown architecture '" << arch << "'\n"; return kExitDiagnostics; }
  if (!s) { err << "error: unknown strategy '" << strategy << "'\n"; return kExitDiagnostics; }
  if (!pr) { err << "error: unknown points-to precision '" << precision << "'\n"; return kExitDiagnostics; }
  if (!pos) { err << "error: unknown position policy '" << position << "'\n"; return kExitDiagnostics; }
  if (solver != "builtin" && solver != "export-only") {
    err << "error: unknown solver '" << solver << "'\n";
    return kExitDiagnostics;
  }
  if (!cost.empty()) {
    auto cm = CostModel::parse(cost);
    if (!cm) { err << "error: bad cost model '" << cost << "'\n"; return kExitDiagnostics; }
    cfg.options.cost = *cm;
  }
  if (!(scc_timeout > 0)) { err << "error: --scc-timeout must be positive\n"; return kExitDiagnostics; }
  if (!(solver_timeout > 0)) { err << "error: --solver-timeout must be positive\n"; return kExitDiagnostics; }
  cfg.arch = *a;
  cfg.strategy = *s;
  cfg.options.precision = *pr;
  cfg.options.position = *pos;
  cfg.options.caps.max_cycles = max_cycles;
  cfg.options.caps.scc_timeout_s = scc_timeout;
  cfg.options.solver.node_cap = node_cap;
  cfg.options.solver.time_limit_s = solver_timeout;
  cfg.export_only = solver == "export-only";

  if (an->parsed()) return run(cfg, out, err);
  if (cmp->parsed()) return compare(cfg, out, err);
  return dump(cfg, what, out, err);
}

}  // namespace fencer
