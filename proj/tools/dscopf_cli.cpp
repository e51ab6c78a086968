// Command-line front end: validate | solve | scopf | oracle | audit-kvl.
//
// Exit codes: 0 success, 1 internal error, 2 infeasible or not securable,
// 3 input error, 4 iteration limit reached without convergence.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dscopf/case_model.hpp"
#include "dscopf/oracle.hpp"
#include "dscopf/report.hpp"
#include "dscopf/scheduler.hpp"
#include "dscopf/scopf_driver.hpp"

namespace {

using namespace dscopf;

enum Exit : int { kOk = 0, kInternal = 1, kInfeasible = 2, kInput = 3, kMaxIter = 4 };

struct Options {
  std::string case_path;
  SolverConfig config;
  std::string trace_path;
  std::string solution_path;
  std::string contingencies;
  std::string screen = "exact";
  std::size_t grid_steps = 200;
  std::string flows_path;
  std::string write_case_path;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Resolves a --contingencies list. Tokens name contingencies, or branches, in
// which case an outage of that branch is added to the case.
std::vector<std::string> select_contingencies(Case& c, const std::string& list, bool default_all) {
  std::vector<std::string> ids;
  if (list.empty()) {
    if (default_all)
      for (const auto& k : c.contingencies) ids.push_back(k.id);
    return ids;
  }
  if (list == "all") {
    for (const auto& k : c.contingencies) ids.push_back(k.id);
    return ids;
  }
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    if (c.find_contingency(token)) {
      ids.push_back(token);
      continue;
    }
    if (c.branch_index(token)) {
      std::string id = token;
      for (const auto& k : c.contingencies)
        if (k.outaged_branch == token) id = k.id;
      if (!c.find_contingency(id)) c.contingencies.push_back({id, token});
      ids.push_back(id);
      continue;
    }
    throw InputError("unknown contingency or branch '" + token + "'");
  }
  return ids;
}

void warn_islanding(const Case& c, const std::vector<std::string>& ids) {
  auto islanding = islanding_contingencies(c);
  for (const auto& id : ids)
    if (std::find(islanding.begin(), islanding.end(), id) != islanding.end())
      std::cerr << "warning: contingency " << id << " islands the network and is excluded\n";
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int not_converged_code(const Case& c) {
  return supply_feasible(c, base_scenario(c).capacity) ? kMaxIter : kInfeasible;
}

int run_validate(const Options& o) {
  Case c = load_case_file(o.case_path);
  for (const auto& id : islanding_contingencies(c))
    std::cerr << "warning: contingency " << id << " islands the network and is excluded\n";
  if (!o.write_case_path.empty()) write_file(o.write_case_path, serialize_case(c));
  std::cout << "valid: " << c.buses.size() << " buses, " << c.branches.size() << " branches, "
            << c.generators.size() << " generators, " << c.contingencies.size() << " contingencies\n";
  return kOk;
}

int run_solve(const Options& o) {
  const Case c = load_case_file(o.case_path);
  const auto t0 = std::chrono::steady_clock::now();
  const AdmmSolution sol = solve_base(c, o.config);
  const double wall = ms_since(t0);
  if (!o.trace_path.empty()) write_file(o.trace_path, trace_csv(sol.trace));
  if (!o.solution_path.empty()) write_file(o.solution_path, solve_report_json(c, sol, wall));
  std::printf("solve: %s cost=%.6f $/h iterations=%zu wall=%.3f ms (%.3f ms/bus)\n",
              sol.converged ? "converged" : "NOT converged", sol.objective, sol.iterations, wall,
              wall / static_cast<double>(c.buses.size()));
  return sol.converged ? kOk : not_converged_code(c);
}

int run_scopf(const Options& o) {
  Case c = load_case_file(o.case_path);
  ScopfOptions opts;
  opts.contingencies = select_contingencies(c, o.contingencies, true);
  warn_islanding(c, *opts.contingencies);
  if (o.screen == "admm") opts.mode = ScreeningMode::Admm;

  const ScopfReport report = solve_scopf(c, o.config, opts);
  if (!o.trace_path.empty()) write_file(o.trace_path, trace_csv(report.final_solution.trace));
  if (!o.solution_path.empty()) write_file(o.solution_path, scopf_report_json(c, report));

  std::size_t violated = 0;
  for (const auto& r : report.screening) violated += r.verdict == Verdict::Violated;
  std::printf(
      "scopf: %s cost=%.6f $/h base=%.6f $/h iterations=%zu active=%zu violated=%zu "
      "wall base=%.3f ms screening=%.3f ms redispatch=%.3f ms\n",
      report.secure ? "secure" : "NOT secure", report.total_cost, report.base.objective,
      report.final_solution.iterations, report.active.size(), violated, report.timing.base_ms,
      report.timing.screening_ms, report.timing.redispatch_ms);

  if (!report.base.converged) return not_converged_code(c);
  if (!report.final_solution.converged) {
    for (const auto& id : report.active)
      if (!supply_feasible(c, apply_contingency(c, id).capacity)) return kInfeasible;
    return kMaxIter;
  }
  return report.secure ? kOk : kInfeasible;
}

int run_oracle(const Options& o) {
  Case c = load_case_file(o.case_path);
  const auto ids = select_contingencies(c, o.contingencies, false);
  warn_islanding(c, ids);
  CapacityMap scenarios{base_scenario(c)};
  for (const auto& id : ids) {
    try {
      scenarios.push_back(apply_contingency(c, id));
    } catch (const IslandingError&) {
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const OracleSolution sol = brute_force_opf(c, scenarios, o.grid_steps);
  const double wall = ms_since(t0);
  if (!o.solution_path.empty()) write_file(o.solution_path, oracle_report_json(c, sol));
  if (sol.feasible)
    std::printf("oracle: feasible cost=%.6f $/h grid_step=%.6g MW wall=%.3f ms\n", sol.cost,
                sol.grid_step * c.base_mva, wall);
  else
    std::printf("oracle: infeasible wall=%.3f ms\n", wall);
  return sol.feasible ? kOk : kInfeasible;
}

int run_audit(const Options& o) {
  const Case c = load_case_file(o.case_path);
  std::vector<double> flows;
  if (!o.flows_path.empty()) {
    flows = flows_from_report(c, read_file(o.flows_path));
  } else {
    const AdmmSolution sol = solve_base(c, o.config);
    if (!sol.converged) std::cerr << "warning: base solve did not converge; auditing last iterate\n";
    flows = sol.flows[0];
  }
  const KvlReport report = kvl_audit(c, flows);
  const std::string text = kvl_report_json(c, report);
  if (!o.solution_path.empty())
    write_file(o.solution_path, text);
  else
    std::cout << text;
  std::printf("audit-kvl: reference_bus=%d cycles=%zu max_mismatch=%.6g rad\n", report.reference_bus,
              report.cycle_mismatches.size(), report.max_mismatch);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("OPF_WORKERS")) {
    try {
      o.config.workers = static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "error: OPF_WORKERS must be a positive integer\n";
      return kInput;
    }
  }

  CLI::App app{"Distributed DC security-constrained OPF solver"};
  app.require_subcommand(1);

  auto add_case = [&](CLI::App* sub) {
    sub->add_option("case", o.case_path, "Case file (.json native format, .m MATPOWER import)")->required();
  };
  auto add_solver = [&](CLI::App* sub) {
    std::vector<CLI::Option*> opts;
    opts.push_back(sub->add_option("--rho", o.config.rho, "ADMM penalty (per-unit)"));
    opts.push_back(sub->add_option("--eps-abs", o.config.eps_abs, "Absolute stopping tolerance"));
    opts.push_back(sub->add_option("--eps-rel", o.config.eps_rel, "Relative stopping tolerance"));
    opts.push_back(sub->add_option("--max-iter", o.config.max_iter, "Iteration limit"));
    opts.push_back(sub->add_option("--workers", o.config.workers, "Worker threads (default: OPF_WORKERS or cores)"));
    opts.push_back(sub->add_option("--trace-every", o.config.trace_every, "Iterations between trace rows"));
    return opts;
  };

  auto* validate = app.add_subcommand("validate", "Parse and validate a case");
  add_case(validate);
  validate->add_option("--write-case", o.write_case_path, "Write the case back in the native format");

  auto* solve = app.add_subcommand("solve", "Base-case OPF");
  add_case(solve);
  add_solver(solve);
  solve->add_option("--trace", o.trace_path, "Residual trace CSV");
  solve->add_option("--solution", o.solution_path, "Solution report");

  auto* scopf = app.add_subcommand("scopf", "Security-constrained OPF with N-1 screening");
  add_case(scopf);
  add_solver(scopf);
  scopf->add_option("--trace", o.trace_path, "Residual trace CSV of the final solve");
  scopf->add_option("--solution", o.solution_path, "Solution report");
  scopf->add_option("--contingencies", o.contingencies, "all | comma-separated contingency or branch ids");
  scopf->add_option("--screen", o.screen, "Screening mode")->check(CLI::IsMember({"exact", "admm"}));

  auto* oracle = app.add_subcommand("oracle", "Brute-force reference OPF (<= 4 generators)");
  add_case(oracle);
  oracle->add_option("--grid-steps", o.grid_steps, "Grid points per generator range");
  oracle->add_option("--contingencies", o.contingencies, "Scenarios to enforce (default: base only)");
  oracle->add_option("--solution", o.solution_path, "Oracle report");

  auto* audit = app.add_subcommand("audit-kvl", "Angle-consistency audit of base-case flows");
  add_case(audit);
  auto solver_opts = add_solver(audit);
  auto* flows = audit->add_option("--flows", o.flows_path, "Audit flows from an existing solution report");
  for (auto* opt : solver_opts) flows->excludes(opt);
  audit->add_option("--solution", o.solution_path, "Audit report (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    o.config.validate();
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }

  try {
    if (validate->parsed()) return run_validate(o);
    if (solve->parsed()) return run_solve(o);
    if (scopf->parsed()) return run_scopf(o);
    if (oracle->parsed()) return run_oracle(o);
    if (audit->parsed()) return run_audit(o);
  } catch (const CaseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const OracleTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
