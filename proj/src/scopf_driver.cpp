#include "dscopf/scopf_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "dscopf/oracle.hpp"

namespace dscopf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Non-convergence alone is not enough to call a frozen run violated; the
// primal residual must also stay above this.
constexpr double kAdmmScreenResidualSq = 1e-6;

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Secure: return "secure";
    case Verdict::Violated: return "violated";
    case Verdict::Islanding: return "islanding";
  }
  return "unknown";
}

std::string_view to_string(ScreeningMode m) { return m == ScreeningMode::Exact ? "exact" : "admm"; }

AdmmSolution solve_base(const Case& c, const SolverConfig& config) {
  return run_admm(c, {base_scenario(c)}, config);
}

double screening_tolerance(const AdmmSolution& solution) {
  return std::max(1e-9, solution.final_thresholds.primal);
}

ScreeningResult screen_contingency(const Case& c, std::string_view contingency_id,
                                   const AdmmSolution& base, ScreeningMode mode,
                                   const SolverConfig& config) {
  ScreeningResult result;
  result.contingency = std::string(contingency_id);

  Scenario scenario;
  try {
    scenario = apply_contingency(c, contingency_id);
  } catch (const IslandingError&) {
    result.verdict = Verdict::Islanding;
    return result;
  }

  const std::size_t k0 = base.scenario_index(kBaseScenario);
  std::vector<double> injections = injections_from_flows(c, base.flows[k0]);

  if (mode == ScreeningMode::Exact) {
    const FlowCertificate cert = flow_feasible(c, scenario.capacity, injections, screening_tolerance(base));
    if (!cert.feasible) {
      result.verdict = Verdict::Violated;
      result.binding_cut = cert.cut;
    }
    return result;
  }

  RunOptions run;
  run.warm = &base;
  std::vector<double> fixed(c.buses.size());
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = injections[i] + c.buses[i].load;
  run.fixed_bus_generation = std::move(fixed);
  const AdmmSolution frozen = run_admm(c, {scenario}, config, run);
  const double final_primal = frozen.trace.empty() ? 0.0 : frozen.trace.back().primal_sq;
  if (!frozen.converged && final_primal > kAdmmScreenResidualSq) {
    result.verdict = Verdict::Violated;
    for (std::size_t b = 0; b < c.branches.size(); ++b) {
      const double cap = scenario.capacity[b];
      if (cap > 0.0 && std::abs(frozen.flows[0][b]) >= cap - 1e-6) result.binding_cut.push_back(c.branches[b].id);
    }
  }
  return result;
}

std::vector<ScreeningResult> screen_contingencies(const Case& c, const std::vector<std::string>& ids,
                                                  const AdmmSolution& base, ScreeningMode mode,
                                                  const SolverConfig& config, bool parallel) {
  std::vector<ScreeningResult> results(ids.size());
  const std::size_t threads = parallel ? std::min(config.workers, ids.size()) : 1;
  if (threads <= 1) {
    for (std::size_t i = 0; i < ids.size(); ++i) results[i] = screen_contingency(c, ids[i], base, mode, config);
    return results;
  }

  // Each screening owns its solver; nested runs stay single-threaded.
  SolverConfig inner = config;
  inner.workers = 1;
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < ids.size(); i += threads)
            results[i] = screen_contingency(c, ids[i], base, mode, inner);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

ScopfReport solve_scopf(const Case& c, const SolverConfig& config, const ScopfOptions& options) {
  std::vector<std::string> ids;
  if (options.contingencies) {
    for (const auto& id : *options.contingencies) {
      if (!c.find_contingency(id)) throw ContractViolation("unknown contingency '" + id + "'");
      ids.push_back(id);
    }
  } else {
    for (const auto& k : c.contingencies) ids.push_back(k.id);
  }

  ScopfReport report;
  auto t0 = Clock::now();
  report.base = solve_base(c, config);
  report.timing.base_ms = elapsed_ms(t0);

  AdmmSolution current = report.base;
  t0 = Clock::now();
  report.screening = screen_contingencies(c, ids, current, options.mode, config, options.parallel_screening);
  report.timing.screening_ms += elapsed_ms(t0);

  for (;;) {
    std::vector<std::string> fresh;
    for (const auto& r : report.screening)
      if (r.verdict == Verdict::Violated &&
          std::find(report.active.begin(), report.active.end(), r.contingency) == report.active.end())
        fresh.push_back(r.contingency);
    if (fresh.empty() || report.rounds == options.max_rounds) break;

    report.active.insert(report.active.end(), fresh.begin(), fresh.end());
    CapacityMap scenarios{base_scenario(c)};
    for (const auto& id : ids)
      if (std::find(report.active.begin(), report.active.end(), id) != report.active.end())
        scenarios.push_back(apply_contingency(c, id));
    // Keep the active list in the same order as the scenarios.
    report.active.clear();
    for (std::size_t k = 1; k < scenarios.size(); ++k) report.active.push_back(scenarios[k].id);

    t0 = Clock::now();
    RunOptions run;
    run.warm = &current;
    AdmmSolution next = run_admm(c, scenarios, config, run);
    report.timing.redispatch_ms += elapsed_ms(t0);
    current = std::move(next);
    ++report.rounds;

    t0 = Clock::now();
    report.screening = screen_contingencies(c, ids, current, options.mode, config, options.parallel_screening);
    report.timing.screening_ms += elapsed_ms(t0);
  }

  for (const auto& r : report.screening)
    if (r.verdict == Verdict::Violated) report.remaining_violations.push_back(r.contingency);
  report.final_solution = std::move(current);
  report.total_cost = report.final_solution.objective;
  report.secure = report.final_solution.converged && report.remaining_violations.empty();
  return report;
}

}  // namespace dscopf
