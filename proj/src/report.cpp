#include "dscopf/report.hpp"

#include <cstdio>

#include "json.hpp"

namespace dscopf {

namespace {

using Json = nlohmann::ordered_json;

Json dispatch_json(const Case& c, const std::vector<double>& generation) {
  Json out = Json::object();
  for (std::size_t g = 0; g < c.generators.size(); ++g)
    out[c.generators[g].id] = generation.empty() ? 0.0 : generation[g] * c.base_mva;
  return out;
}

Json flows_json(const Case& c, const AdmmSolution& s) {
  Json out = Json::object();
  for (std::size_t k = 0; k < s.scenario_ids.size(); ++k) {
    Json row = Json::object();
    for (std::size_t b = 0; b < c.branches.size(); ++b) row[c.branches[b].id] = s.flows[k][b] * c.base_mva;
    out[s.scenario_ids[k]] = std::move(row);
  }
  return out;
}

Json screening_json(const std::vector<ScreeningResult>& results) {
  Json out = Json::array();
  for (const auto& r : results)
    out.push_back({{"contingency", r.contingency},
                   {"verdict", std::string(to_string(r.verdict))},
                   {"cut", r.binding_cut}});
  return out;
}

}  // namespace

std::string solve_report_json(const Case& c, const AdmmSolution& solution, double solve_ms) {
  Json root;
  root["converged"] = solution.converged;
  root["secure"] = nullptr;
  root["iterations"] = solution.iterations;
  root["cost_dollars_per_hour"] = solution.objective;
  root["dispatch_mw"] = dispatch_json(c, solution.generation);
  root["flows_mw"] = flows_json(c, solution);
  root["screening"] = Json::array();
  root["timing_ms"] = {{"base", solve_ms}};
  return root.dump(2) + "\n";
}

std::string scopf_report_json(const Case& c, const ScopfReport& report) {
  Json root;
  root["converged"] = report.base.converged && report.final_solution.converged;
  root["secure"] = report.secure;
  root["iterations"] = report.final_solution.iterations;
  root["base_iterations"] = report.base.iterations;
  root["cost_dollars_per_hour"] = report.total_cost;
  root["base_cost_dollars_per_hour"] = report.base.objective;
  root["dispatch_mw"] = dispatch_json(c, report.final_solution.generation);
  root["flows_mw"] = flows_json(c, report.final_solution);
  root["screening"] = screening_json(report.screening);
  root["active_contingencies"] = report.active;
  root["remaining_violations"] = report.remaining_violations;
  root["redispatch_rounds"] = report.rounds;
  root["timing_ms"] = {{"base", report.timing.base_ms},
                       {"screening", report.timing.screening_ms},
                       {"redispatch", report.timing.redispatch_ms}};
  return root.dump(2) + "\n";
}

std::string oracle_report_json(const Case& c, const OracleSolution& solution) {
  Json root;
  root["feasible"] = solution.feasible;
  root["cost_dollars_per_hour"] = solution.feasible ? Json(solution.cost) : Json(nullptr);
  root["dispatch_mw"] = dispatch_json(c, solution.dispatch);
  root["grid_step_mw"] = solution.grid_step * c.base_mva;
  root["cost_resolution_dollars_per_hour"] = solution.cost_resolution;
  return root.dump(2) + "\n";
}

std::string kvl_report_json(const Case& c, const KvlReport& report) {
  Json root;
  root["reference_bus"] = report.reference_bus;
  Json angles = Json::object();
  for (std::size_t i = 0; i < c.buses.size() && i < report.angles.size(); ++i)
    angles[std::to_string(c.buses[i].id)] = report.angles[i];
  root["angles_rad"] = std::move(angles);
  Json mismatches = Json::object();
  for (const auto& m : report.cycle_mismatches) mismatches[m.branch] = m.value;
  root["cycle_mismatches"] = std::move(mismatches);
  root["max_mismatch_rad"] = report.max_mismatch;
  return root.dump(2) + "\n";
}

std::string trace_csv(const std::vector<ResidualSample>& trace) {
  std::string out = "iter,primal_sq,dual_sq,objective\n";
  char line[160];
  for (const auto& s : trace) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", s.iteration, s.primal_sq, s.dual_sq,
                  s.objective);
    out += line;
  }
  return out;
}

std::vector<double> flows_from_report(const Case& c, const std::string& report_text) {
  Json root;
  try {
    root = Json::parse(report_text);
  } catch (const Json::parse_error& e) {
    throw CaseError(std::string("solution report: ") + e.what());
  }
  if (!root.contains("flows_mw") || !root["flows_mw"].contains(kBaseScenario))
    throw CaseError("solution report: missing flows_mw/base");
  const Json& base = root["flows_mw"][std::string(kBaseScenario)];
  std::vector<double> flows;
  flows.reserve(c.branches.size());
  for (const auto& br : c.branches) {
    if (!base.contains(br.id) || !base[br.id].is_number())
      throw CaseError("solution report: no base flow for branch " + br.id);
    flows.push_back(base[br.id].get<double>() / c.base_mva);
  }
  return flows;
}

}  // namespace dscopf
