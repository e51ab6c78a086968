#pragma once

#include <string>
#include <vector>

#include "dscopf/case_model.hpp"
#include "dscopf/consensus.hpp"
#include "dscopf/oracle.hpp"
#include "dscopf/scheduler.hpp"
#include "dscopf/scopf_driver.hpp"

namespace dscopf {

// Text outputs. Reports are JSON objects with a fixed key order; values are
// converted back to MW and $/h.

std::string solve_report_json(const Case& c, const AdmmSolution& solution, double solve_ms);
std::string scopf_report_json(const Case& c, const ScopfReport& report);
std::string oracle_report_json(const Case& c, const OracleSolution& solution);
std::string kvl_report_json(const Case& c, const KvlReport& report);

/// Header `iter,primal_sq,dual_sq,objective`, one row per trace sample.
std::string trace_csv(const std::vector<ResidualSample>& trace);

/// Pulls the base-scenario branch flows (pu) back out of a solution report.
std::vector<double> flows_from_report(const Case& c, const std::string& report_text);

}  // namespace dscopf
