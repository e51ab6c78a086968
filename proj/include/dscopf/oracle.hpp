#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dscopf/case_model.hpp"

namespace dscopf {

/// Result of a transport feasibility check.
struct FlowCertificate {
  bool feasible = false;
  double max_flow = 0.0;
  double required = 0.0;            // total surplus that must be moved
  std::vector<std::string> cut;     // saturated branches of the min cut (infeasible only)
  std::vector<double> witness;      // per branch, from -> to (feasible only)
};

/// Decides whether fixed bus injections (g - d, summing to zero) can be routed
/// within `capacities` (one per branch). The min cut is the source side of the
/// final residual graph, so the reported branch set is deterministic.
FlowCertificate flow_feasible(const Case& c, std::span<const double> capacities,
                              std::span<const double> injections, double tolerance = 1e-9);

/// True when some dispatch within generator bounds meets every load inside the
/// given limits (lower-bounded circulation). Used to tell "infeasible" apart
/// from "did not converge".
bool supply_feasible(const Case& c, std::span<const double> capacities);

class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleSolution {
  bool feasible = false;
  std::vector<double> dispatch;  // per generator, pu
  double cost = 0.0;             // $/h
  double grid_step = 0.0;        // finest step used, pu
  double cost_resolution = 0.0;  // first-order cost change of one fine grid step, $/h
};

inline constexpr std::size_t kOracleMaxGenerators = 4;

/// Enumerates dispatches on a uniform grid (last generator takes the balance),
/// keeps those routable in every scenario, then refines once with a 10x finer
/// grid around the best point.
OracleSolution brute_force_opf(const Case& c, const CapacityMap& scenarios, std::size_t grid_steps);

struct KvlReport {
  BusId reference_bus = 0;
  std::vector<double> angles;  // per bus, radians
  struct Mismatch {
    std::string branch;
    double value = 0.0;  // |theta_from - theta_to - x * p|
  };
  std::vector<Mismatch> cycle_mismatches;  // non-tree branches, ascending branch index
  double max_mismatch = 0.0;
};

/// Angles reconstructed along a breadth-first spanning tree from the lowest-id
/// bus, and how far each remaining branch is from satisfying x * p = dtheta.
KvlReport kvl_audit(const Case& c, std::span<const double> flows);

}  // namespace dscopf
