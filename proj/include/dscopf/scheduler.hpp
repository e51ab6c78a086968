#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dscopf/case_model.hpp"
#include "dscopf/consensus.hpp"
#include "dscopf/worker_pool.hpp"

namespace dscopf {

struct SolverConfig {
  double rho = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  std::size_t max_iter = 20000;
  std::size_t workers = default_worker_count();
  std::size_t trace_every = 1;

  /// Throws ContractViolation when a field is out of range.
  void validate() const;
};

/// Norms entering the stopping thresholds. `entries` is m, the number of
/// (bus side, branch, scenario) flow entries.
struct ResidualNorms {
  double p = 0.0;
  double z = 0.0;
  double u = 0.0;
  std::size_t entries = 0;
};

struct StopThresholds {
  double primal = 0.0;
  double dual = 0.0;
};

enum class StopDecision { Continue, Converged };

StopThresholds stopping_thresholds(const ResidualNorms& norms, const SolverConfig& config);

/// Converged iff ||r|| <= eps_pri and ||s|| <= eps_dual.
StopDecision stopping_check(const ResidualSample& sample, const ResidualNorms& norms,
                            const SolverConfig& config);

/// Raw iterate, kept so a later run can warm-start from it.
struct AdmmState {
  std::vector<std::string> scenario_ids;
  std::vector<double> z;  // [b * K + k], from -> to
  std::vector<double> p;  // [(2b + side) * K + k]
  std::vector<double> u;  // same layout as p
};

struct AdmmSolution {
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::string> scenario_ids;
  std::vector<double> generation;      // per generator, pu
  std::vector<double> bus_generation;  // per bus, pu
  std::vector<std::vector<double>> flows;  // [scenario][branch], pu, from -> to
  double objective = 0.0;                  // $/h
  std::vector<ResidualSample> trace;
  StopThresholds final_thresholds;
  AdmmState state;

  std::size_t scenario_index(std::string_view id) const;
};

struct RunOptions {
  const AdmmSolution* warm = nullptr;
  /// Per-bus total generation held fixed; the cost term drops out of every
  /// local solve.
  std::optional<std::vector<double>> fixed_bus_generation;
};

/// Synchronous ADMM over every bus and scenario in `scenarios`.
/// Non-convergence is reported through AdmmSolution::converged, not thrown.
AdmmSolution run_admm(const Case& c, const CapacityMap& scenarios, const SolverConfig& config,
                      const RunOptions& options = {});

/// Largest |marginal cost| at any generator bound ($/h per pu); 1 when all
/// costs are flat. run_admm divides local costs by this value.
double cost_scale(const Case& c);

/// Sum of a*g^2 + b*g + c over generators in case order.
double dispatch_cost(const Case& c, std::span<const double> generation);

/// Net injection of every bus implied by one scenario's consensus flows.
std::vector<double> injections_from_flows(const Case& c, std::span<const double> branch_flows);

}  // namespace dscopf
