#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dscopf/case_model.hpp"

namespace dscopf {

/// One bus's share of the ADMM state. Flows are oriented out of the bus
/// (positive = power leaving through the branch) and stored
/// neighbor-major: flows[j * scenarios + k].
struct BusAgentState {
  std::size_t bus = 0;  // index into Case::buses
  std::vector<Topology::Incidence> neighbors;
  std::size_t scenarios = 1;

  std::vector<double> flows;
  std::vector<double> duals;       // scaled duals u = lambda / rho
  std::vector<double> generation;  // one entry per local generator, shared by all scenarios
  double total_generation = 0.0;
  double local_cost = 0.0;

  BusAgentState() = default;
  BusAgentState(std::size_t bus_index, std::vector<Topology::Incidence> incident,
                std::size_t scenario_count, std::size_t generator_count);

  std::size_t slot(std::size_t neighbor, std::size_t scenario) const {
    return neighbor * scenarios + scenario;
  }
  std::size_t entries() const { return neighbors.size() * scenarios; }
};

/// Data a bus needs for its local subproblem.
struct LocalProblem {
  std::span<const Generator> generators;
  double load = 0.0;
  /// When set, total generation is pinned (frozen-dispatch screening) and the
  /// cost term drops out; the solve reduces to a projection.
  std::optional<double> fixed_generation;
};

struct NeighborMessage {
  std::size_t branch = 0;
  std::size_t scenario = 0;
  std::size_t sender = 0;  // bus index
  double value = 0.0;      // p + u
};

/// Economic split of a fixed total among generators at one bus. The split
/// equalizes marginal cost with bound clamping; `marginal_cost` is the common
/// lambda (or the clamped end's marginal when the total sits at a bound).
struct DispatchSplit {
  std::vector<double> output;
  double marginal_cost = 0.0;
};

DispatchSplit economic_dispatch(std::span<const Generator> generators, double total);

/// Exact minimizer of
///   cost(G) + rho/2 * sum_{j,k} (p_jk - z_jk + u_jk)^2
/// subject to sum_j p_jk = G - load for every scenario k, with one G shared
/// by all scenarios. `z_local` uses the same layout as state.flows, with
/// values oriented out of this bus.
void local_solve(BusAgentState& state, std::span<const double> z_local, double rho,
                 const LocalProblem& problem);

/// Value of the local subproblem objective at the state's current flows and
/// generation split.
double local_objective(const BusAgentState& state, std::span<const double> z_local, double rho,
                       const LocalProblem& problem);

/// u <- u + p - z, elementwise.
void dual_update(BusAgentState& state, std::span<const double> z_local);

/// One message per (incident branch, scenario) carrying p + u.
std::vector<NeighborMessage> emit_messages(const BusAgentState& state);

}  // namespace dscopf
