#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dscopf {

/// Consensus flow of one branch in one scenario, as seen from each end.
/// `ij` is oriented from -> to, `ji` to -> from.
struct ZPair {
  double ij = 0.0;
  double ji = 0.0;

  bool operator==(const ZPair&) const = default;
};

/// Global variables of one branch across every scenario.
struct BranchConsensusState {
  std::size_t branch = 0;
  std::vector<double> z;         // per scenario, from -> to; the to-side value is -z
  std::vector<double> previous;  // z at the previous iteration
  std::vector<double> capacity;  // per scenario

  BranchConsensusState() = default;
  BranchConsensusState(std::size_t branch_index, std::vector<double> capacities);
};

/// Minimizer of (z_ij - msg_i)^2 + (z_ji - msg_j)^2 subject to z_ij + z_ji = 0.
ZPair z_update(double msg_i, double msg_j);

/// Euclidean projection onto {|z| <= cap}; anti-symmetry is preserved exactly.
ZPair project_branch(ZPair z0, double cap);

/// Applies z_update + project_branch to every scenario of one branch.
/// `msg_from` / `msg_to` hold p + u per scenario from each end.
void consensus_step(BranchConsensusState& state, std::span<const double> msg_from,
                    std::span<const double> msg_to);

struct ResidualSample {
  std::size_t iteration = 0;
  double primal_sq = 0.0;  // sum (p - z)^2 over every (bus side, branch, scenario)
  double dual_sq = 0.0;    // rho^2 * sum (z - z_prev)^2 over both directions
  double objective = 0.0;  // $/h
};

/// Squared residual norms. Layouts:
///   p      [(2*b + side) * scenarios + k], side 0 = from end, 1 = to end
///   z, z_prev [b * scenarios + k], from -> to orientation
/// Sums run in ascending (branch, scenario, direction) order.
ResidualSample residuals(std::span<const double> p, std::span<const double> z,
                         std::span<const double> z_prev, std::size_t scenarios, double rho);

}  // namespace dscopf
