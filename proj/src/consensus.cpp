#include "dscopf/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "dscopf/case_model.hpp"

namespace dscopf {

BranchConsensusState::BranchConsensusState(std::size_t branch_index, std::vector<double> capacities)
    : branch(branch_index),
      z(capacities.size(), 0.0),
      previous(capacities.size(), 0.0),
      capacity(std::move(capacities)) {}

ZPair z_update(double msg_i, double msg_j) {
  const double z = 0.5 * (msg_i - msg_j);
  return {z, -z};
}

ZPair project_branch(ZPair z0, double cap) {
  const double z = std::clamp(z0.ij, -cap, cap);
  return {z, -z};
}

void consensus_step(BranchConsensusState& state, std::span<const double> msg_from,
                    std::span<const double> msg_to) {
  const std::size_t scenarios = state.z.size();
  if (msg_from.size() != scenarios || msg_to.size() != scenarios)
    throw ContractViolation("consensus_step: missing direction message");
  for (std::size_t k = 0; k < scenarios; ++k) {
    state.previous[k] = state.z[k];
    state.z[k] = project_branch(z_update(msg_from[k], msg_to[k]), state.capacity[k]).ij;
  }
}

ResidualSample residuals(std::span<const double> p, std::span<const double> z,
                         std::span<const double> z_prev, std::size_t scenarios, double rho) {
  if (z.size() != z_prev.size() || p.size() != 2 * z.size() ||
      (scenarios == 0 ? !z.empty() : z.size() % scenarios != 0))
    throw ContractViolation("residuals: shape mismatch");

  ResidualSample out;
  const std::size_t branches = scenarios == 0 ? 0 : z.size() / scenarios;
  double primal = 0.0;
  double dual = 0.0;
  for (std::size_t b = 0; b < branches; ++b)
    for (std::size_t k = 0; k < scenarios; ++k) {
      const double zk = z[b * scenarios + k];
      const double dz = zk - z_prev[b * scenarios + k];
      const double r_from = p[(2 * b) * scenarios + k] - zk;
      const double r_to = p[(2 * b + 1) * scenarios + k] + zk;
      primal += r_from * r_from;
      primal += r_to * r_to;
      dual += dz * dz;
      dual += dz * dz;
    }
  out.primal_sq = primal;
  out.dual_sq = rho * rho * dual;
  return out;
}

}  // namespace dscopf
