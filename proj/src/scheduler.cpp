#include "dscopf/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "dscopf/bus_agent.hpp"

namespace dscopf {

void SolverConfig::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ContractViolation("solver config: rho must be > 0");
  if (!(eps_abs > 0.0)) throw ContractViolation("solver config: eps_abs must be > 0");
  if (!(eps_rel > 0.0)) throw ContractViolation("solver config: eps_rel must be > 0");
  if (max_iter < 1) throw ContractViolation("solver config: max_iter must be >= 1");
  if (workers < 1) throw ContractViolation("solver config: workers must be >= 1");
  if (trace_every < 1) throw ContractViolation("solver config: trace_every must be >= 1");
}

StopThresholds stopping_thresholds(const ResidualNorms& norms, const SolverConfig& config) {
  const double base = std::sqrt(static_cast<double>(norms.entries)) * config.eps_abs;
  return {base + config.eps_rel * std::max(norms.p, norms.z),
          base + config.eps_rel * config.rho * norms.u};
}

StopDecision stopping_check(const ResidualSample& sample, const ResidualNorms& norms,
                            const SolverConfig& config) {
  const StopThresholds eps = stopping_thresholds(norms, config);
  const bool primal_ok = std::sqrt(sample.primal_sq) <= eps.primal;
  const bool dual_ok = std::sqrt(sample.dual_sq) <= eps.dual;
  return primal_ok && dual_ok ? StopDecision::Converged : StopDecision::Continue;
}

std::size_t AdmmSolution::scenario_index(std::string_view id) const {
  for (std::size_t k = 0; k < scenario_ids.size(); ++k)
    if (scenario_ids[k] == id) return k;
  throw ContractViolation("solution has no scenario '" + std::string(id) + "'");
}

double dispatch_cost(const Case& c, std::span<const double> generation) {
  if (generation.size() != c.generators.size())
    throw ContractViolation("dispatch_cost: one value per generator expected");
  double sum = 0.0;
  for (std::size_t g = 0; g < c.generators.size(); ++g) sum += c.generators[g].cost(generation[g]);
  return sum;
}

std::vector<double> injections_from_flows(const Case& c, std::span<const double> branch_flows) {
  const Topology topo(c);
  if (branch_flows.size() != topo.branch_count())
    throw ContractViolation("injections_from_flows: one flow per branch expected");
  std::vector<double> inj(topo.bus_count(), 0.0);
  for (std::size_t b = 0; b < topo.branch_count(); ++b) {
    inj[topo.branch_from[b]] += branch_flows[b];
    inj[topo.branch_to[b]] -= branch_flows[b];
  }
  return inj;
}

double cost_scale(const Case& c) {
  double scale = 0.0;
  for (const auto& g : c.generators)
    scale = std::max({scale, std::abs(g.marginal_cost(g.p_max)), std::abs(g.marginal_cost(g.p_min))});
  return scale > 0.0 ? scale : 1.0;
}

namespace {

// Position of warm-start data for scenario `id`, falling back to the warm
// base scenario for scenarios the warm solution did not carry.
std::size_t warm_source(const AdmmState& warm, const std::string& id) {
  for (std::size_t k = 0; k < warm.scenario_ids.size(); ++k)
    if (warm.scenario_ids[k] == id) return k;
  return 0;
}

}  // namespace

AdmmSolution run_admm(const Case& c, const CapacityMap& scenarios, const SolverConfig& config,
                      const RunOptions& options) {
  config.validate();
  if (scenarios.empty()) throw ContractViolation("run_admm: no scenarios");
  if (!options.fixed_bus_generation && scenarios.front().outaged)
    throw ContractViolation("run_admm: scenario 0 must be the intact network");

  const Topology topo(c);
  const std::size_t N = topo.bus_count();
  const std::size_t B = topo.branch_count();
  const std::size_t K = scenarios.size();
  for (const auto& s : scenarios)
    if (s.capacity.size() != B) throw ContractViolation("run_admm: capacity map does not match case");
  if (options.fixed_bus_generation && options.fixed_bus_generation->size() != N)
    throw ContractViolation("run_admm: fixed generation needs one value per bus");

  // Local solves see costs divided by the case's largest marginal cost, so rho
  // is a dimensionless weight; reported objectives use the original costs.
  const double scale = cost_scale(c);
  std::vector<std::vector<Generator>> bus_gens(N);
  std::vector<std::pair<std::size_t, std::size_t>> gen_slot(c.generators.size());
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t g : topo.bus_generators[i]) {
      gen_slot[g] = {i, bus_gens[i].size()};
      Generator scaled = c.generators[g];
      scaled.a /= scale;
      scaled.b /= scale;
      scaled.c /= scale;
      bus_gens[i].push_back(std::move(scaled));
    }

  std::vector<BusAgentState> agents;
  agents.reserve(N);
  for (std::size_t i = 0; i < N; ++i) agents.emplace_back(i, topo.incident[i], K, bus_gens[i].size());

  std::vector<BranchConsensusState> branches;
  branches.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    std::vector<double> caps(K);
    for (std::size_t k = 0; k < K; ++k) caps[k] = scenarios[k].capacity[b];
    branches.emplace_back(b, std::move(caps));
  }

  const auto side = [K](std::size_t b, bool from, std::size_t k) {
    return (2 * b + (from ? 0 : 1)) * K + k;
  };

  std::vector<double> p_side(2 * B * K, 0.0), u_side(2 * B * K, 0.0), msg(2 * B * K, 0.0);
  std::vector<double> z_flat(B * K, 0.0), z_prev(B * K, 0.0);

  if (options.warm) {
    const AdmmState& w = options.warm->state;
    const std::size_t WK = w.scenario_ids.size();
    if (WK == 0 || w.z.size() != B * WK || w.p.size() != 2 * B * WK || w.u.size() != 2 * B * WK)
      throw ContractViolation("run_admm: warm start does not match case");
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t src = warm_source(w, scenarios[k].id);
      for (std::size_t b = 0; b < B; ++b) {
        branches[b].z[k] = project_branch({w.z[b * WK + src], -w.z[b * WK + src]},
                                          branches[b].capacity[k]).ij;
        for (bool from : {true, false}) {
          const std::size_t dst_slot = side(b, from, k);
          const std::size_t src_slot = (2 * b + (from ? 0 : 1)) * WK + src;
          p_side[dst_slot] = w.p[src_slot];
          u_side[dst_slot] = w.u[src_slot];
        }
      }
    }
    for (auto& agent : agents)
      for (std::size_t j = 0; j < agent.neighbors.size(); ++j)
        for (std::size_t k = 0; k < K; ++k) {
          const auto& nb = agent.neighbors[j];
          agent.flows[agent.slot(j, k)] = p_side[side(nb.branch, nb.from_side, k)];
          agent.duals[agent.slot(j, k)] = u_side[side(nb.branch, nb.from_side, k)];
        }
  }

  std::vector<std::vector<double>> z_local(N);
  for (std::size_t i = 0; i < N; ++i) z_local[i].assign(agents[i].entries(), 0.0);
  const auto gather = [&](std::size_t i) {
    const BusAgentState& a = agents[i];
    for (std::size_t j = 0; j < a.neighbors.size(); ++j) {
      const auto& nb = a.neighbors[j];
      for (std::size_t k = 0; k < K; ++k) {
        const double z = branches[nb.branch].z[k];
        z_local[i][a.slot(j, k)] = nb.from_side ? z : -z;
      }
    }
  };

  std::vector<LocalProblem> problems(N);
  for (std::size_t i = 0; i < N; ++i) {
    problems[i].generators = bus_gens[i];
    problems[i].load = c.buses[i].load;
    if (options.fixed_bus_generation) problems[i].fixed_generation = (*options.fixed_bus_generation)[i];
  }

  std::vector<double> generation(c.generators.size(), 0.0);
  const auto collect_generation = [&] {
    for (std::size_t g = 0; g < generation.size(); ++g)
      generation[g] = agents[gen_slot[g].first].generation[gen_slot[g].second];
  };

  WorkerPool pool(config.workers);
  const double rho = config.rho;
  const std::size_t entries = 2 * B * K;

  AdmmSolution sol;
  sol.scenario_ids.reserve(K);
  for (const auto& s : scenarios) sol.scenario_ids.push_back(s.id);

  for (std::size_t h = 1; h <= config.max_iter; ++h) {
    // Local solves; each agent reads only the consensus values of its own branches.
    pool.parallel_for(N, [&](std::size_t i) {
      gather(i);
      local_solve(agents[i], z_local[i], rho, problems[i]);
    });

    // Message exchange: p + u per (branch, scenario, direction).
    pool.parallel_for(N, [&](std::size_t i) {
      const BusAgentState& a = agents[i];
      for (std::size_t j = 0; j < a.neighbors.size(); ++j) {
        const auto& nb = a.neighbors[j];
        for (std::size_t k = 0; k < K; ++k) {
          const std::size_t s = side(nb.branch, nb.from_side, k);
          p_side[s] = a.flows[a.slot(j, k)];
          msg[s] = a.flows[a.slot(j, k)] + a.duals[a.slot(j, k)];
        }
      }
    });

    pool.parallel_for(B, [&](std::size_t b) {
      std::span<const double> all(msg);
      consensus_step(branches[b], all.subspan(side(b, true, 0), K), all.subspan(side(b, false, 0), K));
      for (std::size_t k = 0; k < K; ++k) {
        z_flat[b * K + k] = branches[b].z[k];
        z_prev[b * K + k] = branches[b].previous[k];
      }
    });

    pool.parallel_for(N, [&](std::size_t i) {
      gather(i);
      dual_update(agents[i], z_local[i]);
      const BusAgentState& a = agents[i];
      for (std::size_t j = 0; j < a.neighbors.size(); ++j) {
        const auto& nb = a.neighbors[j];
        for (std::size_t k = 0; k < K; ++k) u_side[side(nb.branch, nb.from_side, k)] = a.duals[a.slot(j, k)];
      }
    });

    ResidualSample sample = residuals(p_side, z_flat, z_prev, K, rho);
    sample.iteration = h;
    collect_generation();
    sample.objective = dispatch_cost(c, generation);

    ResidualNorms norms;
    norms.entries = entries;
    double pp = 0.0, zz = 0.0, uu = 0.0;
    for (std::size_t s = 0; s < entries; ++s) {
      pp += p_side[s] * p_side[s];
      uu += u_side[s] * u_side[s];
    }
    for (double z : z_flat) zz += 2.0 * z * z;
    norms.p = std::sqrt(pp);
    norms.z = std::sqrt(zz);
    norms.u = std::sqrt(uu);

    const bool converged = stopping_check(sample, norms, config) == StopDecision::Converged;
    if ((h - 1) % config.trace_every == 0 || converged || h == config.max_iter) sol.trace.push_back(sample);
    sol.iterations = h;
    sol.final_thresholds = stopping_thresholds(norms, config);
    if (converged) {
      sol.converged = true;
      break;
    }
  }

  sol.generation = generation;
  sol.objective = dispatch_cost(c, generation);
  sol.bus_generation.resize(N);
  for (std::size_t i = 0; i < N; ++i) sol.bus_generation[i] = agents[i].total_generation;
  sol.flows.assign(K, std::vector<double>(B, 0.0));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t b = 0; b < B; ++b) sol.flows[k][b] = z_flat[b * K + k];

  sol.state.scenario_ids = sol.scenario_ids;
  sol.state.z = std::move(z_flat);
  sol.state.p = std::move(p_side);
  sol.state.u = std::move(u_side);
  return sol;
}

}  // namespace dscopf
