#include "dscopf/bus_agent.hpp"

#include <algorithm>
#include <cmath>

namespace dscopf {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr int kMaxHalvings = 200;

// Output of one generator at marginal price `lambda`. Linear-cost units jump
// from p_min to p_max at lambda == b; the lower selection is used here and
// economic_dispatch interpolates across the jump.
double output_at_price(const Generator& g, double lambda) {
  if (g.a > 0.0) return std::clamp((lambda - g.b) / (2.0 * g.a), g.p_min, g.p_max);
  return lambda > g.b ? g.p_max : g.p_min;
}

double total_at_price(std::span<const Generator> gens, double lambda) {
  double sum = 0.0;
  for (const auto& g : gens) sum += output_at_price(g, lambda);
  return sum;
}

struct Capability {
  double min = 0.0;
  double max = 0.0;
};

Capability capability(std::span<const Generator> gens) {
  Capability cap;
  for (const auto& g : gens) {
    cap.min += g.p_min;
    cap.max += g.p_max;
  }
  return cap;
}

}  // namespace

BusAgentState::BusAgentState(std::size_t bus_index, std::vector<Topology::Incidence> incident,
                             std::size_t scenario_count, std::size_t generator_count)
    : bus(bus_index),
      neighbors(std::move(incident)),
      scenarios(scenario_count),
      flows(neighbors.size() * scenario_count, 0.0),
      duals(neighbors.size() * scenario_count, 0.0),
      generation(generator_count, 0.0) {}

DispatchSplit economic_dispatch(std::span<const Generator> gens, double total) {
  DispatchSplit split;
  if (gens.empty()) return split;
  if (gens.size() == 1) {
    const double g = std::clamp(total, gens[0].p_min, gens[0].p_max);
    split.output = {g};
    split.marginal_cost = gens[0].marginal_cost(g);
    return split;
  }

  const Capability cap = capability(gens);
  total = std::clamp(total, cap.min, cap.max);

  double lo = gens[0].marginal_cost(gens[0].p_min);
  double hi = gens[0].marginal_cost(gens[0].p_max);
  for (const auto& g : gens) {
    lo = std::min(lo, g.marginal_cost(g.p_min));
    hi = std::max(hi, g.marginal_cost(g.p_max));
  }
  lo -= 1.0;
  hi += 1.0;

  double t_lo = total_at_price(gens, lo);
  double t_hi = total_at_price(gens, hi);
  for (int it = 0; it < kMaxHalvings && t_hi - t_lo > kBisectionTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double t_mid = total_at_price(gens, mid);
    if (t_mid < total) {
      lo = mid;
      t_lo = t_mid;
    } else {
      hi = mid;
      t_hi = t_mid;
    }
  }

  // Blend the two bracketing allocations so the split sums to `total`.
  const double span = t_hi - t_lo;
  const double w = span > 0.0 ? std::clamp((total - t_lo) / span, 0.0, 1.0) : 0.0;
  split.output.reserve(gens.size());
  for (const auto& g : gens) {
    const double a = output_at_price(g, lo);
    const double b = output_at_price(g, hi);
    split.output.push_back(a + w * (b - a));
  }
  split.marginal_cost = 0.5 * (lo + hi);
  return split;
}

void local_solve(BusAgentState& state, std::span<const double> z_local, double rho,
                 const LocalProblem& problem) {
  if (!(rho > 0.0)) throw ContractViolation("local_solve: rho must be > 0");
  if (z_local.size() != state.entries())
    throw ContractViolation("local_solve: consensus values do not match the agent's scenario set");
  if (state.generation.size() != problem.generators.size())
    throw ContractViolation("local_solve: generator count mismatch");

  const std::size_t n = state.neighbors.size();
  const std::size_t scenarios = state.scenarios;
  const double d = problem.load;

  // Unconstrained targets w = z - u and their per-scenario sums.
  std::vector<double> sums(scenarios, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < scenarios; ++k) {
      const std::size_t s = state.slot(j, k);
      state.flows[s] = z_local[s] - state.duals[s];
      sums[k] += state.flows[s];
    }

  const auto gens = problem.generators;
  double G = 0.0;
  if (problem.fixed_generation) {
    G = *problem.fixed_generation;
  } else if (gens.empty()) {
    G = 0.0;
  } else if (n == 0) {
    const Capability cap = capability(gens);
    G = std::clamp(d, cap.min, cap.max);
  } else {
    // Reduced objective: cost(G) + rho/(2n) * sum_k (G - d - S_k)^2.
    const double weight = rho / static_cast<double>(n);
    double target_sum = 0.0;
    for (double s : sums) target_sum += d + s;
    const Capability cap = capability(gens);
    if (gens.size() == 1) {
      const Generator& g = gens[0];
      G = (weight * target_sum - g.b) / (2.0 * g.a + weight * static_cast<double>(scenarios));
      G = std::clamp(G, cap.min, cap.max);
    } else {
      auto slope = [&](double total) {
        double penalty = 0.0;
        for (double s : sums) penalty += total - d - s;
        return economic_dispatch(gens, total).marginal_cost + weight * penalty;
      };
      double lo = cap.min, hi = cap.max;
      if (slope(lo) >= 0.0) {
        G = lo;
      } else if (slope(hi) <= 0.0) {
        G = hi;
      } else {
        for (int it = 0; it < kMaxHalvings && hi - lo > kBisectionTol; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (slope(mid) < 0.0)
            lo = mid;
          else
            hi = mid;
        }
        G = 0.5 * (lo + hi);
      }
    }
  }

  if (gens.size() == 1) {
    state.generation[0] = G;
  } else if (!gens.empty()) {
    auto split = economic_dispatch(gens, G);
    std::copy(split.output.begin(), split.output.end(), state.generation.begin());
  }
  state.total_generation = G;

  // Project each scenario's targets onto sum_j p_jk = G - d.
  if (n > 0) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < scenarios; ++k) {
      const double shift = (G - d - sums[k]) * inv_n;
      for (std::size_t j = 0; j < n; ++j) state.flows[state.slot(j, k)] += shift;
    }
  }

  double cost = 0.0;
  for (std::size_t m = 0; m < gens.size(); ++m) cost += gens[m].cost(state.generation[m]);
  state.local_cost = cost;
}

double local_objective(const BusAgentState& state, std::span<const double> z_local, double rho,
                       const LocalProblem& problem) {
  double value = 0.0;
  if (!problem.fixed_generation)
    for (std::size_t m = 0; m < problem.generators.size(); ++m)
      value += problem.generators[m].cost(state.generation[m]);
  double penalty = 0.0;
  for (std::size_t s = 0; s < state.entries(); ++s) {
    const double r = state.flows[s] - z_local[s] + state.duals[s];
    penalty += r * r;
  }
  return value + 0.5 * rho * penalty;
}

void dual_update(BusAgentState& state, std::span<const double> z_local) {
  if (z_local.size() != state.entries())
    throw ContractViolation("dual_update: consensus values do not match the agent's scenario set");
  for (std::size_t s = 0; s < state.entries(); ++s) state.duals[s] += state.flows[s] - z_local[s];
}

std::vector<NeighborMessage> emit_messages(const BusAgentState& state) {
  std::vector<NeighborMessage> out;
  out.reserve(state.entries());
  for (std::size_t j = 0; j < state.neighbors.size(); ++j)
    for (std::size_t k = 0; k < state.scenarios; ++k) {
      const std::size_t s = state.slot(j, k);
      out.push_back({state.neighbors[j].branch, k, state.bus, state.flows[s] + state.duals[s]});
    }
  return out;
}

}  // namespace dscopf
