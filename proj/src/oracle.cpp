#include "dscopf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace dscopf {

namespace {

constexpr double kResidualEps = 1e-12;

// Dinic max-flow on real capacities.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adj_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, double cap) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, cap, 0.0});
    adj_[from].push_back(id);
    arcs_.push_back({from, 0.0, 0.0});
    adj_[to].push_back(id + 1);
    return id;
  }

  double flow(std::size_t arc) const { return arcs_[arc].flow; }

  double solve(std::size_t s, std::size_t t) {
    double total = 0.0;
    while (build_levels(s, t)) {
      next_.assign(adj_.size(), 0);
      while (true) {
        const double pushed = augment(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= kResidualEps) break;
        total += pushed;
      }
    }
    return total;
  }

  /// Nodes reachable from s in the residual graph.
  std::vector<bool> reachable(std::size_t s) const {
    std::vector<bool> seen(adj_.size(), false);
    std::deque<std::size_t> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t id : adj_[v]) {
        const Arc& a = arcs_[id];
        if (!seen[a.to] && a.cap - a.flow > kResidualEps) {
          seen[a.to] = true;
          queue.push_back(a.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    std::size_t to;
    double cap;
    double flow;
  };

  bool build_levels(std::size_t s, std::size_t t) {
    level_.assign(adj_.size(), -1);
    level_[s] = 0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t id : adj_[v]) {
        const Arc& a = arcs_[id];
        if (level_[a.to] < 0 && a.cap - a.flow > kResidualEps) {
          level_[a.to] = level_[v] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double augment(std::size_t v, std::size_t t, double limit) {
    if (v == t) return limit;
    for (std::size_t& i = next_[v]; i < adj_[v].size(); ++i) {
      const std::size_t id = adj_[v][i];
      Arc& a = arcs_[id];
      if (level_[a.to] != level_[v] + 1 || a.cap - a.flow <= kResidualEps) continue;
      const double pushed = augment(a.to, t, std::min(limit, a.cap - a.flow));
      if (pushed > kResidualEps) {
        a.flow += pushed;
        arcs_[id ^ 1].flow -= pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

double generator_cost(const Case& c, const std::vector<double>& dispatch) {
  double sum = 0.0;
  for (std::size_t g = 0; g < c.generators.size(); ++g) sum += c.generators[g].cost(dispatch[g]);
  return sum;
}

}  // namespace

FlowCertificate flow_feasible(const Case& c, std::span<const double> capacities,
                              std::span<const double> injections, double tolerance) {
  const Topology topo(c);
  const std::size_t N = topo.bus_count();
  const std::size_t B = topo.branch_count();
  if (capacities.size() != B || injections.size() != N)
    throw ContractViolation("flow_feasible: capacity/injection vectors do not match the case");
  double balance = 0.0;
  for (double x : injections) balance += x;
  if (std::abs(balance) > 1e-9) throw ContractViolation("flow_feasible: injections do not balance");

  const std::size_t source = N, sink = N + 1;
  MaxFlow net(N + 2);
  std::vector<std::size_t> forward(B, 0), backward(B, 0);
  for (std::size_t b = 0; b < B; ++b) {
    forward[b] = net.add_arc(topo.branch_from[b], topo.branch_to[b], capacities[b]);
    backward[b] = net.add_arc(topo.branch_to[b], topo.branch_from[b], capacities[b]);
  }
  FlowCertificate cert;
  for (std::size_t i = 0; i < N; ++i) {
    if (injections[i] > 0.0) {
      net.add_arc(source, i, injections[i]);
      cert.required += injections[i];
    } else if (injections[i] < 0.0) {
      net.add_arc(i, sink, -injections[i]);
    }
  }
  cert.max_flow = net.solve(source, sink);
  cert.feasible = cert.max_flow >= cert.required - tolerance;

  if (cert.feasible) {
    cert.witness.resize(B);
    for (std::size_t b = 0; b < B; ++b) cert.witness[b] = net.flow(forward[b]) - net.flow(backward[b]);
  } else {
    const auto side = net.reachable(source);
    std::vector<std::string> closed;
    for (std::size_t b = 0; b < B; ++b) {
      if (side[topo.branch_from[b]] == side[topo.branch_to[b]]) continue;
      (capacities[b] > 0.0 ? cert.cut : closed).push_back(c.branches[b].id);
    }
    // A cut made only of zero-capacity branches is still reported.
    if (cert.cut.empty()) cert.cut = std::move(closed);
  }
  return cert;
}

bool supply_feasible(const Case& c, std::span<const double> capacities) {
  const Topology topo(c);
  const std::size_t N = topo.bus_count();
  const std::size_t B = topo.branch_count();
  if (capacities.size() != B) throw ContractViolation("supply_feasible: one capacity per branch expected");

  // Circulation with lower bounds: S -> bus carries generation in
  // [sum p_min, sum p_max], bus -> T carries exactly the load, T -> S closes the loop.
  const std::size_t S = N, T = N + 1, super_s = N + 2, super_t = N + 3;
  MaxFlow net(N + 4);
  std::vector<double> excess(N + 2, 0.0);
  double big = 1.0;
  const auto arc = [&](std::size_t u, std::size_t v, double lo, double hi) {
    if (hi - lo > 0.0) net.add_arc(u, v, hi - lo);
    excess[v] += lo;
    excess[u] -= lo;
  };
  for (std::size_t b = 0; b < B; ++b) {
    arc(topo.branch_from[b], topo.branch_to[b], 0.0, capacities[b]);
    arc(topo.branch_to[b], topo.branch_from[b], 0.0, capacities[b]);
  }
  for (std::size_t i = 0; i < N; ++i) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t g : topo.bus_generators[i]) {
      lo += c.generators[g].p_min;
      hi += c.generators[g].p_max;
    }
    if (!topo.bus_generators[i].empty()) arc(S, i, lo, hi);
    const double d = c.buses[i].load;
    if (d >= 0.0)
      arc(i, T, d, d);
    else
      arc(S, i, -d, -d);
    big += std::abs(lo) + std::abs(hi) + std::abs(d);
  }
  arc(T, S, 0.0, big);

  double required = 0.0;
  for (std::size_t v = 0; v < N + 2; ++v) {
    if (excess[v] > 0.0) {
      net.add_arc(super_s, v, excess[v]);
      required += excess[v];
    } else if (excess[v] < 0.0) {
      net.add_arc(v, super_t, -excess[v]);
    }
  }
  return net.solve(super_s, super_t) >= required - 1e-9;
}

OracleSolution brute_force_opf(const Case& c, const CapacityMap& scenarios, std::size_t grid_steps) {
  const std::size_t G = c.generators.size();
  if (G > kOracleMaxGenerators)
    throw OracleTooLarge("too large for oracle: " + std::to_string(G) + " generators (limit " +
                         std::to_string(kOracleMaxGenerators) + ")");
  if (grid_steps < 10) throw ContractViolation("brute_force_opf: grid_steps must be >= 10");
  if (scenarios.empty()) throw ContractViolation("brute_force_opf: no scenarios");

  const Topology topo(c);
  const double demand = c.total_load();
  OracleSolution best;
  best.cost = std::numeric_limits<double>::infinity();
  if (G == 0) return best;

  const std::size_t free = G - 1;
  const Generator& last = c.generators[free];

  std::vector<double> dispatch(G, 0.0);
  std::vector<double> inj(topo.bus_count(), 0.0);
  const auto evaluate = [&] {
    double others = 0.0;
    for (std::size_t m = 0; m < free; ++m) others += dispatch[m];
    const double g_last = demand - others;
    if (g_last < last.p_min || g_last > last.p_max) return;
    dispatch[free] = g_last;
    const double cost = generator_cost(c, dispatch);
    if (cost >= best.cost) return;
    for (std::size_t i = 0; i < inj.size(); ++i) inj[i] = -c.buses[i].load;
    for (std::size_t i = 0; i < inj.size(); ++i)
      for (std::size_t g : topo.bus_generators[i]) inj[i] += dispatch[g];
    for (const auto& s : scenarios)
      if (!flow_feasible(c, s.capacity, inj).feasible) return;
    best.feasible = true;
    best.cost = cost;
    best.dispatch = dispatch;
  };

  // Odometer over per-generator candidate lists.
  const auto enumerate = [&](const std::vector<std::vector<double>>& axes) {
    std::vector<std::size_t> pos(free, 0);
    if (free == 0) {
      evaluate();
      return;
    }
    for (;;) {
      for (std::size_t m = 0; m < free; ++m) dispatch[m] = axes[m][pos[m]];
      evaluate();
      std::size_t m = 0;
      while (m < free && ++pos[m] == axes[m].size()) pos[m++] = 0;
      if (m == free) break;
    }
  };

  std::vector<double> step(free, 0.0);
  std::vector<std::vector<double>> axes(free);
  for (std::size_t m = 0; m < free; ++m) {
    const Generator& g = c.generators[m];
    step[m] = (g.p_max - g.p_min) / static_cast<double>(grid_steps);
    if (step[m] <= 0.0) {
      axes[m] = {g.p_min};
      continue;
    }
    for (std::size_t i = 0; i < grid_steps; ++i) axes[m].push_back(g.p_min + static_cast<double>(i) * step[m]);
    axes[m].push_back(g.p_max);
  }
  enumerate(axes);
  if (!best.feasible) return best;

  const std::vector<double> coarse_best = best.dispatch;
  std::vector<double> fine(free, 0.0);
  for (std::size_t m = 0; m < free; ++m) {
    const Generator& g = c.generators[m];
    fine[m] = step[m] / 10.0;
    axes[m].clear();
    if (fine[m] <= 0.0) {
      axes[m] = {coarse_best[m]};
      continue;
    }
    for (int j = -10; j <= 10; ++j) {
      const double v = coarse_best[m] + static_cast<double>(j) * fine[m];
      if (v >= g.p_min && v <= g.p_max) axes[m].push_back(v);
    }
  }
  enumerate(axes);

  for (std::size_t m = 0; m < free; ++m) {
    best.grid_step = std::max(best.grid_step, fine[m]);
    best.cost_resolution += fine[m] * (std::abs(c.generators[m].marginal_cost(best.dispatch[m])) +
                                       std::abs(last.marginal_cost(best.dispatch[free])));
  }
  return best;
}

KvlReport kvl_audit(const Case& c, std::span<const double> flows) {
  const Topology topo(c);
  const std::size_t N = topo.bus_count();
  const std::size_t B = topo.branch_count();
  if (flows.size() != B) throw ContractViolation("kvl_audit: one flow per branch expected");
  KvlReport report;
  if (N == 0) return report;

  std::size_t root = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (c.buses[i].id < c.buses[root].id) root = i;
  report.reference_bus = c.buses[root].id;
  report.angles.assign(N, 0.0);

  std::vector<bool> visited(N, false), tree(B, false);
  std::deque<std::size_t> queue{root};
  visited[root] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& nb : topo.incident[u]) {
      const std::size_t b = nb.branch;
      const std::size_t v = nb.from_side ? topo.branch_to[b] : topo.branch_from[b];
      if (visited[v]) continue;
      visited[v] = true;
      tree[b] = true;
      const double drop = c.branches[b].reactance * flows[b];
      report.angles[v] = nb.from_side ? report.angles[u] - drop : report.angles[u] + drop;
      queue.push_back(v);
    }
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end())
    throw ContractViolation("kvl_audit: network not connected");

  for (std::size_t b = 0; b < B; ++b) {
    if (tree[b]) continue;
    const double mismatch = std::abs(report.angles[topo.branch_from[b]] - report.angles[topo.branch_to[b]] -
                                     c.branches[b].reactance * flows[b]);
    report.cycle_mismatches.push_back({c.branches[b].id, mismatch});
    report.max_mismatch = std::max(report.max_mismatch, mismatch);
  }
  return report;
}

}  // namespace dscopf
