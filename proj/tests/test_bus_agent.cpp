#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dscopf/bus_agent.hpp"
#include "support.hpp"

using namespace dscopf;
using dscopf::testing::gen;

namespace {

BusAgentState agent(std::size_t neighbors, std::size_t scenarios, std::size_t gens) {
  std::vector<Topology::Incidence> inc;
  for (std::size_t j = 0; j < neighbors; ++j) inc.push_back({j, j % 2 == 0});
  return BusAgentState(0, inc, scenarios, gens);
}

// Cheapest way to make `total` from two quadratic units, by direct
// elimination of g2 = total - g1.
double two_unit_cost(const Generator& g1, const Generator& g2, double total) {
  const double lo = std::max(g1.p_min, total - g2.p_max);
  const double hi = std::min(g1.p_max, total - g2.p_min);
  double x = (2.0 * g2.a * total + g2.b - g1.b) / (2.0 * (g1.a + g2.a));
  x = std::clamp(x, lo, hi);
  return g1.cost(x) + g2.cost(total - x);
}

// Local objective with total generation G and flows p, generator cost given
// by `bus_cost`.
template <class Cost>
double reduced_objective(const BusAgentState& s, std::span<const double> z, double rho, double G,
                         const std::vector<double>& p, Cost bus_cost) {
  double pen = 0.0;
  for (std::size_t e = 0; e < p.size(); ++e) {
    const double r = p[e] - z[e] + s.duals[e];
    pen += r * r;
  }
  return bus_cost(G) + 0.5 * rho * pen;
}

}  // namespace

TEST_SUITE("bus_agent") {

TEST_CASE("single generator splits the difference") {
  const std::vector<Generator> g{gen("G", 1, 1.0, 0.0, 0.0, 0.0, 10.0)};
  BusAgentState s = agent(1, 1, 1);
  const std::vector<double> z{4.0};
  local_solve(s, z, 2.0, {g, 0.0, {}});
  CHECK(s.generation[0] == doctest::Approx(2.0));
  CHECK(s.flows[0] == doctest::Approx(2.0));
}

TEST_CASE("generator-less bus projects onto the balance hyperplane") {
  BusAgentState s = agent(2, 1, 0);
  const std::vector<double> z{0.2, 0.2};
  for (double rho : {0.1, 1.0, 25.0}) {
    local_solve(s, z, rho, {{}, 1.0, {}});
    CHECK(s.flows[0] == doctest::Approx(-0.5));
    CHECK(s.flows[1] == doctest::Approx(-0.5));
    CHECK(s.flows[0] + s.flows[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(s.total_generation == 0.0);
  }
}

TEST_CASE("clamped generator") {
  const std::vector<Generator> g{gen("G", 1, 1.0, 0.0, 0.0, 0.0, 1.0)};
  BusAgentState s = agent(1, 1, 1);
  const std::vector<double> z{4.0};
  local_solve(s, z, 2.0, {g, 0.0, {}});
  CHECK(s.generation[0] == 1.0);
  CHECK(s.flows[0] == doctest::Approx(1.0));
}

TEST_CASE("dual update arithmetic") {
  BusAgentState s = agent(1, 1, 0);
  s.duals[0] = 0.2;
  s.flows[0] = 1.0;
  dual_update(s, std::vector<double>{0.8});
  CHECK(s.duals[0] == doctest::Approx(0.4));

  s.duals[0] = 0.0;
  s.flows[0] = -0.3;
  dual_update(s, std::vector<double>{0.1});
  CHECK(s.duals[0] == doctest::Approx(-0.4));

  s.duals[0] = 0.37;
  s.flows[0] = 0.25;
  dual_update(s, std::vector<double>{0.25});
  CHECK(s.duals[0] == 0.37);
}

TEST_CASE("messages") {
  BusAgentState s = agent(2, 3, 0);
  CHECK(emit_messages(s).size() == 6);

  BusAgentState one = agent(1, 1, 0);
  one.flows[0] = 0.5;
  one.duals[0] = 0.1;
  const auto m = emit_messages(one);
  REQUIRE(m.size() == 1);
  CHECK(m[0].value == doctest::Approx(0.6));

  CHECK(emit_messages(agent(0, 2, 0)).empty());
}

TEST_CASE("scenario set mismatch is a contract violation") {
  BusAgentState s = agent(2, 2, 0);
  CHECK_THROWS_AS(local_solve(s, std::vector<double>{0.0, 0.0, 0.0}, 1.0, {}), ContractViolation);
  CHECK_THROWS_AS(dual_update(s, std::vector<double>{0.0}), ContractViolation);
  CHECK_THROWS_AS(local_solve(s, std::vector<double>(4, 0.0), 0.0, {}), ContractViolation);
}

TEST_CASE("economic dispatch equalizes marginal cost") {
  const std::vector<Generator> g{gen("A", 1, 1.0, 0.0, 0.0, 0.0, 5.0), gen("B", 1, 2.0, 0.0, 0.0, 0.0, 5.0)};
  const DispatchSplit split = economic_dispatch(g, 1.5);
  CHECK(split.output[0] + split.output[1] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(split.output[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(split.marginal_cost == doctest::Approx(2.0).epsilon(1e-8));

  const std::vector<Generator> lin{gen("A", 1, 0.0, 1.0, 0.0, 0.0, 1.0), gen("B", 1, 0.0, 2.0, 0.0, 0.0, 1.0)};
  const DispatchSplit l = economic_dispatch(lin, 1.25);
  CHECK(l.output[0] == doctest::Approx(1.0));
  CHECK(l.output[1] == doctest::Approx(0.25));
}

TEST_CASE("finite-difference optimality, balance and coupling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  const double delta = 1e-4;
  const double bound = 10.0 * delta * delta;

  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const std::size_t K = 1 + (trial / 4) % 3;
    const std::size_t ngen = trial % 3;
    const double rho = pos(rng);
    const double d = std::abs(u(rng));

    std::vector<Generator> gens;
    for (std::size_t m = 0; m < ngen; ++m) {
      const double lo = 0.2 * std::abs(u(rng));
      gens.push_back(gen("G" + std::to_string(m), 1, pos(rng), pos(rng) - 1.0, 0.0, lo, lo + pos(rng)));
    }
    BusAgentState s = agent(n, K, ngen);
    std::vector<double> z(s.entries());
    for (auto& v : z) v = u(rng);
    for (auto& v : s.duals) v = 0.3 * u(rng);

    const LocalProblem problem{gens, d, {}};
    local_solve(s, z, rho, problem);

    double lo = 0.0, hi = 0.0;
    for (const auto& g : gens) {
      lo += g.p_min;
      hi += g.p_max;
    }
    for (std::size_t m = 0; m < ngen; ++m) {
      CHECK(s.generation[m] >= gens[m].p_min);
      CHECK(s.generation[m] <= gens[m].p_max);
    }
    double gsum = 0.0;
    for (double g : s.generation) gsum += g;
    for (std::size_t k = 0; k < K; ++k) {
      double flow = 0.0;
      for (std::size_t j = 0; j < n; ++j) flow += s.flows[s.slot(j, k)];
      CHECK(std::abs(flow - (gsum - d)) <= 1e-9);
    }

    auto bus_cost = [&](double G) {
      if (ngen == 0) return 0.0;
      if (ngen == 1) return gens[0].cost(G);
      return two_unit_cost(gens[0], gens[1], G);
    };
    const double G = s.total_generation;
    const double f0 = reduced_objective(s, z, rho, G, s.flows, bus_cost);
    CHECK(local_objective(s, z, rho, problem) == doctest::Approx(f0).epsilon(1e-9));

    for (double sign : {-1.0, 1.0}) {
      // Shift flow between two branches within one scenario.
      for (std::size_t k = 0; k < K && n >= 2; ++k) {
        std::vector<double> p = s.flows;
        p[s.slot(0, k)] += sign * delta;
        p[s.slot(n - 1, k)] -= sign * delta;
        CHECK(reduced_objective(s, z, rho, G, p, bus_cost) >= f0 - bound);
      }
      // Move total generation, shifting every scenario's flows uniformly.
      const double G2 = G + sign * delta;
      if (ngen > 0 && G2 >= lo && G2 <= hi) {
        std::vector<double> p = s.flows;
        for (auto& v : p) v += sign * delta / static_cast<double>(n);
        CHECK(reduced_objective(s, z, rho, G2, p, bus_cost) >= f0 - bound);
      }
    }
  }
}

TEST_CASE("generation is shared by every scenario") {
  const std::vector<Generator> g{gen("G", 1, 0.5, 0.1, 0.0, 0.0, 3.0)};
  BusAgentState s = agent(2, 3, 1);
  const std::vector<double> z{0.1, -0.4, 0.9, 0.3, 0.0, -0.2};
  local_solve(s, z, 1.5, {g, 0.4, {}});
  for (std::size_t k = 0; k < 3; ++k) {
    const double flow = s.flows[s.slot(0, k)] + s.flows[s.slot(1, k)];
    CHECK(std::abs(flow - (s.generation[0] - 0.4)) <= 1e-12);
  }
}

TEST_CASE("analytic solution matches a grid search over G") {
  const Generator g = gen("G", 1, 1.0, 0.0, 0.0, -1e9, 1e9);
  const std::vector<Generator> gens{g};
  for (double rho : {0.5, 2.0, 8.0}) {
    BusAgentState s = agent(1, 1, 1);
    const std::vector<double> z{4.0};
    local_solve(s, z, rho, {gens, 0.0, {}});
    double best = 0.0, best_val = 1e300;
    for (double G = 0.0; G <= 4.0; G += 1e-4) {
      const double val = g.cost(G) + 0.5 * rho * (G - 4.0) * (G - 4.0);
      if (val < best_val) {
        best_val = val;
        best = G;
      }
    }
    CHECK(std::abs(s.generation[0] - best) <= 1e-3);
  }
}

TEST_CASE("fixed generation drops the cost term") {
  const std::vector<Generator> g{gen("G", 1, 100.0, 0.0, 0.0, 0.0, 10.0)};
  BusAgentState s = agent(2, 1, 1);
  const std::vector<double> z{0.0, 0.0};
  local_solve(s, z, 1.0, {g, 0.5, 2.0});
  CHECK(s.total_generation == 2.0);
  CHECK(s.flows[0] == doctest::Approx(0.75));
  CHECK(s.flows[1] == doctest::Approx(0.75));
}

}  // TEST_SUITE
