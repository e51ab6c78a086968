#include <cmath>
#include <vector>

#include "doctest.h"
#include "dscopf/scheduler.hpp"
#include "support.hpp"

using namespace dscopf;
using dscopf::testing::data_path;

namespace {

SolverConfig serial() {
  SolverConfig cfg;
  cfg.workers = 1;
  return cfg;
}

// Limits hold exactly; bus balance with the consensus flows holds to
// `balance`, or to the primal residual bound when `balance` is negative.
void check_feasible_at_convergence(const Case& c, const CapacityMap& scenarios, const AdmmSolution& sol,
                                   double balance) {
  REQUIRE(sol.converged);
  const Topology topo(c);
  const double r = std::sqrt(sol.trace.back().primal_sq);
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    for (std::size_t b = 0; b < c.branches.size(); ++b)
      CHECK(std::abs(sol.flows[k][b]) <= scenarios[k].capacity[b] + 1e-9);
    const std::vector<double> inj = injections_from_flows(c, sol.flows[k]);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      // Bus i's mismatch is a sum of deg(i) entries of p - z.
      const double limit =
          balance >= 0.0 ? balance : std::sqrt(static_cast<double>(topo.incident[i].size())) * r + 1e-12;
      CHECK(std::abs(inj[i] - (sol.bus_generation[i] - c.buses[i].load)) <= limit);
    }
  }
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("single bus solves in one iteration") {
  Case c;
  c.buses = {{1, 1.0}};
  c.generators = {dscopf::testing::gen("G", 1, 1.0, 0.0, 5.0, 0.0, 10.0)};
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, serial());
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.generation[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(6.0));
}

TEST_CASE("two-bus economic split") {
  const Case c = dscopf::testing::two_bus(10.0);
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, serial());
  REQUIRE(sol.converged);
  CHECK(std::abs(sol.generation[0] - 2.0 / 3.0) <= 1e-3);
  CHECK(std::abs(sol.generation[1] - 1.0 / 3.0) <= 1e-3);
  CHECK(std::abs(sol.objective - 2.0 / 3.0) <= 1e-3);
  CHECK(std::abs(sol.flows[0][0] - 2.0 / 3.0) <= 1e-3);
}

TEST_CASE("two-bus with binding limit") {
  const Case c = dscopf::testing::two_bus(0.3);
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, serial());
  REQUIRE(sol.converged);
  CHECK(std::abs(sol.generation[0] - 0.3) <= 1e-3);
  CHECK(std::abs(sol.generation[1] - 0.7) <= 1e-3);
  CHECK(std::abs(sol.objective - 1.07) <= 1e-3);
  CHECK(std::abs(sol.flows[0][0] - 0.3) <= 1e-3);
}

TEST_CASE("stopping check") {
  SolverConfig cfg;
  cfg.eps_abs = 0.25;
  cfg.eps_rel = 1e-300;
  ResidualNorms norms;
  norms.entries = 4;  // sqrt(m) * eps_abs = 0.5

  ResidualSample s;
  CHECK(stopping_check(s, norms, cfg) == StopDecision::Converged);

  s.primal_sq = 0.25;  // exactly at the threshold
  s.dual_sq = 0.25;
  CHECK(stopping_check(s, norms, cfg) == StopDecision::Converged);

  s.primal_sq = 0.2501;
  CHECK(stopping_check(s, norms, cfg) == StopDecision::Continue);

  s.primal_sq = 0.0;
  s.dual_sq = 0.2501;
  CHECK(stopping_check(s, norms, cfg) == StopDecision::Continue);

  cfg.eps_rel = 0.1;
  norms.p = 2.0;
  norms.z = 3.0;
  norms.u = 1.0;
  cfg.rho = 4.0;
  const StopThresholds t = stopping_thresholds(norms, cfg);
  CHECK(t.primal == doctest::Approx(0.5 + 0.3));
  CHECK(t.dual == doctest::Approx(0.5 + 0.4));
}

TEST_CASE("invalid configuration") {
  const Case c = dscopf::testing::two_bus(1.0);
  SolverConfig cfg = serial();
  cfg.rho = 0.0;
  CHECK_THROWS_AS(run_admm(c, {base_scenario(c)}, cfg), ContractViolation);
  cfg = serial();
  cfg.max_iter = 0;
  CHECK_THROWS_AS(run_admm(c, {base_scenario(c)}, cfg), ContractViolation);
  cfg = serial();
  cfg.eps_abs = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  CHECK_THROWS_AS(run_admm(c, {}, serial()), ContractViolation);
}

TEST_CASE("non-convergence is reported, not thrown") {
  const Case c = dscopf::testing::two_bus(0.3);
  SolverConfig cfg = serial();
  cfg.max_iter = 3;
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, cfg);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 3);
  CHECK(sol.trace.size() == 3);
}

TEST_CASE("worker count does not change the result") {
  const Case c = dscopf::testing::chain(400, 0.2);
  CapacityMap scenarios{base_scenario(c)};
  SolverConfig one = serial();
  one.max_iter = 300;
  SolverConfig four = one;
  four.workers = 4;
  const AdmmSolution a = run_admm(c, scenarios, one);
  const AdmmSolution b = run_admm(c, scenarios, four);
  CHECK(a.iterations == b.iterations);
  CHECK(a.generation == b.generation);
  CHECK(a.flows == b.flows);
  CHECK(a.state.u == b.state.u);
  REQUIRE(a.trace.size() == b.trace.size());
  bool same = true;
  for (std::size_t h = 0; h < a.trace.size(); ++h)
    same = same && a.trace[h].primal_sq == b.trace[h].primal_sq && a.trace[h].dual_sq == b.trace[h].dual_sq &&
           a.trace[h].objective == b.trace[h].objective;
  CHECK(same);
}

TEST_CASE("feasibility and objective consistency at convergence") {
  const Case c = load_case_file(data_path("case14.json"));
  const CapacityMap base{base_scenario(c)};
  const CapacityMap two{base_scenario(c), apply_contingency(c, "out-5-6")};

  SUBCASE("default tolerances") {
    const AdmmSolution sol = run_admm(c, base, serial());
    check_feasible_at_convergence(c, base, sol, -1.0);
    CHECK(sol.objective == dispatch_cost(c, sol.generation));
    const AdmmSolution scopf = run_admm(c, two, serial());
    check_feasible_at_convergence(c, two, scopf, -1.0);
    CHECK(scopf.objective == dispatch_cost(c, scopf.generation));
  }
  SUBCASE("tight tolerances") {
    SolverConfig tight = serial();
    tight.eps_abs = 1e-9;
    tight.eps_rel = 1e-8;
    const AdmmSolution sol = run_admm(c, base, tight);
    check_feasible_at_convergence(c, base, sol, 1e-6);
    CHECK(sol.objective == dispatch_cost(c, sol.generation));
    const AdmmSolution scopf = run_admm(c, two, tight);
    check_feasible_at_convergence(c, two, scopf, 1e-6);
    CHECK(scopf.objective == dispatch_cost(c, scopf.generation));
  }
}

TEST_CASE("dual update is a fixed point at consensus") {
  const Case c = dscopf::testing::two_bus(0.3);
  SolverConfig tight = serial();
  tight.eps_abs = 1e-12;
  tight.eps_rel = 1e-12;
  tight.max_iter = 5000;
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, tight);
  REQUIRE(sol.converged);
  RunOptions warm;
  warm.warm = &sol;
  SolverConfig once = tight;
  once.max_iter = 1;
  const AdmmSolution again = run_admm(c, {base_scenario(c)}, once, warm);
  for (std::size_t s = 0; s < sol.state.u.size(); ++s)
    CHECK(std::abs(again.state.u[s] - sol.state.u[s]) <= 1e-9);
}

TEST_CASE("trace sampling") {
  const Case c = dscopf::testing::two_bus(10.0);
  SolverConfig cfg = serial();
  cfg.trace_every = 10;
  const AdmmSolution sol = run_admm(c, {base_scenario(c)}, cfg);
  REQUIRE(sol.converged);
  REQUIRE(sol.trace.size() >= 2);
  CHECK(sol.trace[0].iteration == 1);
  CHECK(sol.trace[1].iteration == 11);
  CHECK(sol.trace.back().iteration == sol.iterations);
}

TEST_CASE("scenario zero must be intact") {
  const Case c = dscopf::testing::three_bus();
  CHECK_THROWS_AS(run_admm(c, {apply_contingency(c, "out-1-3")}, serial()), ContractViolation);
}

}  // TEST_SUITE
