#pragma once

#include <string>
#include <vector>

#include "dscopf/case_model.hpp"

namespace dscopf::testing {

inline std::string data_path(const std::string& name) { return std::string(DSCOPF_DATA_DIR) + "/" + name; }

inline Generator gen(std::string id, BusId bus, double a, double b, double c, double lo, double hi) {
  return {std::move(id), bus, a, b, c, lo, hi};
}

inline Branch branch(BusId from, BusId to, double cap, double x = 0.1) {
  return {"br" + std::to_string(from) + "-" + std::to_string(to), from, to, cap, x};
}

// Per-unit 2-bus system: g^2 at bus 1, 2g^2 at bus 2, load 1 at bus 2.
inline Case two_bus(double cap) {
  Case c;
  c.buses = {{1, 0.0}, {2, 1.0}};
  c.generators = {gen("G1", 1, 1.0, 0.0, 0.0, 0.0, 10.0), gen("G2", 2, 2.0, 0.0, 0.0, 0.0, 10.0)};
  c.branches = {branch(1, 2, cap)};
  return c;
}

// Per-unit triangle with load 1 at bus 3 and two contingencies.
inline Case three_bus() {
  Case c;
  c.buses = {{1, 0.0}, {2, 0.0}, {3, 1.0}};
  c.generators = {gen("G1", 1, 1.0, 0.0, 0.0, 0.0, 2.0), gen("G2", 2, 2.0, 0.0, 0.0, 0.0, 2.0)};
  c.branches = {branch(1, 2, 0.4), branch(1, 3, 0.5), branch(2, 3, 1.2)};
  c.contingencies = {{"out-1-3", "br1-3"}, {"out-1-2", "br1-2"}};
  return c;
}

// Path 1 - 2 - ... - n, load 0.05 on every bus, a generator on every
// seventh bus with costs varying along the chain.
inline Case chain(int n, double cap = 1.0) {
  Case c;
  for (int i = 1; i <= n; ++i) c.buses.push_back({i, 0.05});
  for (int i = 1; i <= n; i += 7)
    c.generators.push_back(gen("G" + std::to_string(i), i, 1.0 + (i % 5) * 0.25, (i % 3) * 0.1, 0.0, 0.0, 1.0));
  for (int i = 1; i < n; ++i) c.branches.push_back(branch(i, i + 1, cap));
  return c;
}

}  // namespace dscopf::testing
