#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dscopf {

using BusId = int;

/// Thrown when a precondition of an API call does not hold.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Violation {
  std::string entity;  // e.g. "generator G3", "branch br1-2", "network"
  std::string rule;    // e.g. "p_min > p_max"

  std::string to_string() const { return entity.empty() ? rule : entity + ": " + rule; }
  bool operator==(const Violation&) const = default;
};

/// Malformed case input. Carries either a single syntax/field message or the
/// full list of validation violations.
class CaseError : public std::runtime_error {
 public:
  explicit CaseError(const std::string& message);
  explicit CaseError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class IslandingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All quantities below are per-unit on Case::base_mva unless noted.

struct Bus {
  BusId id = 0;
  double load = 0.0;

  bool operator==(const Bus&) const = default;
};

/// Quadratic cost a*p^2 + b*p + c in $/h with p in pu.
struct Generator {
  std::string id;
  BusId bus = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;

  double cost(double p) const { return a * p * p + b * p + c; }
  double marginal_cost(double p) const { return 2.0 * a * p + b; }

  bool operator==(const Generator&) const = default;
};

struct Branch {
  std::string id;
  BusId from = 0;
  BusId to = 0;
  double capacity = 0.0;   // symmetric limit |flow| <= capacity
  double reactance = 0.0;  // only used by the KVL audit

  bool operator==(const Branch&) const = default;
};

struct Contingency {
  std::string id;
  std::string outaged_branch;

  bool operator==(const Contingency&) const = default;
};

struct Case {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;
  std::vector<Contingency> contingencies;

  bool operator==(const Case&) const = default;

  std::optional<std::size_t> bus_index(BusId id) const;
  std::optional<std::size_t> branch_index(std::string_view id) const;
  const Contingency* find_contingency(std::string_view id) const;

  double total_load() const;
};

/// Dense index view of a case: buses and branches addressed by position.
/// Build it only from a case whose references resolve (validate first).
struct Topology {
  struct Incidence {
    std::size_t branch = 0;
    bool from_side = true;  // true when this bus is the branch's `from` end
  };

  std::vector<std::size_t> branch_from;  // bus index of each branch end
  std::vector<std::size_t> branch_to;
  std::vector<std::vector<Incidence>> incident;  // per bus, ascending branch index
  std::vector<std::vector<std::size_t>> bus_generators;  // generator indices per bus

  explicit Topology(const Case& c);

  std::size_t bus_count() const { return incident.size(); }
  std::size_t branch_count() const { return branch_from.size(); }
};

/// True when the buses stay connected with `removed` (a branch index) taken
/// out of service. Pass std::nullopt to test the intact network.
bool is_connected(const Case& c, std::optional<std::size_t> removed = std::nullopt);

/// Scenario-indexed branch limits. Scenario 0 is the intact network.
struct Scenario {
  std::string id;                          // "base" or the contingency id
  std::optional<std::size_t> outaged;      // branch index for contingency scenarios
  std::vector<double> capacity;            // per branch index

  bool operator==(const Scenario&) const = default;
};

using CapacityMap = std::vector<Scenario>;

inline constexpr std::string_view kBaseScenario = "base";

Scenario base_scenario(const Case& c);

/// Capacity map entry for one contingency: identical to the base limits except
/// the outaged branch, whose limit is set to exactly zero. Topology is untouched.
/// Throws ContractViolation for an unknown id and IslandingError when removing
/// the branch disconnects the network.
Scenario apply_contingency(const Case& c, std::string_view contingency_id);

/// Every rule broken by `c`; empty iff the case is usable.
std::vector<Violation> validate_case(const Case& c);

/// Contingencies that would split the network; they are excluded from SCOPF.
std::vector<std::string> islanding_contingencies(const Case& c);

/// Parses the native JSON case format (MW and $/MW-based units) into a
/// validated per-unit Case.
Case parse_case(std::string_view text);

/// Inverse of parse_case: writes the native format back in MW units.
std::string serialize_case(const Case& c);

/// Best-effort import of a MATPOWER-style `mpc` text (bus/gen/branch/gencost
/// matrices). Only polynomial costs up to quadratic are understood.
Case import_matpower(std::string_view text);

/// Reads a case from disk, dispatching on extension (".m" -> MATPOWER import).
Case load_case_file(const std::string& path);

}  // namespace dscopf
