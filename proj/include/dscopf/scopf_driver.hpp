#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dscopf/case_model.hpp"
#include "dscopf/scheduler.hpp"

namespace dscopf {

enum class ScreeningMode { Exact, Admm };
enum class Verdict { Secure, Violated, Islanding };

std::string_view to_string(Verdict v);
std::string_view to_string(ScreeningMode m);

struct ScreeningResult {
  std::string contingency;
  Verdict verdict = Verdict::Secure;
  std::vector<std::string> binding_cut;  // branch ids

  bool operator==(const ScreeningResult&) const = default;
};

struct PhaseTiming {
  double base_ms = 0.0;
  double screening_ms = 0.0;
  double redispatch_ms = 0.0;
};

struct ScopfOptions {
  ScreeningMode mode = ScreeningMode::Exact;
  std::size_t max_rounds = 5;
  /// Contingency ids to consider; all of the case's contingencies when unset.
  std::optional<std::vector<std::string>> contingencies;
  /// Run the per-contingency screenings concurrently.
  bool parallel_screening = true;
};

struct ScopfReport {
  AdmmSolution base;
  std::vector<ScreeningResult> screening;       // last screening round, case order
  std::vector<std::string> active;              // contingencies coupled into the final solve
  AdmmSolution final_solution;                  // scenarios {base} + active
  double total_cost = 0.0;                      // $/h
  bool secure = false;
  std::size_t rounds = 0;                       // redispatch rounds performed
  std::vector<std::string> remaining_violations;
  PhaseTiming timing;
};

AdmmSolution solve_base(const Case& c, const SolverConfig& config);

/// Slack accepted by exact screening: max-flow may fall short of the required
/// transfer by this much. Tied to the consensus accuracy of `solution`.
double screening_tolerance(const AdmmSolution& solution);

/// Checks one contingency against the pre-contingency dispatch in `base`,
/// with injections frozen at the consensus flows of its base scenario.
ScreeningResult screen_contingency(const Case& c, std::string_view contingency_id,
                                   const AdmmSolution& base, ScreeningMode mode,
                                   const SolverConfig& config);

std::vector<ScreeningResult> screen_contingencies(const Case& c, const std::vector<std::string>& ids,
                                                  const AdmmSolution& base, ScreeningMode mode,
                                                  const SolverConfig& config, bool parallel);

/// Base solve, screening, and preventive redispatch over the violated
/// scenarios until a screening round finds nothing new.
ScopfReport solve_scopf(const Case& c, const SolverConfig& config, const ScopfOptions& options = {});

}  // namespace dscopf
