#pragma once

#include <string>

#include "mtrl/learner.hpp"

namespace mtrl {

struct OracleBudget {
  long max_policies = 2'000'000;  // refuse enumeration beyond this many policies
};

/**
 * Independent optimality oracle: enumerates all A^S deterministic policies,
 * evaluates each by fixed-policy DP, and returns the pointwise maxima of V
 * and Q (Q via one-step deviations). Shares no code path with
 * optimal_values' max-based recursion. Throws if A^S exceeds the budget.
 */
ValueTables brute_force_optimal(const LayeredMDP& mdp, const OracleBudget& budget = {});

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long rollouts = 0;
};

/// Monte-Carlo policy value from sampled episodes; a distribution-level
/// cross-check of the DP evaluator.
McEstimate mc_value(const LayeredMDP& mdp, const Policy& policy, long rollouts,
                    RngStream& rng);

struct DecompositionReport {
  // Reg(K) >= sum_p sum_{s in layer 0, a} n_p^{K+1}(s,a) * gap_p(s,a).
  double regret_total = 0.0;
  double weighted_gap_total = 0.0;
  bool inequality_holds = false;

  // When gaps vanish outside layer 0, each increment must equal
  // sum_s p0(s) * gap_p(s, pi^k_p(s)) exactly (1e-12).
  bool identity_applicable = false;
  bool identity_holds = false;
  double max_identity_error = 0.0;
  long identity_rows_checked = 0;

  std::string str() const;
};

/// Audits a finished run's log against the regret decomposition.
DecompositionReport check_regret_decomposition(const MultiTaskInstance& inst,
                                               const RegretLog& log);

}  // namespace mtrl
