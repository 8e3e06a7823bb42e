#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtrl {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;          // one-line human summary
  nlohmann::json data;         // machine-readable specifics
};

// Property suites shared by the CLI `verify` command and the acceptance
// binary. Parameters default to the acceptance-grade sizes; smaller values
// make quick smoke checks.

/// DP optimal values vs brute-force policy enumeration, tolerance 1e-12.
SuiteResult verify_oracle_suite(int num_instances = 100);

/// Q*-closeness and gap-closeness bounds on random eps-dissimilar corpora.
SuiteResult verify_lemma1_suite(int num_instances = 200);

/// Subpar-set gap positivity and 2-approximation on the same corpora.
SuiteResult verify_lemma2_suite(int num_instances = 200);

/// Hard-instance construction fidelity: random Delta tables realize their
/// gaps (1e-12) and declared dissimilarity budgets; both minimax cases
/// realize their closed-form gap values and subpar-set sizes.
SuiteResult verify_construction_suite(int num_tables = 50);

struct BoundsSuiteOutcome {
  SuiteResult validity;   // per-run confidence-bound violations
  SuiteResult optimism;   // min surplus on non-violating runs
};

/// Theory-preset runs on a pinned eps-dissimilar instance; at most
/// `max_violating_runs` of the seeds may violate the confidence bounds, and
/// non-violating runs must keep every surplus >= -1e-9.
BoundsSuiteOutcome verify_bounds_suite(int num_seeds = 50, long episodes = 2000,
                                       int max_violating_runs = 5);

/// Regret-decomposition inequality on a deep-gap random instance and a
/// zero-gap instance, plus the exact per-episode identity on a
/// gap-dependent hard instance.
SuiteResult verify_decomposition_suite(long episodes = 500);

/// Multitask vs individual_baseline coincide exactly when M = 1, eps = 0.
SuiteResult verify_degeneracy_suite(long episodes = 300, int num_seeds = 3);

struct RegretTrendOutcome {
  SuiteResult sublinear;  // cum regret at K grows sublinearly vs K/5
  SuiteResult advantage;  // multitask <= 0.8x individual at K
};

/// Long-horizon runs on a 0-dissimilar instance shared by both checks.
RegretTrendOutcome verify_regret_trend_suite(long episodes = 20000, int num_seeds = 10);

}  // namespace mtrl
