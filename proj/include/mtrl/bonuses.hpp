#pragma once

#include <span>

#include "mtrl/estimators.hpp"

namespace mtrl {

struct BonusConfig {
  double delta = 0.1;  // confidence parameter
  double c_rw = 1.0;
  double c_var = 1.0;
  double c_str = 1.0;
  double c_lot = 1.0;  // lower-order terms

  /// Constants matching the concentration bounds the analysis uses.
  static BonusConfig theory(double delta = 0.1) { return {delta, 4.0, 4.0, 4.0, 2.0}; }
  /// All leading constants 1; the default for experiments.
  static BonusConfig practical(double delta = 0.1) { return {delta, 1.0, 1.0, 1.0, 1.0}; }
};

/// Fixed per-run quantities the bonus terms depend on.
struct BonusContext {
  BonusConfig cfg;
  int num_players = 1;  // M
  int num_states = 1;   // S
  int num_actions = 1;  // A
  int horizon = 1;      // H

  /// L(n) = max(1, ln(M*S*A*max(n,1)/delta)).
  double log_term(long n) const;
};

struct BonusDiag {
  long range_clips = 0;  // v_upper < v_lower entries hit in the range term
};

/// Reward bonus: min(1, kappa + c_rw*sqrt(L(n)/n)); n = 0 gives 1.
double b_rw(const BonusContext& ctx, long n, double kappa);

/**
 * Transition bonus: min(H, 2*kappa + c_var*sqrt(Var_{s'~q}[v_upper]*L/n)
 * + c_var*sqrt(E_q[(v_upper-v_lower)^2]*L/n) + c_lot*H*L/n); n = 0 gives H.
 * q, v_upper, v_lower are aligned slices over the successor layer.
 */
double b_prob(const BonusContext& ctx, std::span<const double> q, long n,
              std::span<const double> v_upper, std::span<const double> v_lower,
              double kappa, BonusDiag* diag = nullptr);

/// Structural bonus: min(H, kappa + c_str*sqrt(S*E_q[(v_upper-v_lower)^2]*L/n)
/// + c_lot*H*S*L/n); n = 0 gives H.
double b_str(const BonusContext& ctx, std::span<const double> q, long n,
             std::span<const double> v_upper, std::span<const double> v_lower,
             double kappa, BonusDiag* diag = nullptr);

/// Assembled individual-estimate bonus (kappa = 0, player counts and model).
double ind_bonus(const BonusContext& ctx, const ModelEstimates& est, int player,
                 int s, int a, std::span<const double> v_upper_next,
                 std::span<const double> v_lower_next, BonusDiag* diag = nullptr);

/// Assembled aggregate-estimate bonus (kappa = epsilon, pooled counts and model).
double agg_bonus(const BonusContext& ctx, const ModelEstimates& est, int s, int a,
                 double epsilon, std::span<const double> v_upper_next,
                 std::span<const double> v_lower_next, BonusDiag* diag = nullptr);

}  // namespace mtrl
