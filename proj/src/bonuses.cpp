#include "mtrl/bonuses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mtrl {

double BonusContext::log_term(long n) const {
  const double scale = static_cast<double>(num_players) * num_states * num_actions;
  const double arg = scale * static_cast<double>(std::max(n, 1L)) / cfg.delta;
  return std::max(1.0, std::log(arg));
}

double b_rw(const BonusContext& ctx, long n, double kappa) {
  if (n == 0) return 1.0;
  const double dev = ctx.cfg.c_rw * std::sqrt(ctx.log_term(n) / static_cast<double>(n));
  return std::min(1.0, kappa + dev);
}

namespace {

// E_q[(v_upper - v_lower)^2], clamping inverted ranges to 0.
double mean_sq_range(std::span<const double> q, std::span<const double> v_upper,
                     std::span<const double> v_lower, BonusDiag* diag) {
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    double d = v_upper[i] - v_lower[i];
    if (d < 0.0) {
      d = 0.0;
      if (diag) ++diag->range_clips;
    }
    total += q[i] * d * d;
  }
  return total;
}

}  // namespace

double b_prob(const BonusContext& ctx, std::span<const double> q, long n,
              std::span<const double> v_upper, std::span<const double> v_lower,
              double kappa, BonusDiag* diag) {
  if (q.size() != v_upper.size() || q.size() != v_lower.size()) {
    throw std::invalid_argument("b_prob: misaligned slices");
  }
  const double h = ctx.horizon;
  if (n == 0) return h;

  double mean = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mean += q[i] * v_upper[i];
  double var = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = v_upper[i] - mean;
    var += q[i] * d * d;
  }
  const double range2 = mean_sq_range(q, v_upper, v_lower, diag);
  const double ln = ctx.log_term(n) / static_cast<double>(n);
  const double bonus = 2.0 * kappa + ctx.cfg.c_var * std::sqrt(var * ln) +
                       ctx.cfg.c_var * std::sqrt(range2 * ln) +
                       ctx.cfg.c_lot * h * ln;
  return std::min(h, bonus);
}

double b_str(const BonusContext& ctx, std::span<const double> q, long n,
             std::span<const double> v_upper, std::span<const double> v_lower,
             double kappa, BonusDiag* diag) {
  if (q.size() != v_upper.size() || q.size() != v_lower.size()) {
    throw std::invalid_argument("b_str: misaligned slices");
  }
  const double h = ctx.horizon;
  if (n == 0) return h;

  const double s = ctx.num_states;
  const double range2 = mean_sq_range(q, v_upper, v_lower, diag);
  const double ln = ctx.log_term(n) / static_cast<double>(n);
  const double bonus = kappa + ctx.cfg.c_str * std::sqrt(s * range2 * ln) +
                       ctx.cfg.c_lot * h * s * ln;
  return std::min(h, bonus);
}

namespace {

double assembled_bonus(const BonusContext& ctx, const ModelEstimates& est, int player,
                       int s, int a, double kappa, bool aggregate,
                       std::span<const double> v_upper_next,
                       std::span<const double> v_lower_next, BonusDiag* diag) {
  const Shape& shape = est.shape();
  const int width = shape.next_width(shape.layer_of(s));
  if (static_cast<int>(v_upper_next.size()) != width ||
      static_cast<int>(v_lower_next.size()) != width) {
    throw std::invalid_argument("value slices must span the successor layer");
  }
  std::vector<double> q(width);
  long n = 0;
  if (aggregate) {
    est.transition_agg(s, a, q);
    n = est.count(s, a);
  } else {
    est.transition_ind(player, s, a, q);
    n = est.count(player, s, a);
  }
  return b_rw(ctx, n, kappa) +
         b_prob(ctx, q, n, v_upper_next, v_lower_next, kappa, diag) +
         b_str(ctx, q, n, v_upper_next, v_lower_next, kappa, diag);
}

}  // namespace

double ind_bonus(const BonusContext& ctx, const ModelEstimates& est, int player,
                 int s, int a, std::span<const double> v_upper_next,
                 std::span<const double> v_lower_next, BonusDiag* diag) {
  return assembled_bonus(ctx, est, player, s, a, 0.0, false, v_upper_next,
                         v_lower_next, diag);
}

double agg_bonus(const BonusContext& ctx, const ModelEstimates& est, int s, int a,
                 double epsilon, std::span<const double> v_upper_next,
                 std::span<const double> v_lower_next, BonusDiag* diag) {
  return assembled_bonus(ctx, est, 0, s, a, epsilon, true, v_upper_next,
                         v_lower_next, diag);
}

}  // namespace mtrl
