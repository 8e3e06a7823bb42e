#include "mtrl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mtrl {

namespace {
constexpr double kBoundTol = 1e-9;
}  // namespace

std::string LearnerConfig::resolved_name() const {
  if (!name.empty()) return name;
  return mode == LearnerMode::kMultitask ? "multitask" : "individual";
}

double clip(double alpha, double threshold) {
  return alpha >= threshold ? alpha : 0.0;
}

ValueBounds optimistic_value_iteration(const ModelEstimates& est, int player,
                                       const LearnerConfig& cfg, Policy* policy_out) {
  if (!cfg.epsilon_input.has_value()) {
    throw std::invalid_argument("optimistic_value_iteration needs a resolved epsilon");
  }
  if (player < 0 || player >= est.num_players()) {
    throw std::invalid_argument("player out of range");
  }
  const double eps = *cfg.epsilon_input;
  const Shape& shape = est.shape();
  const int s_total = shape.num_states();
  const int a_total = shape.num_actions;
  const bool multitask = cfg.mode == LearnerMode::kMultitask;

  BonusContext ctx;
  ctx.cfg = cfg.bonus;
  ctx.cfg.delta = cfg.delta;
  ctx.num_players = est.num_players();
  ctx.num_states = s_total;
  ctx.num_actions = a_total;
  ctx.horizon = shape.horizon;

  ValueBounds vb;
  vb.episode = est.episodes_completed();
  vb.q_upper.assign(static_cast<std::size_t>(s_total) * a_total, 0.0);
  vb.q_lower.assign(static_cast<std::size_t>(s_total) * a_total, 0.0);
  vb.v_upper.assign(s_total + 1, 0.0);
  vb.v_lower.assign(s_total + 1, 0.0);
  if (policy_out) policy_out->assign(s_total, 0);

  int max_width = 1;
  for (int h = 0; h < shape.horizon; ++h) max_width = std::max(max_width, shape.next_width(h));
  std::vector<double> q_ind(max_width), q_agg(max_width);

  BonusDiag diag;
  for (int h = shape.horizon - 1; h >= 0; --h) {
    const int nb = shape.next_begin(h);
    const int width = shape.next_width(h);
    const double reach_cap = shape.horizon - h;  // max total reward from layer h on
    const std::span<const double> vu_next{vb.v_upper.data() + nb,
                                          static_cast<std::size_t>(width)};
    const std::span<const double> vl_next{vb.v_lower.data() + nb,
                                          static_cast<std::size_t>(width)};
    const std::span<double> qi{q_ind.data(), static_cast<std::size_t>(width)};
    const std::span<double> qa{q_agg.data(), static_cast<std::size_t>(width)};

    for (int s = shape.layer_offset[h]; s < shape.layer_offset[h + 1]; ++s) {
      for (int a = 0; a < a_total; ++a) {
        const long n_p = est.count(player, s, a);
        est.transition_ind(player, s, a, qi);
        double dot_u = 0.0, dot_l = 0.0;
        for (int i = 0; i < width; ++i) {
          dot_u += qi[i] * vu_next[i];
          dot_l += qi[i] * vl_next[i];
        }
        const double r_ind = est.reward_ind(player, s, a);
        const double bonus_ind = b_rw(ctx, n_p, 0.0) +
                                 b_prob(ctx, qi, n_p, vu_next, vl_next, 0.0, &diag) +
                                 b_str(ctx, qi, n_p, vu_next, vl_next, 0.0, &diag);
        double q_up = r_ind + dot_u + bonus_ind;
        double q_lo = r_ind + dot_l - bonus_ind;

        if (multitask) {
          const long n = est.count(s, a);
          est.transition_agg(s, a, qa);
          double adot_u = 0.0, adot_l = 0.0;
          for (int i = 0; i < width; ++i) {
            adot_u += qa[i] * vu_next[i];
            adot_l += qa[i] * vl_next[i];
          }
          const double r_agg = est.reward_agg(s, a);
          const double bonus_agg = b_rw(ctx, n, eps) +
                                   b_prob(ctx, qa, n, vu_next, vl_next, eps, &diag) +
                                   b_str(ctx, qa, n, vu_next, vl_next, eps, &diag);
          q_up = std::min(q_up, r_agg + adot_u + bonus_agg);
          q_lo = std::max(q_lo, r_agg + adot_l - bonus_agg);
        }

        q_up = std::min(q_up, reach_cap);
        q_lo = std::max(q_lo, 0.0);
        if (q_lo > q_up) ++vb.range_crossings;
        vb.q_upper[s * a_total + a] = q_up;
        vb.q_lower[s * a_total + a] = q_lo;
      }

      int best_a = 0;
      double best = vb.q_upper[s * a_total];
      for (int a = 1; a < a_total; ++a) {
        const double q = vb.q_upper[s * a_total + a];
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      vb.v_upper[s] = best;
      vb.v_lower[s] = vb.q_lower[s * a_total + best_a];
      if (policy_out) (*policy_out)[s] = best_a;
    }
  }
  return vb;
}

double surplus(const MultiTaskInstance& inst, int player, const ValueBounds& bounds,
               int s, int a) {
  const LayeredMDP& task = inst.task(player);
  auto row = task.row(s, a);
  double expected = 0.0;
  for (int next = 0; next <= task.num_states(); ++next) {
    expected += row[next] * bounds.v_upper[next];
  }
  return bounds.q_upper[s * task.num_actions + a] - task.reward(s, a) - expected;
}

RegretLog run(const MultiTaskInstance& inst, const LearnerConfig& cfg, long episodes) {
  require_valid(inst);
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");

  LearnerConfig resolved = cfg;
  if (!resolved.epsilon_input.has_value()) {
    resolved.epsilon_input = inst.declared_epsilon;
  }

  const int m = inst.num_players();
  const Shape shape = inst.tasks[0].shape();
  const int s_total = shape.num_states();
  const int a_total = shape.num_actions;

  std::vector<ValueTables> vstar;
  std::vector<double> v0star;
  vstar.reserve(m);
  for (int p = 0; p < m; ++p) {
    vstar.push_back(optimal_values(inst.task(p)));
    v0star.push_back(initial_value(inst.task(p), vstar.back()));
  }

  ModelEstimates est(shape, m);

  RegretLog log;
  log.num_players = m;
  log.episodes = episodes;
  log.num_states = s_total;
  const std::size_t rows = static_cast<std::size_t>(episodes) * m;
  log.regret_increment.assign(rows, 0.0);
  log.cum_collective.assign(rows, 0.0);
  log.realized_return.assign(rows, 0.0);
  log.violations.assign(rows, 0);
  log.min_surplus.assign(rows, 0.0);
  log.policies.assign(rows * s_total, 0);
  log.global_min_surplus = std::numeric_limits<double>::infinity();

  std::vector<Trajectory> pending(m);
  Policy policy;
  double cum = 0.0;

  for (long k = 0; k < episodes; ++k) {
    for (int p = 0; p < m; ++p) {
      const ValueBounds vb = optimistic_value_iteration(est, p, resolved, &policy);
      log.range_crossings += vb.range_crossings;

      const LayeredMDP& task = inst.task(p);
      const ValueTables vpi = evaluate_policy(task, policy);
      const double inc = v0star[p] - initial_value(task, vpi);

      int bad_states = 0;
      for (int s = 0; s < s_total; ++s) {
        if (vb.v_upper[s] < vstar[p].v[s] - kBoundTol) ++bad_states;
        if (vb.v_lower[s] > vpi.v[s] + kBoundTol) ++bad_states;
      }

      double min_sur = std::numeric_limits<double>::infinity();
      for (int s = 0; s < s_total; ++s) {
        for (int a = 0; a < a_total; ++a) {
          min_sur = std::min(min_sur, surplus(inst, p, vb, s, a));
        }
      }

      RngStream rng = RngStream::derive(resolved.seed,
                                        {static_cast<std::uint64_t>(k),
                                         static_cast<std::uint64_t>(p)});
      Trajectory traj = sample_episode(task, policy, rng);
      traj.episode = k;
      traj.player = p;
      double realized = 0.0;
      for (const auto& step : traj.steps) realized += step.reward;
      pending[p] = std::move(traj);

      const std::size_t r = log.row(k, p);
      cum += inc;
      log.regret_increment[r] = inc;
      log.cum_collective[r] = cum;
      log.realized_return[r] = realized;
      log.violations[r] = bad_states;
      log.min_surplus[r] = min_sur;
      log.total_violations += bad_states;
      log.global_min_surplus = std::min(log.global_min_surplus, min_sur);
      std::copy(policy.begin(), policy.end(), log.policies.begin() + r * s_total);
    }
    for (int p = 0; p < m; ++p) est.ingest(pending[p]);
  }

  log.final_counts.assign(static_cast<std::size_t>(m) * s_total * a_total, 0);
  for (int p = 0; p < m; ++p) {
    for (int s = 0; s < s_total; ++s) {
      for (int a = 0; a < a_total; ++a) {
        log.final_counts[(static_cast<std::size_t>(p) * s_total + s) * a_total + a] =
            est.count(p, s, a);
      }
    }
  }
  if (rows == 0) log.global_min_surplus = 0.0;
  return log;
}

}  // namespace mtrl
