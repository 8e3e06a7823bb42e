#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtrl/bonuses.hpp"
#include "mtrl/instance.hpp"

namespace mtrl {

enum class LearnerMode { kMultitask, kIndividualBaseline };

struct LearnerConfig {
  LearnerMode mode = LearnerMode::kMultitask;
  double delta = 0.1;
  // Dissimilarity bound fed to the aggregate bonuses; run() resolves an
  // unset value to the instance's declared epsilon.
  std::optional<double> epsilon_input;
  BonusConfig bonus = BonusConfig::practical();
  std::uint64_t seed = 0;
  std::string name;  // artifact label; defaults to the mode name

  std::string resolved_name() const;
};

/// One player's optimistic/pessimistic tables for one episode.
struct ValueBounds {
  std::vector<double> q_upper, q_lower;  // S*A
  std::vector<double> v_upper, v_lower;  // S+1, terminal entries 0
  long episode = -1;                     // estimate barrier the tables were built at
  long range_crossings = 0;              // (s,a) with q_lower > q_upper (diagnostic)
};

/**
 * Backward optimistic value iteration for one player on frozen estimates.
 * Candidate upper bounds from individual and (multitask mode only) aggregate
 * estimates are clamped into [0, H-h+1]; the greedy policy from q_upper
 * breaks ties toward the smallest action id. cfg.epsilon_input must be set.
 */
ValueBounds optimistic_value_iteration(const ModelEstimates& est, int player,
                                       const LearnerConfig& cfg,
                                       Policy* policy_out = nullptr);

/// Optimism surplus of bounds built for player p against its true model:
/// q_upper(s,a) - R_p(s,a) - <P_p(.|s,a), v_upper>.
double surplus(const MultiTaskInstance& inst, int player, const ValueBounds& bounds,
               int s, int a);

/// alpha if alpha >= threshold, else 0.
double clip(double alpha, double threshold);

/**
 * Per-episode log of a full run. Regret increments are exact expectations
 * (V*_0 minus the DP-evaluated return of the episode's policy), not realized
 * returns; realized returns are kept as a diagnostic column.
 */
struct RegretLog {
  int num_players = 0;
  long episodes = 0;
  int num_states = 0;

  // K*M row-major (episode-major) unless noted.
  std::vector<double> regret_increment;
  std::vector<double> cum_collective;  // running total over all prior rows
  std::vector<double> realized_return;
  std::vector<int> violations;     // per-state bound failures this (episode, player)
  std::vector<double> min_surplus; // min over (s,a) of the episode's surplus
  std::vector<int> policies;       // K*M*S flattened policies
  std::vector<long> final_counts;  // M*S*A visit counts after the last episode

  long total_violations = 0;
  double global_min_surplus = 0.0;
  long range_crossings = 0;

  std::size_t row(long k, int p) const {
    return static_cast<std::size_t>(k) * num_players + p;
  }
  int policy_at(long k, int p, int s) const {
    return policies[(static_cast<std::size_t>(k) * num_players + p) * num_states + s];
  }
  double final_regret() const { return cum_collective.empty() ? 0.0 : cum_collective.back(); }
  /// Collective cumulative regret after episode k (0-based).
  double cum_at(long k) const { return cum_collective[row(k, num_players - 1)]; }
};

/**
 * Run the learner for `episodes` episodes: per episode, optimistic planning
 * per player, exact regret bookkeeping against the DP oracle, bound-violation
 * and surplus audits, then one sampled trajectory per player ingested into
 * the shared estimates. Sampling streams are derived from
 * (cfg.seed, episode, player), so logs are byte-stable and mode-independent.
 */
RegretLog run(const MultiTaskInstance& inst, const LearnerConfig& cfg, long episodes);

}  // namespace mtrl
