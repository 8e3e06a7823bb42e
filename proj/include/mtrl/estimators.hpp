#pragma once

#include <span>
#include <vector>

#include "mtrl/mdp.hpp"

namespace mtrl {

/**
 * Per-player and aggregate empirical model over a shared shape.
 *
 * Counts are exact integers; reward sums are doubles. Zero-count conventions:
 * reward estimate 0, transition estimate uniform over the successor layer.
 * The aggregate estimators are the count-weighted mixtures of the individual
 * ones, an identity maintained exactly by construction and cheap to audit.
 */
class ModelEstimates {
 public:
  ModelEstimates(const Shape& shape, int num_players);

  /// Ingest one episode for one player. Episodes must arrive in order,
  /// exactly once per (player, episode); anything else throws.
  void ingest(const Trajectory& traj);

  long count(int player, int s, int a) const { return n_ind_[pidx(player, s, a)]; }
  long count(int s, int a) const { return n_agg_[idx(s, a)]; }

  double reward_ind(int player, int s, int a) const;
  double reward_agg(int s, int a) const;

  /// Estimated successor distribution over the next layer of s (the row
  /// slice [next_begin, next_end)); out.size() must equal that width.
  void transition_ind(int player, int s, int a, std::span<double> out) const;
  void transition_agg(int s, int a, std::span<double> out) const;

  /// Convenience pair (individual, aggregate) for one (player, s, a).
  std::pair<std::vector<double>, std::vector<double>> transition_estimates(
      int player, int s, int a) const;

  const Shape& shape() const { return shape_; }
  int num_players() const { return players_; }

  /// Episodes ingested so far; throws std::logic_error if players are
  /// mid-episode (unequal watermarks), i.e. the estimates are not at a barrier.
  long episodes_completed() const;

  long raw_transition_count(int player, int s, int a, int next) const {
    return t_ind_[tpidx(player, s, a, next)];
  }
  long raw_transition_count(int s, int a, int next) const {
    return t_agg_[tidx(s, a, next)];
  }

 private:
  std::size_t idx(int s, int a) const {
    return static_cast<std::size_t>(s) * shape_.num_actions + a;
  }
  std::size_t pidx(int p, int s, int a) const {
    return static_cast<std::size_t>(p) * sa_ + idx(s, a);
  }
  std::size_t tidx(int s, int a, int next) const {
    return idx(s, a) * width_ + next;
  }
  std::size_t tpidx(int p, int s, int a, int next) const {
    return static_cast<std::size_t>(p) * sa_ * width_ + tidx(s, a, next);
  }

  Shape shape_;
  int players_ = 0;
  std::size_t sa_ = 0;     // S*A
  std::size_t width_ = 0;  // S+1
  std::vector<long> n_ind_, n_agg_;
  std::vector<double> rsum_ind_, rsum_agg_;
  std::vector<long> t_ind_, t_agg_;
  std::vector<long> watermark_;  // last ingested episode per player, -1 initially
};

}  // namespace mtrl
