#include "mtrl/estimators.hpp"

#include <stdexcept>

#include "mtrl/detail/strfmt.hpp"

namespace mtrl {

using detail::fmt;

ModelEstimates::ModelEstimates(const Shape& shape, int num_players)
    : shape_(shape), players_(num_players) {
  if (num_players < 1) throw std::invalid_argument("num_players must be >= 1");
  if (shape.horizon < 1 || shape.num_actions < 1 || shape.num_states() < 1) {
    throw std::invalid_argument("degenerate shape");
  }
  sa_ = static_cast<std::size_t>(shape.num_states()) * shape.num_actions;
  width_ = static_cast<std::size_t>(shape.num_states()) + 1;
  n_ind_.assign(sa_ * players_, 0);
  n_agg_.assign(sa_, 0);
  rsum_ind_.assign(sa_ * players_, 0.0);
  rsum_agg_.assign(sa_, 0.0);
  t_ind_.assign(sa_ * width_ * players_, 0);
  t_agg_.assign(sa_ * width_, 0);
  watermark_.assign(players_, -1);
}

void ModelEstimates::ingest(const Trajectory& traj) {
  const int p = traj.player;
  if (p < 0 || p >= players_) throw std::invalid_argument("trajectory player out of range");
  if (traj.episode != watermark_[p] + 1) {
    throw std::logic_error(fmt("player %d: episode %ld ingested after episode %ld",
                               p, traj.episode, watermark_[p]));
  }
  if (static_cast<int>(traj.steps.size()) != shape_.horizon) {
    throw std::invalid_argument("trajectory length != horizon");
  }

  const int terminal = shape_.num_states();
  for (int h = 0; h < shape_.horizon; ++h) {
    const int s = traj.steps[h].state;
    if (s < 0 || s >= terminal || shape_.layer_of(s) != h) {
      throw std::invalid_argument(fmt("trajectory state %d not in layer %d", s, h));
    }
    if (traj.steps[h].action < 0 || traj.steps[h].action >= shape_.num_actions) {
      throw std::invalid_argument("trajectory action out of range");
    }
  }
  // Fully validated: counts below stay consistent even under caller retries.
  for (int h = 0; h < shape_.horizon; ++h) {
    const auto& step = traj.steps[h];
    const int s = step.state;
    const int a = step.action;
    const int next = h + 1 < shape_.horizon ? traj.steps[h + 1].state : terminal;

    ++n_ind_[pidx(p, s, a)];
    ++n_agg_[idx(s, a)];
    rsum_ind_[pidx(p, s, a)] += step.reward;
    rsum_agg_[idx(s, a)] += step.reward;
    ++t_ind_[tpidx(p, s, a, next)];
    ++t_agg_[tidx(s, a, next)];
  }
  watermark_[p] = traj.episode;
}

double ModelEstimates::reward_ind(int player, int s, int a) const {
  const long n = n_ind_[pidx(player, s, a)];
  return n == 0 ? 0.0 : rsum_ind_[pidx(player, s, a)] / n;
}

double ModelEstimates::reward_agg(int s, int a) const {
  const long n = n_agg_[idx(s, a)];
  return n == 0 ? 0.0 : rsum_agg_[idx(s, a)] / n;
}

void ModelEstimates::transition_ind(int player, int s, int a,
                                    std::span<double> out) const {
  const int h = shape_.layer_of(s);
  const int nb = shape_.next_begin(h);
  if (static_cast<int>(out.size()) != shape_.next_width(h)) {
    throw std::invalid_argument("output span width != successor layer width");
  }
  const long n = n_ind_[pidx(player, s, a)];
  if (n == 0) {
    const double u = 1.0 / static_cast<double>(out.size());
    for (double& x : out) x = u;
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(t_ind_[tpidx(player, s, a, nb + static_cast<int>(i))]) / n;
  }
}

void ModelEstimates::transition_agg(int s, int a, std::span<double> out) const {
  const int h = shape_.layer_of(s);
  const int nb = shape_.next_begin(h);
  if (static_cast<int>(out.size()) != shape_.next_width(h)) {
    throw std::invalid_argument("output span width != successor layer width");
  }
  const long n = n_agg_[idx(s, a)];
  if (n == 0) {
    const double u = 1.0 / static_cast<double>(out.size());
    for (double& x : out) x = u;
    return;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(t_agg_[tidx(s, a, nb + static_cast<int>(i))]) / n;
  }
}

std::pair<std::vector<double>, std::vector<double>> ModelEstimates::transition_estimates(
    int player, int s, int a) const {
  const int width = shape_.next_width(shape_.layer_of(s));
  std::vector<double> ind(width), agg(width);
  transition_ind(player, s, a, ind);
  transition_agg(s, a, agg);
  return {std::move(ind), std::move(agg)};
}

long ModelEstimates::episodes_completed() const {
  for (int p = 1; p < players_; ++p) {
    if (watermark_[p] != watermark_[0]) {
      throw std::logic_error("estimates are mid-episode: unequal player watermarks");
    }
  }
  return watermark_[0] + 1;
}

}  // namespace mtrl
