#include "mtrl/generators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtrl/detail/strfmt.hpp"

namespace mtrl {

using detail::fmt;

namespace {

void reject(const std::string& constraint) {
  throw std::invalid_argument("constraint violation: " + constraint);
}

void require(bool ok, const std::string& constraint) {
  if (!ok) reject(constraint);
}

Shape uniform_shape(int layer_width, int horizon, int num_actions) {
  Shape shape;
  shape.horizon = horizon;
  shape.num_actions = num_actions;
  shape.layer_offset.resize(horizon + 1);
  for (int h = 0; h <= horizon; ++h) shape.layer_offset[h] = h * layer_width;
  return shape;
}

// Chain-backed shape for the lower-bound constructions: one wide first layer,
// then H-1 layers of {good, bad}.
Shape chain_shape(int s1, int horizon, int num_actions) {
  Shape shape;
  shape.horizon = horizon;
  shape.num_actions = num_actions;
  shape.layer_offset.resize(horizon + 1);
  shape.layer_offset[0] = 0;
  for (int h = 1; h <= horizon; ++h) shape.layer_offset[h] = s1 + 2 * (h - 1);
  return shape;
}

// Fill everything both lower-bound constructions share: uniform p0 on the
// first layer, reward-1 good chain / reward-0 bad chain, deterministic chain
// transitions. Layer-0 rows are left for the caller.
LayeredMDP chain_skeleton(const Shape& shape) {
  LayeredMDP mdp = LayeredMDP::blank(shape);
  const int s1 = shape.layer_size(0);
  const double p0 = 1.0 / s1;
  for (int s = 0; s < s1; ++s) mdp.init_dist[s] = p0;

  for (int h = 1; h < shape.horizon; ++h) {
    const int good = shape.layer_offset[h];
    const int bad = good + 1;
    const int next_good = shape.next_begin(h);  // terminal column when h = H-1
    for (int a = 0; a < shape.num_actions; ++a) {
      mdp.mean_reward[good * shape.num_actions + a] = 1.0;
      if (h + 1 < shape.horizon) {
        mdp.row(good, a)[next_good] = 1.0;
        mdp.row(bad, a)[next_good + 1] = 1.0;
      } else {
        mdp.row(good, a)[next_good] = 1.0;
        mdp.row(bad, a)[next_good] = 1.0;
      }
    }
  }
  return mdp;
}

}  // namespace

MultiTaskInstance gen_random(const RandomInstanceConfig& cfg, RngStream& rng) {
  require(cfg.layer_width >= 1, "layer_width >= 1");
  require(cfg.horizon >= 1, "horizon >= 1");
  require(cfg.num_actions >= 1, "num_actions >= 1");
  require(cfg.num_players >= 1, "num_players >= 1");
  require(cfg.epsilon >= 0.0, "epsilon >= 0");
  require(cfg.reward_scale >= 0.0 && cfg.reward_scale <= 1.0, "reward_scale in [0, 1]");

  const Shape shape = uniform_shape(cfg.layer_width, cfg.horizon, cfg.num_actions);
  const int s_total = shape.num_states();
  const int a_total = cfg.num_actions;

  LayeredMDP base = LayeredMDP::blank(shape);
  base.reward_kind = RewardKind::kBernoulli;
  {
    double mass = 0.0;
    for (int s = 0; s < cfg.layer_width; ++s) {
      base.init_dist[s] = rng.uniform(0.1, 1.0);
      mass += base.init_dist[s];
    }
    for (int s = 0; s < cfg.layer_width; ++s) base.init_dist[s] /= mass;
  }
  for (int s = 0; s < s_total; ++s) {
    const int h = shape.layer_of(s);
    const int nb = shape.next_begin(h);
    const int width = shape.next_width(h);
    for (int a = 0; a < a_total; ++a) {
      base.mean_reward[s * a_total + a] = rng.uniform(0.0, cfg.reward_scale);
      auto row = base.row(s, a);
      double mass = 0.0;
      for (int next = nb; next < nb + width; ++next) {
        row[next] = rng.uniform(0.05, 1.0);
        mass += row[next];
      }
      for (int next = nb; next < nb + width; ++next) row[next] /= mass;
    }
  }

  // Per-player deviations stay within half the declared budget relative to
  // the base task, so pairs of players stay within the whole budget.
  const double r_span = cfg.epsilon / 2.0;
  const double mass_span = cfg.epsilon / (4.0 * cfg.horizon);

  MultiTaskInstance inst;
  inst.declared_epsilon = cfg.epsilon;
  inst.tasks.reserve(cfg.num_players);
  for (int p = 0; p < cfg.num_players; ++p) {
    LayeredMDP task = base;
    for (int s = 0; s < s_total; ++s) {
      const int h = shape.layer_of(s);
      const int nb = shape.next_begin(h);
      const int width = shape.next_width(h);
      for (int a = 0; a < a_total; ++a) {
        const double dr = rng.uniform(-r_span, r_span);
        double& r = task.mean_reward[s * a_total + a];
        r = std::clamp(r + dr, 0.0, 1.0);

        auto row = task.row(s, a);
        if (width >= 2) {
          const int i = nb + static_cast<int>(rng.below(width));
          int j = nb + static_cast<int>(rng.below(width - 1));
          if (j >= i) ++j;
          const double m = std::min(mass_span, row[i]) * rng.next_double();
          row[i] -= m;
          row[j] += m;
        }
      }
    }
    inst.tasks.push_back(std::move(task));
  }
  require_valid(inst);
  return inst;
}

MultiTaskInstance gen_random(const RandomInstanceConfig& cfg) {
  RngStream rng = RngStream::derive(cfg.seed, {0x6d74726cULL});
  return gen_random(cfg, rng);
}

HardInstanceResult gen_gap_independent_hard(const HardInstanceParams& params) {
  const long s_l = params.num_states;
  const long a_l = params.num_actions;
  const long h_l = params.horizon;
  const long m_l = params.num_players;
  const long k = params.episodes;
  const long l = params.subpar_target;

  require(params.variant == HardVariant::kGapIndependentCase1 ||
              params.variant == HardVariant::kGapIndependentCase2,
          "variant is gap-independent");
  require(a_l >= 2, fmt("A >= 2 (A=%ld)", a_l));
  require(h_l >= 2, fmt("H >= 2 (H=%ld)", h_l));
  require(m_l >= 1, fmt("M >= 1 (M=%ld)", m_l));
  require(s_l >= 4 * h_l, fmt("S >= 4H (S=%ld, 4H=%ld)", s_l, 4 * h_l));
  require(k >= s_l * a_l, fmt("K >= SA (K=%ld, SA=%ld)", k, s_l * a_l));
  require(l >= 1, fmt("l >= 1 (l=%ld)", l));
  require(l <= s_l * a_l - 4 * (s_l + h_l * a_l),
          fmt("l <= SA - 4(S + HA) (l=%ld, SA - 4(S + HA) = %ld)", l,
              s_l * a_l - 4 * (s_l + h_l * a_l)));

  const int s1 = static_cast<int>(s_l - 2 * (h_l - 1));
  const int a_total = static_cast<int>(a_l);
  const long per_state = (l + s1 - 1) / s1;  // ceil(l / S1)
  const bool case1 = params.variant == HardVariant::kGapIndependentCase1;

  long live = 0;  // actions with nonzero mass on the good chain
  if (case1) {
    live = per_state + 1;  // b + 1
    require(live <= a_l, fmt("ceil(l/S1) + 1 <= A (got %ld > %ld)", live, a_l));
  } else {
    live = a_l - per_state;  // v = A - u
    require(live >= 1, fmt("A - ceil(l/S1) >= 1 (got %ld)", live));
  }

  double delta = case1 ? std::sqrt((l + 1.0) / (384.0 * m_l * k))
                       : std::sqrt(static_cast<double>(live) * s1 / (384.0 * k));
  // Representable bump: probabilities use 1/2 + delta_eff with the excess
  // recovered exactly, so declared dissimilarity matches measured bitwise.
  const double p_good_fav = 0.5 + delta;
  const double delta_eff = p_good_fav - 0.5;
  require(delta_eff > 0.0 && delta_eff <= 0.25, "0 < Delta <= 1/4");

  const Shape shape = chain_shape(s1, static_cast<int>(h_l), a_total);
  const int good0 = shape.layer_offset[1];
  LayeredMDP proto = chain_skeleton(shape);
  proto.reward_kind = RewardKind::kBernoulli;

  RngStream arms = RngStream::derive(params.seed, {case1 ? 1ULL : 2ULL});
  HardInstanceResult result;
  result.delta = delta_eff;
  result.epsilon = case1 ? static_cast<double>(h_l) * delta_eff / 2.0
                         : static_cast<double>(h_l) * (2.0 * delta_eff);
  result.subpar_lower_bound = s1 * per_state;
  result.favored_action.assign(params.num_players, std::vector<int>(s1, 0));

  std::vector<int> shared(s1, 0);
  if (case1) {
    for (int s = 0; s < s1; ++s) shared[s] = static_cast<int>(arms.below(live));
  }

  result.instance.declared_epsilon = result.epsilon;
  for (int p = 0; p < params.num_players; ++p) {
    LayeredMDP task = proto;
    for (int s = 0; s < s1; ++s) {
      const int fav = case1 ? shared[s] : static_cast<int>(arms.below(live));
      result.favored_action[p][s] = fav;
      for (int a = 0; a < a_total; ++a) {
        auto row = task.row(s, a);
        if (a == fav) {
          row[good0] = p_good_fav;
          row[good0 + 1] = 1.0 - p_good_fav;
        } else if (a < live) {
          row[good0] = 0.5;
          row[good0 + 1] = 0.5;
        } else {
          row[good0 + 1] = 1.0;
        }
      }
    }
    result.instance.tasks.push_back(std::move(task));
  }
  require_valid(result.instance);
  return result;
}

HardInstanceResult gen_gap_dependent_hard(const HardInstanceParams& params) {
  const int s_total = params.num_states;
  const int a_total = params.num_actions;
  const int h = params.horizon;
  const int m = params.num_players;

  require(params.variant == HardVariant::kGapDependent, "variant is gap-dependent");
  require(a_total >= 1, "A >= 1");
  require(h >= 2, fmt("H >= 2 (H=%d)", h));
  require(m >= 1, "M >= 1");
  require(s_total - 2 * (h - 1) >= 1,
          fmt("S - 2(H-1) >= 1 (S=%d, H=%d)", s_total, h));
  require(params.epsilon >= 0.0, "epsilon >= 0");

  const int s1 = s_total - 2 * (h - 1);
  const std::size_t expect = static_cast<std::size_t>(s1) * a_total * m;
  require(params.delta_table.size() == expect,
          fmt("delta_table has S1*A*M entries (got %zu, want %zu)",
              params.delta_table.size(), expect));

  const double cap = h / (48.0 * std::sqrt(static_cast<double>(m)));
  auto delta_at = [&](int s, int a, int p) {
    return params.delta_table[(static_cast<std::size_t>(s) * a_total + a) * m + p];
  };
  for (int s = 0; s < s1; ++s) {
    for (int p = 0; p < m; ++p) {
      bool has_zero = false;
      for (int a = 0; a < a_total; ++a) {
        const double d = delta_at(s, a, p);
        require(d >= 0.0 && d <= cap,
                fmt("Delta[s=%d,a=%d,p=%d] in [0, H/(48 sqrt(M))] (got %.17g, cap %.17g)",
                    s, a, p, d, cap));
        if (d == 0.0) has_zero = true;
      }
      require(has_zero, fmt("some Delta[s=%d,.,p=%d] == 0", s, p));
      for (int a = 0; a < a_total; ++a) {
        for (int q = p + 1; q < m; ++q) {
          const double dd = std::abs(delta_at(s, a, p) - delta_at(s, a, q));
          require(dd <= params.epsilon / 4.0,
                  fmt("|Delta_p - Delta_q| <= eps/4 at (s=%d,a=%d,p=%d,q=%d): "
                      "%.17g > %.17g",
                      s, a, p, q, dd, params.epsilon / 4.0));
        }
      }
    }
  }

  const Shape shape = chain_shape(s1, h, a_total);
  const int good0 = shape.layer_offset[1];
  LayeredMDP proto = chain_skeleton(shape);
  proto.reward_kind = RewardKind::kBernoulli;

  HardInstanceResult result;
  result.epsilon = params.epsilon;
  result.instance.declared_epsilon = params.epsilon;
  result.favored_action.assign(m, std::vector<int>(s1, 0));

  double max_delta = 0.0;
  for (int p = 0; p < m; ++p) {
    LayeredMDP task = proto;
    for (int s = 0; s < s1; ++s) {
      for (int a = 0; a < a_total; ++a) {
        const double p_bad = 0.5 + delta_at(s, a, p) / (h - 1.0);
        max_delta = std::max(max_delta, p_bad - 0.5);
        auto row = task.row(s, a);
        row[good0] = 1.0 - p_bad;
        row[good0 + 1] = p_bad;
      }
      for (int a = 0; a < a_total; ++a) {
        if (delta_at(s, a, p) == 0.0) {
          result.favored_action[p][s] = a;
          break;
        }
      }
    }
    result.instance.tasks.push_back(std::move(task));
  }
  result.delta = max_delta;
  require_valid(result.instance);
  return result;
}

}  // namespace mtrl
