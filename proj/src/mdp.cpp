#include "mtrl/mdp.hpp"

#include <cmath>
#include <stdexcept>

#include "mtrl/detail/strfmt.hpp"

namespace mtrl {

using detail::fmt;

namespace {
constexpr double kRowMassTol = 1e-9;
}  // namespace

int Shape::layer_of(int s) const {
  for (int h = 0; h < horizon; ++h) {
    if (s < layer_offset[h + 1]) return h;
  }
  return horizon;  // terminal
}

LayeredMDP LayeredMDP::blank(const Shape& shape) {
  LayeredMDP mdp;
  mdp.horizon = shape.horizon;
  mdp.layer_offset = shape.layer_offset;
  mdp.num_actions = shape.num_actions;
  const int s = shape.num_states();
  mdp.init_dist.assign(s, 0.0);
  mdp.transition.assign(static_cast<std::size_t>(s) * shape.num_actions * (s + 1), 0.0);
  mdp.mean_reward.assign(static_cast<std::size_t>(s) * shape.num_actions, 0.0);
  return mdp;
}

std::string ValidationReport::str() const {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue;
  }
  return out.empty() ? "ok" : out;
}

ValidationReport validate(const LayeredMDP& mdp) {
  ValidationReport rep;
  const int s_total = mdp.num_states();
  const int a_total = mdp.num_actions;

  if (mdp.horizon < 1) rep.issues.push_back("horizon must be >= 1");
  if (a_total < 1) rep.issues.push_back("num_actions must be >= 1");
  if (static_cast<int>(mdp.layer_offset.size()) != mdp.horizon + 1) {
    rep.issues.push_back("layer_offset must have horizon+1 entries");
    return rep;
  }
  if (mdp.layer_offset[0] != 0) rep.issues.push_back("layer_offset must start at 0");
  for (int h = 0; h < mdp.horizon; ++h) {
    if (mdp.layer_offset[h + 1] <= mdp.layer_offset[h]) {
      rep.issues.push_back(fmt("layer %d is empty", h));
    }
  }
  if (!rep.ok()) return rep;

  if (static_cast<int>(mdp.init_dist.size()) != s_total) {
    rep.issues.push_back("init_dist size mismatch");
    return rep;
  }
  if (mdp.transition.size() !=
      static_cast<std::size_t>(s_total) * a_total * (s_total + 1)) {
    rep.issues.push_back("transition size mismatch");
    return rep;
  }
  if (mdp.mean_reward.size() != static_cast<std::size_t>(s_total) * a_total) {
    rep.issues.push_back("mean_reward size mismatch");
    return rep;
  }

  double p0_mass = 0.0;
  for (int s = 0; s < s_total; ++s) {
    const double p = mdp.init_dist[s];
    if (p < 0.0) rep.issues.push_back(fmt("init_dist[%d] negative", s));
    if (p > 0.0 && s >= mdp.layer_offset[1]) {
      rep.issues.push_back(fmt("init_dist puts mass on state %d outside layer 0", s));
    }
    p0_mass += p;
  }
  if (std::abs(p0_mass - 1.0) > kRowMassTol) {
    rep.issues.push_back(fmt("init_dist mass %.12g != 1", p0_mass));
  }

  const Shape shape = mdp.shape();
  for (int s = 0; s < s_total; ++s) {
    const int h = shape.layer_of(s);
    const int nb = shape.next_begin(h);
    const int ne = shape.next_end(h);
    for (int a = 0; a < a_total; ++a) {
      auto row = mdp.row(s, a);
      double mass = 0.0;
      for (int next = 0; next <= s_total; ++next) {
        const double p = row[next];
        if (p < 0.0) {
          rep.issues.push_back(fmt("transition[%d][%d] -> %d negative", s, a, next));
        }
        if (p > 0.0 && (next < nb || next >= ne)) {
          rep.issues.push_back(
              fmt("cross-layer transition at state %d action %d to %d", s, a, next));
        }
        mass += p;
      }
      if (std::abs(mass - 1.0) > kRowMassTol) {
        rep.issues.push_back(
            fmt("transition row (%d, %d) mass %.12g != 1", s, a, mass));
      }
      const double r = mdp.reward(s, a);
      if (!(r >= 0.0 && r <= 1.0)) {
        rep.issues.push_back(fmt("mean_reward[%d][%d] = %.12g outside [0, 1]", s, a, r));
      }
    }
  }
  return rep;
}

void require_valid(const LayeredMDP& mdp) {
  ValidationReport rep = validate(mdp);
  if (!rep.ok()) throw std::invalid_argument("invalid mdp: " + rep.str());
}

ValueTables optimal_values(const LayeredMDP& mdp) {
  require_valid(mdp);
  const Shape shape = mdp.shape();
  const int s_total = mdp.num_states();
  const int a_total = mdp.num_actions;

  ValueTables vt;
  vt.v.assign(s_total + 1, 0.0);
  vt.q.assign(static_cast<std::size_t>(s_total) * a_total, 0.0);

  for (int h = shape.horizon - 1; h >= 0; --h) {
    const int nb = shape.next_begin(h);
    const int ne = shape.next_end(h);
    for (int s = shape.layer_offset[h]; s < shape.layer_offset[h + 1]; ++s) {
      double best = 0.0;
      for (int a = 0; a < a_total; ++a) {
        auto row = mdp.row(s, a);
        double q = mdp.reward(s, a);
        for (int next = nb; next < ne; ++next) q += row[next] * vt.v[next];
        vt.q[s * a_total + a] = q;
        if (a == 0 || q > best) best = q;
      }
      vt.v[s] = best;
    }
  }
  return vt;
}

ValueTables evaluate_policy(const LayeredMDP& mdp, const Policy& policy) {
  require_valid(mdp);
  const int s_total = mdp.num_states();
  const int a_total = mdp.num_actions;
  if (static_cast<int>(policy.size()) != s_total) {
    throw std::invalid_argument("policy must cover every non-terminal state");
  }
  for (int s = 0; s < s_total; ++s) {
    if (policy[s] < 0 || policy[s] >= a_total) {
      throw std::invalid_argument(fmt("policy action at state %d out of range", s));
    }
  }

  const Shape shape = mdp.shape();
  ValueTables vt;
  vt.v.assign(s_total + 1, 0.0);
  vt.q.assign(static_cast<std::size_t>(s_total) * a_total, 0.0);

  for (int h = shape.horizon - 1; h >= 0; --h) {
    const int nb = shape.next_begin(h);
    const int ne = shape.next_end(h);
    for (int s = shape.layer_offset[h]; s < shape.layer_offset[h + 1]; ++s) {
      for (int a = 0; a < a_total; ++a) {
        auto row = mdp.row(s, a);
        double q = mdp.reward(s, a);
        for (int next = nb; next < ne; ++next) q += row[next] * vt.v[next];
        vt.q[s * a_total + a] = q;
      }
      vt.v[s] = vt.q[s * a_total + policy[s]];
    }
  }
  return vt;
}

double initial_value(const LayeredMDP& mdp, const ValueTables& vt) {
  double total = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) total += mdp.init_dist[s] * vt.v[s];
  return total;
}

double expected_return(const LayeredMDP& mdp, const Policy& policy) {
  return initial_value(mdp, evaluate_policy(mdp, policy));
}

GapTable gaps(const LayeredMDP& mdp) {
  const ValueTables vt = optimal_values(mdp);
  const int a_total = mdp.num_actions;
  GapTable table;
  table.gap.resize(vt.q.size());
  double best = 0.0;
  bool any = false;
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < a_total; ++a) {
      const double g = vt.v[s] - vt.q[s * a_total + a];
      table.gap[s * a_total + a] = g;
      if (g > 0.0 && (!any || g < best)) {
        best = g;
        any = true;
      }
    }
  }
  if (any) table.gap_min = best;
  return table;
}

Policy greedy_policy(const LayeredMDP& mdp, const ValueTables& vt) {
  const int a_total = mdp.num_actions;
  Policy policy(mdp.num_states(), 0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    int best_a = 0;
    double best = vt.q[s * a_total];
    for (int a = 1; a < a_total; ++a) {
      const double q = vt.q[s * a_total + a];
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    policy[s] = best_a;
  }
  return policy;
}

Trajectory sample_episode(const LayeredMDP& mdp, const Policy& policy, RngStream& rng) {
  const Shape shape = mdp.shape();
  if (static_cast<int>(policy.size()) != mdp.num_states()) {
    throw std::invalid_argument("policy must cover every non-terminal state");
  }

  Trajectory traj;
  traj.steps.reserve(shape.horizon);
  // p0 is supported on layer 0 by validation; sample over that slice.
  int state = static_cast<int>(
      rng.categorical({mdp.init_dist.data(), static_cast<std::size_t>(mdp.layer_offset[1])}));
  for (int h = 0; h < shape.horizon; ++h) {
    const int a = policy[state];
    const double mean = mdp.reward(state, a);
    const double reward = mdp.reward_kind == RewardKind::kBernoulli
                              ? (rng.bernoulli(mean) ? 1.0 : 0.0)
                              : mean;
    traj.steps.push_back({state, a, reward});
    const int nb = shape.next_begin(h);
    const int width = shape.next_width(h);
    auto slice = mdp.row(state, a).subspan(nb, width);
    state = nb + static_cast<int>(rng.categorical(slice));
  }
  return traj;
}

}  // namespace mtrl
