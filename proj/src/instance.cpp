#include "mtrl/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtrl/detail/strfmt.hpp"

namespace mtrl {

using detail::fmt;

namespace {
// Slack for comparing measured dissimilarity against the declared bound;
// boundary-tight generators may differ from it by one rounding.
constexpr double kDeclaredTol = 1e-12;
constexpr double kLemmaTol = 1e-9;
}  // namespace

ValidationReport validate(const MultiTaskInstance& inst) {
  ValidationReport rep;
  if (inst.tasks.empty()) {
    rep.issues.push_back("instance has no tasks");
    return rep;
  }
  if (!(inst.declared_epsilon >= 0.0)) {
    rep.issues.push_back("declared_epsilon must be >= 0");
  }
  for (int p = 0; p < inst.num_players(); ++p) {
    ValidationReport task_rep = validate(inst.tasks[p]);
    for (auto& issue : task_rep.issues) {
      rep.issues.push_back(fmt("task %d: ", p) + issue);
    }
  }
  if (!rep.ok()) return rep;

  const Shape shape = inst.tasks[0].shape();
  for (int p = 1; p < inst.num_players(); ++p) {
    if (inst.tasks[p].shape() != shape) {
      rep.issues.push_back(fmt("task %d shape differs from task 0", p));
    } else if (inst.tasks[p].init_dist != inst.tasks[0].init_dist) {
      rep.issues.push_back(fmt("task %d initial distribution differs from task 0", p));
    } else if (inst.tasks[p].reward_kind != inst.tasks[0].reward_kind) {
      rep.issues.push_back(fmt("task %d reward_kind differs from task 0", p));
    }
  }
  if (!rep.ok()) return rep;

  const Dissimilarity dis = measure_dissimilarity(inst);
  if (dis.eps() > inst.declared_epsilon + kDeclaredTol) {
    rep.issues.push_back(fmt(
        "measured dissimilarity %.17g exceeds declared %.17g (reward %.17g at "
        "p=%d q=%d s=%d a=%d; transition %.17g at p=%d q=%d s=%d a=%d)",
        dis.eps(), inst.declared_epsilon, dis.eps_reward, dis.reward_arg[0],
        dis.reward_arg[1], dis.reward_arg[2], dis.reward_arg[3], dis.eps_transition,
        dis.transition_arg[0], dis.transition_arg[1], dis.transition_arg[2],
        dis.transition_arg[3]));
  }
  return rep;
}

void require_valid(const MultiTaskInstance& inst) {
  ValidationReport rep = validate(inst);
  if (!rep.ok()) throw std::invalid_argument("invalid instance: " + rep.str());
}

Dissimilarity measure_dissimilarity(const MultiTaskInstance& inst) {
  if (inst.tasks.empty()) throw std::invalid_argument("instance has no tasks");
  const Shape shape = inst.tasks[0].shape();
  for (int p = 1; p < inst.num_players(); ++p) {
    if (inst.tasks[p].shape() != shape) {
      throw std::invalid_argument(fmt("task %d shape differs from task 0", p));
    }
  }

  const int s_total = shape.num_states();
  const int a_total = shape.num_actions;
  Dissimilarity dis;
  for (int p = 0; p < inst.num_players(); ++p) {
    for (int q = p + 1; q < inst.num_players(); ++q) {
      const LayeredMDP& mp = inst.tasks[p];
      const LayeredMDP& mq = inst.tasks[q];
      for (int s = 0; s < s_total; ++s) {
        for (int a = 0; a < a_total; ++a) {
          const double dr = std::abs(mp.reward(s, a) - mq.reward(s, a));
          if (dr > dis.eps_reward) {
            dis.eps_reward = dr;
            dis.reward_arg[0] = p;
            dis.reward_arg[1] = q;
            dis.reward_arg[2] = s;
            dis.reward_arg[3] = a;
          }
          auto rp = mp.row(s, a);
          auto rq = mq.row(s, a);
          double l1 = 0.0;
          for (int next = 0; next <= s_total; ++next) l1 += std::abs(rp[next] - rq[next]);
          const double dt = shape.horizon * l1;
          if (dt > dis.eps_transition) {
            dis.eps_transition = dt;
            dis.transition_arg[0] = p;
            dis.transition_arg[1] = q;
            dis.transition_arg[2] = s;
            dis.transition_arg[3] = a;
          }
        }
      }
    }
  }
  return dis;
}

GapAnalysis analyze_gaps(const MultiTaskInstance& inst) {
  GapAnalysis analysis;
  analysis.per_player.reserve(inst.tasks.size());
  double best = 0.0;
  bool any = false;
  for (const LayeredMDP& task : inst.tasks) {
    GapTable table = gaps(task);
    if (table.gap_min && (!any || *table.gap_min < best)) {
      best = *table.gap_min;
      any = true;
    }
    analysis.per_player.push_back(std::move(table));
  }
  if (any) analysis.gap_min = best;
  return analysis;
}

std::vector<std::pair<int, int>> GapAnalysis::z_opt(int p, int num_actions) const {
  std::vector<std::pair<int, int>> out;
  const GapTable& table = per_player[p];
  const int s_total = static_cast<int>(table.gap.size()) / num_actions;
  for (int s = 0; s < s_total; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      if (table.gap[s * num_actions + a] == 0.0) out.emplace_back(s, a);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> subpar_set(const MultiTaskInstance& inst, double eps) {
  const GapAnalysis analysis = analyze_gaps(inst);
  const Shape shape = inst.tasks[0].shape();
  const int a_total = shape.num_actions;
  const double threshold = 96.0 * shape.horizon * eps;

  std::vector<std::pair<int, int>> out;
  for (int s = 0; s < shape.num_states(); ++s) {
    for (int a = 0; a < a_total; ++a) {
      for (int p = 0; p < inst.num_players(); ++p) {
        if (analysis.per_player[p].gap[s * a_total + a] > threshold) {
          out.emplace_back(s, a);
          break;
        }
      }
    }
  }
  return out;  // s-major, then a: already sorted
}

std::string Lemma1Report::str() const {
  return fmt("q_diff %.6g <= %.6g at (p=%d,q=%d,s=%d,a=%d); gap_diff %.6g <= %.6g "
             "at (p=%d,q=%d,s=%d,a=%d): %s",
             max_q_diff, q_bound, q_arg[0], q_arg[1], q_arg[2], q_arg[3],
             max_gap_diff, gap_bound, gap_arg[0], gap_arg[1], gap_arg[2], gap_arg[3],
             passed ? "pass" : "FAIL");
}

Lemma1Report verify_lemma1(const MultiTaskInstance& inst, double eps) {
  const GapAnalysis analysis = analyze_gaps(inst);
  std::vector<ValueTables> vts;
  vts.reserve(inst.tasks.size());
  for (const LayeredMDP& task : inst.tasks) vts.push_back(optimal_values(task));

  const Shape shape = inst.tasks[0].shape();
  const int a_total = shape.num_actions;
  Lemma1Report rep;
  rep.q_bound = 2.0 * shape.horizon * eps;
  rep.gap_bound = 4.0 * shape.horizon * eps;

  for (int p = 0; p < inst.num_players(); ++p) {
    for (int q = p + 1; q < inst.num_players(); ++q) {
      for (int s = 0; s < shape.num_states(); ++s) {
        for (int a = 0; a < a_total; ++a) {
          const std::size_t i = static_cast<std::size_t>(s) * a_total + a;
          const double dq = std::abs(vts[p].q[i] - vts[q].q[i]);
          if (dq > rep.max_q_diff) {
            rep.max_q_diff = dq;
            rep.q_arg[0] = p;
            rep.q_arg[1] = q;
            rep.q_arg[2] = s;
            rep.q_arg[3] = a;
          }
          const double dg =
              std::abs(analysis.per_player[p].gap[i] - analysis.per_player[q].gap[i]);
          if (dg > rep.max_gap_diff) {
            rep.max_gap_diff = dg;
            rep.gap_arg[0] = p;
            rep.gap_arg[1] = q;
            rep.gap_arg[2] = s;
            rep.gap_arg[3] = a;
          }
        }
      }
    }
  }
  rep.passed = rep.max_q_diff <= rep.q_bound + kLemmaTol &&
               rep.max_gap_diff <= rep.gap_bound + kLemmaTol;
  return rep;
}

std::string Lemma2Report::str() const {
  return fmt("subpar pairs %zu, min gap %.6g, worst cross-player ratio %.6g, "
             "positivity violations %d, ratio violations %d: %s",
             subpar_count, min_gap_on_subpar, worst_ratio, positivity_violations,
             ratio_violations, passed ? "pass" : "FAIL");
}

Lemma2Report verify_lemma2(const MultiTaskInstance& inst, double eps) {
  const GapAnalysis analysis = analyze_gaps(inst);
  const auto subpar = subpar_set(inst, eps);
  const int a_total = inst.tasks[0].num_actions;

  Lemma2Report rep;
  rep.subpar_count = subpar.size();
  rep.min_gap_on_subpar = std::numeric_limits<double>::infinity();
  for (const auto& [s, a] : subpar) {
    const std::size_t i = static_cast<std::size_t>(s) * a_total + a;
    bool positive = true;
    for (int p = 0; p < inst.num_players(); ++p) {
      const double g = analysis.per_player[p].gap[i];
      rep.min_gap_on_subpar = std::min(rep.min_gap_on_subpar, g);
      if (g <= 0.0) positive = false;
    }
    if (!positive) ++rep.positivity_violations;
    for (int p = 0; p < inst.num_players(); ++p) {
      for (int q = 0; q < inst.num_players(); ++q) {
        if (p == q) continue;
        const double gp = analysis.per_player[p].gap[i];
        const double gq = analysis.per_player[q].gap[i];
        if (gp > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, gq / gp);
        if (gp < gq / 2.0 - kLemmaTol) ++rep.ratio_violations;
      }
    }
  }
  if (subpar.empty()) rep.min_gap_on_subpar = 0.0;
  rep.passed = rep.positivity_violations == 0 && rep.ratio_violations == 0;
  return rep;
}

}  // namespace mtrl
