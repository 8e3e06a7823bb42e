#include "mtrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtrl/detail/strfmt.hpp"
#include "mtrl/instance.hpp"

namespace mtrl {

using detail::fmt;

namespace {

// Fixed-policy backward evaluation local to the oracle, so the enumeration
// shares no code with the recursions it certifies.
void eval_into(const LayeredMDP& mdp, const Shape& shape, const Policy& policy,
               std::vector<double>& v, std::vector<double>& q) {
  const int a_total = mdp.num_actions;
  v.assign(mdp.num_states() + 1, 0.0);
  q.assign(static_cast<std::size_t>(mdp.num_states()) * a_total, 0.0);
  for (int h = shape.horizon - 1; h >= 0; --h) {
    const int nb = shape.next_begin(h);
    const int ne = shape.next_end(h);
    for (int s = shape.layer_offset[h]; s < shape.layer_offset[h + 1]; ++s) {
      for (int a = 0; a < a_total; ++a) {
        auto row = mdp.row(s, a);
        double total = mdp.reward(s, a);
        for (int next = nb; next < ne; ++next) total += row[next] * v[next];
        q[s * a_total + a] = total;
      }
      v[s] = q[s * a_total + policy[s]];
    }
  }
}

}  // namespace

ValueTables brute_force_optimal(const LayeredMDP& mdp, const OracleBudget& budget) {
  require_valid(mdp);
  const int s_total = mdp.num_states();
  const int a_total = mdp.num_actions;

  double policy_count = 1.0;
  for (int s = 0; s < s_total; ++s) policy_count *= a_total;
  if (policy_count > static_cast<double>(budget.max_policies)) {
    throw std::invalid_argument(fmt(
        "enumeration budget exceeded: A^S = %.3g policies > max_policies = %ld",
        policy_count, budget.max_policies));
  }

  const Shape shape = mdp.shape();
  ValueTables best;
  best.v.assign(s_total + 1, 0.0);
  best.q.assign(static_cast<std::size_t>(s_total) * a_total, 0.0);

  Policy policy(s_total, 0);
  std::vector<double> v, q;
  bool first = true;
  while (true) {
    eval_into(mdp, shape, policy, v, q);
    if (first) {
      std::copy(v.begin(), v.end(), best.v.begin());
      std::copy(q.begin(), q.end(), best.q.begin());
      first = false;
    } else {
      for (std::size_t i = 0; i < best.v.size(); ++i) best.v[i] = std::max(best.v[i], v[i]);
      for (std::size_t i = 0; i < best.q.size(); ++i) best.q[i] = std::max(best.q[i], q[i]);
    }
    int s = 0;
    while (s < s_total && policy[s] == a_total - 1) policy[s++] = 0;
    if (s == s_total) break;
    ++policy[s];
  }
  return best;
}

McEstimate mc_value(const LayeredMDP& mdp, const Policy& policy, long rollouts,
                    RngStream& rng) {
  if (rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  require_valid(mdp);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < rollouts; ++i) {
    Trajectory traj = sample_episode(mdp, policy, rng);
    double total = 0.0;
    for (const auto& step : traj.steps) total += step.reward;
    sum += total;
    sumsq += total * total;
  }
  McEstimate out;
  out.rollouts = rollouts;
  out.mean = sum / rollouts;
  const double var = std::max(0.0, sumsq / rollouts - out.mean * out.mean);
  out.std_error = rollouts > 1 ? std::sqrt(var / (rollouts - 1)) : 0.0;
  return out;
}

std::string DecompositionReport::str() const {
  std::string out = fmt("Reg(K) = %.6g vs weighted gaps %.6g: inequality %s",
                        regret_total, weighted_gap_total,
                        inequality_holds ? "holds" : "FAILS");
  if (identity_applicable) {
    out += fmt("; per-episode identity max error %.3g over %ld rows: %s",
               max_identity_error, identity_rows_checked,
               identity_holds ? "holds" : "FAILS");
  } else {
    out += "; identity not applicable (gaps outside the first layer)";
  }
  return out;
}

DecompositionReport check_regret_decomposition(const MultiTaskInstance& inst,
                                               const RegretLog& log) {
  const Shape shape = inst.tasks[0].shape();
  const int a_total = shape.num_actions;
  const int s1 = shape.layer_size(0);
  const int m = inst.num_players();
  if (log.num_players != m) {
    throw std::invalid_argument("log player count differs from instance");
  }
  if (log.num_states != shape.num_states()) {
    throw std::invalid_argument("log state count differs from instance");
  }

  const GapAnalysis analysis = analyze_gaps(inst);

  DecompositionReport rep;
  rep.regret_total = log.final_regret();
  for (int p = 0; p < m; ++p) {
    for (int s = 0; s < s1; ++s) {
      for (int a = 0; a < a_total; ++a) {
        const long n =
            log.final_counts[(static_cast<std::size_t>(p) * shape.num_states() + s) *
                             a_total + a];
        rep.weighted_gap_total += n * analysis.per_player[p].gap[s * a_total + a];
      }
    }
  }
  const double slack = 1e-9 * std::max(1.0, std::abs(rep.weighted_gap_total));
  rep.inequality_holds = rep.regret_total >= rep.weighted_gap_total - slack;

  rep.identity_applicable = true;
  for (int p = 0; p < m && rep.identity_applicable; ++p) {
    for (int s = s1; s < shape.num_states() && rep.identity_applicable; ++s) {
      for (int a = 0; a < a_total; ++a) {
        if (std::abs(analysis.per_player[p].gap[s * a_total + a]) > 1e-12) {
          rep.identity_applicable = false;
          break;
        }
      }
    }
  }

  if (rep.identity_applicable) {
    const std::vector<double>& p0 = inst.tasks[0].init_dist;
    rep.identity_holds = true;
    for (long k = 0; k < log.episodes; ++k) {
      for (int p = 0; p < m; ++p) {
        double expected = 0.0;
        for (int s = 0; s < s1; ++s) {
          expected += p0[s] * analysis.per_player[p].gap[s * a_total + log.policy_at(k, p, s)];
        }
        const double err = std::abs(log.regret_increment[log.row(k, p)] - expected);
        rep.max_identity_error = std::max(rep.max_identity_error, err);
        ++rep.identity_rows_checked;
      }
    }
    rep.identity_holds = rep.max_identity_error <= 1e-12;
  }
  return rep;
}

}  // namespace mtrl
