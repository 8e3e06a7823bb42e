#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtrl/mdp.hpp"

namespace mtrl {

/// M tasks sharing (layers, actions, initial distribution) plus the
/// dissimilarity bound the designer claims for them.
struct MultiTaskInstance {
  std::vector<LayeredMDP> tasks;
  double declared_epsilon = 0.0;

  int num_players() const { return static_cast<int>(tasks.size()); }
  const LayeredMDP& task(int p) const { return tasks[p]; }
};

/// Per-task validation, shared-(S,A,H,p0) checks, and the dissimilarity
/// bounds against declared_epsilon (1e-12 absolute slack for generators that
/// sit exactly on the boundary).
ValidationReport validate(const MultiTaskInstance& inst);
void require_valid(const MultiTaskInstance& inst);

struct Dissimilarity {
  double eps_reward = 0.0;      // max |R_p - R_q| over players and pairs
  double eps_transition = 0.0;  // H * max L1 row distance
  double eps() const { return eps_reward > eps_transition ? eps_reward : eps_transition; }
  // witnesses of the two maxima: (p, q, s, a)
  int reward_arg[4] = {0, 0, 0, 0};
  int transition_arg[4] = {0, 0, 0, 0};
};

/// Smallest eps for which the instance is eps-dissimilar.
Dissimilarity measure_dissimilarity(const MultiTaskInstance& inst);

struct GapAnalysis {
  std::vector<GapTable> per_player;
  std::optional<double> gap_min;  // smallest strictly positive gap across players

  /// Optimal (zero-gap) pairs of player p, sorted.
  std::vector<std::pair<int, int>> z_opt(int p, int num_actions) const;
};

GapAnalysis analyze_gaps(const MultiTaskInstance& inst);

/// (s,a) pairs with gap_p(s,a) > 96*H*eps for some player, sorted.
std::vector<std::pair<int, int>> subpar_set(const MultiTaskInstance& inst, double eps);

struct Lemma1Report {
  bool passed = false;
  double max_q_diff = 0.0;    // attained max |Q*_p - Q*_q|
  double q_bound = 0.0;       // 2*H*eps
  double max_gap_diff = 0.0;  // attained max |gap_p - gap_q|
  double gap_bound = 0.0;     // 4*H*eps
  int q_arg[4] = {0, 0, 0, 0};
  int gap_arg[4] = {0, 0, 0, 0};
  std::string str() const;
};

/// Checks |Q*_p - Q*_q| <= 2*H*eps and |gap_p - gap_q| <= 4*H*eps for all
/// player pairs and (s,a), with tolerance 1e-9 on the comparisons.
Lemma1Report verify_lemma1(const MultiTaskInstance& inst, double eps);

struct Lemma2Report {
  bool passed = false;
  std::size_t subpar_count = 0;
  double min_gap_on_subpar = 0.0;  // min over players and subpar pairs
  double worst_ratio = 0.0;        // max over subpar (s,a), p, q of gap_q / gap_p
  int positivity_violations = 0;   // subpar pairs with some gap_p <= 0
  int ratio_violations = 0;        // subpar pairs with gap_p < gap_q / 2
  std::string str() const;
  bool vacuous() const { return subpar_count == 0; }
};

/// On the subpar set of eps: every player's gap is > 0 and
/// gap_p >= gap_q / 2 for all pairs (tolerance 1e-9).
Lemma2Report verify_lemma2(const MultiTaskInstance& inst, double eps);

}  // namespace mtrl
