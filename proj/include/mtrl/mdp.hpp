#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtrl/rng.hpp"

namespace mtrl {

enum class RewardKind { kBernoulli, kDeterministic };

/// Layer structure shared by every task of a multi-task instance.
struct Shape {
  int horizon = 0;                // H
  int num_actions = 0;            // A
  std::vector<int> layer_offset;  // size H+1; layer h = [offset[h], offset[h+1])

  int num_states() const { return layer_offset.empty() ? 0 : layer_offset.back(); }
  int layer_size(int h) const { return layer_offset[h + 1] - layer_offset[h]; }
  int layer_of(int s) const;
  // Column range of the successor layer for layer h; the last layer's
  // successor is the terminal column [S, S+1).
  int next_begin(int h) const {
    return h + 1 < horizon ? layer_offset[h + 1] : num_states();
  }
  int next_end(int h) const {
    return h + 2 <= horizon ? layer_offset[h + 2] : num_states() + 1;
  }
  int next_width(int h) const { return next_end(h) - next_begin(h); }

  bool operator==(const Shape&) const = default;
};

/**
 * Episodic MDP whose states are partitioned into layers S_1..S_H, with all
 * transitions from layer h supported on layer h+1 and the final layer feeding
 * a terminal state. States carry dense ids 0..S-1 in layer order; the
 * terminal state is id S. Transition rows span all S+1 columns so malformed
 * kernels stay representable and validate() can name the offending entries.
 */
struct LayeredMDP {
  int horizon = 0;
  std::vector<int> layer_offset;   // size H+1
  int num_actions = 0;
  std::vector<double> init_dist;   // size S, support in layer 0
  std::vector<double> transition;  // S*A rows of width S+1 (last column: terminal)
  std::vector<double> mean_reward; // S*A, values in [0, 1]
  RewardKind reward_kind = RewardKind::kBernoulli;

  int num_states() const { return layer_offset.empty() ? 0 : layer_offset.back(); }
  int terminal_state() const { return num_states(); }
  int row_width() const { return num_states() + 1; }
  Shape shape() const { return Shape{horizon, num_actions, layer_offset}; }

  std::span<const double> row(int s, int a) const {
    return {transition.data() + static_cast<std::size_t>(s * num_actions + a) * row_width(),
            static_cast<std::size_t>(row_width())};
  }
  std::span<double> row(int s, int a) {
    return {transition.data() + static_cast<std::size_t>(s * num_actions + a) * row_width(),
            static_cast<std::size_t>(row_width())};
  }
  double reward(int s, int a) const { return mean_reward[s * num_actions + a]; }

  /// Zeroed MDP of the given shape (rows all-zero: fill before use).
  static LayeredMDP blank(const Shape& shape);
};

using Policy = std::vector<int>;  // action per non-terminal state

struct ValueTables {
  std::vector<double> v;  // size S+1; v[S] = 0
  std::vector<double> q;  // S*A row-major

  double q_at(int s, int a, int num_actions) const { return q[s * num_actions + a]; }
};

struct Trajectory {
  struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
  };
  std::vector<Step> steps;  // exactly H steps; successor of the last is terminal
  long episode = 0;
  int player = 0;
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
  std::string str() const;
};

ValidationReport validate(const LayeredMDP& mdp);
/// Throws std::invalid_argument carrying the report if validation fails.
void require_valid(const LayeredMDP& mdp);

/// Bellman-optimal V*, Q* by backward induction (terminal value 0).
ValueTables optimal_values(const LayeredMDP& mdp);
/// Fixed-policy V^pi, Q^pi by backward induction.
ValueTables evaluate_policy(const LayeredMDP& mdp, const Policy& policy);
/// <p0, V^pi>.
double expected_return(const LayeredMDP& mdp, const Policy& policy);
/// <p0, vt.v>.
double initial_value(const LayeredMDP& mdp, const ValueTables& vt);

struct GapTable {
  std::vector<double> gap;         // S*A; gap(s,a) = V*(s) - Q*(s,a)
  std::optional<double> gap_min;   // smallest strictly positive gap, if any

  double at(int s, int a, int num_actions) const { return gap[s * num_actions + a]; }
};

GapTable gaps(const LayeredMDP& mdp);

/// Greedy policy from Q with argmax ties broken toward the smallest action id.
Policy greedy_policy(const LayeredMDP& mdp, const ValueTables& vt);

Trajectory sample_episode(const LayeredMDP& mdp, const Policy& policy, RngStream& rng);

}  // namespace mtrl
