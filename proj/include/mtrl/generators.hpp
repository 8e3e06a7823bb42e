#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtrl/instance.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

struct RandomInstanceConfig {
  int layer_width = 2;  // states per layer (all layers equal width)
  int horizon = 2;
  int num_actions = 2;
  int num_players = 2;
  double epsilon = 0.0;
  double reward_scale = 1.0;  // rewards drawn in [0, reward_scale], <= 1
  std::uint64_t seed = 0;
};

/**
 * Random instance: a base task with dense Dirichlet-like rows and uniform
 * rewards, plus per-player perturbations within half the dissimilarity
 * budget (|dR| <= eps/2, moved row mass <= eps/(4H)) so every pair of
 * players is eps-close. epsilon = 0 yields M identical copies.
 */
MultiTaskInstance gen_random(const RandomInstanceConfig& cfg, RngStream& rng);
MultiTaskInstance gen_random(const RandomInstanceConfig& cfg);

enum class HardVariant { kGapIndependentCase1, kGapIndependentCase2, kGapDependent };

struct HardInstanceParams {
  HardVariant variant = HardVariant::kGapDependent;
  int num_states = 0;   // S (total, includes the 2(H-1) chain states)
  int num_actions = 0;  // A
  int horizon = 0;      // H
  int num_players = 0;  // M
  long episodes = 0;    // K; calibrates Delta for the gap-independent cases
  long subpar_target = 0;  // l
  std::uint64_t seed = 0;  // draws the favored-action assignment
  // Gap-dependent case: Delta table, S1*A*M row-major (s-major, then a, then p),
  // and the declared epsilon the table was built for.
  std::vector<double> delta_table;
  double epsilon = 0.0;
};

struct HardInstanceResult {
  MultiTaskInstance instance;
  double delta = 0.0;    // realized probability bump (post-rounding)
  double epsilon = 0.0;  // declared dissimilarity (== instance.declared_epsilon)
  // Gap-independent cases: guaranteed |I_{eps/(192H)}| >= this (>= l); 0 for
  // the gap-dependent construction.
  long subpar_lower_bound = 0;
  // Optimal action per [player][layer-0 state] (the zero-Delta action for the
  // gap-dependent construction).
  std::vector<std::vector<int>> favored_action;
};

/**
 * Minimax (gap-independent) lower-bound instance. Case 1: all M players
 * identical, Delta = sqrt((l+1)/(384*M*K)), eps = H*Delta/2, favored arm among
 * b+1 = ceil(l/S1)+1 live arms per state. Case 2: per-player favored arms
 * among v = A - ceil(l/S1) live arms, Delta = sqrt(v*S1/(384*K)), eps =
 * 2*H*Delta. Rejects parameters violating the construction's preconditions,
 * naming the violated inequality.
 */
HardInstanceResult gen_gap_independent_hard(const HardInstanceParams& params);

/**
 * Gap-dependent lower-bound instance: two reward chains (good: reward 1 per
 * step, bad: reward 0) fed by zero-reward layer-0 states with
 * P(good | s, a) = 1/2 - Delta_{s,a,p}/(H-1), so gap_p(s,a) = Delta_{s,a,p}
 * exactly up to rounding. Rejects tables violating the Delta range
 * [0, H/(48*sqrt(M))], per-(s,p) existence of a zero entry, or cross-player
 * closeness |Delta_p - Delta_q| <= eps/4, naming the violated constraint.
 */
HardInstanceResult gen_gap_dependent_hard(const HardInstanceParams& params);

}  // namespace mtrl
