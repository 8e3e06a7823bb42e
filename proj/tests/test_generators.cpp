#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "mtrl/generators.hpp"
#include "mtrl/instance.hpp"
#include "mtrl/json_io.hpp"

using namespace mtrl;

namespace {

std::string dump(const MultiTaskInstance& inst) { return instance_to_json(inst).dump(); }

}  // namespace

TEST_CASE("random generator: shape, budget, determinism") {
  RandomInstanceConfig cfg;
  cfg.layer_width = 3;
  cfg.horizon = 3;
  cfg.num_actions = 2;
  cfg.num_players = 3;
  cfg.epsilon = 0.2;
  cfg.reward_scale = 0.9;
  cfg.seed = 11;

  const MultiTaskInstance inst = gen_random(cfg);
  REQUIRE(inst.num_players() == 3);
  CHECK(inst.tasks[0].num_states() == 9);
  CHECK(inst.declared_epsilon == 0.2);
  CHECK(validate(inst).ok());
  CHECK(measure_dissimilarity(inst).eps() <= 0.2 + 1e-12);
  // Per-player reward deviations stay within epsilon/2 of the scaled base.
  for (double r : inst.tasks[0].mean_reward) CHECK(r <= 0.9 + 0.1);

  CHECK(dump(gen_random(cfg)) == dump(inst));
  cfg.seed = 12;
  CHECK(dump(gen_random(cfg)) != dump(inst));
}

TEST_CASE("random generator: epsilon 0 copies the base task") {
  RandomInstanceConfig cfg;
  cfg.layer_width = 2;
  cfg.horizon = 2;
  cfg.num_actions = 3;
  cfg.num_players = 4;
  cfg.epsilon = 0.0;
  cfg.seed = 7;
  const MultiTaskInstance inst = gen_random(cfg);
  const auto base = mdp_to_json(inst.tasks[0]).dump();
  for (int p = 1; p < 4; ++p) CHECK(mdp_to_json(inst.tasks[p]).dump() == base);
  CHECK(measure_dissimilarity(inst).eps() == 0.0);
}

TEST_CASE("random generator rejects bad parameters by name") {
  RandomInstanceConfig cfg;
  cfg.layer_width = 0;
  CHECK_THROWS_WITH_AS(static_cast<void>(gen_random(cfg)),
                       "constraint violation: layer_width >= 1", std::invalid_argument);
}

TEST_CASE("gap-independent case 1: shared optimal arms and closed-form gaps") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapIndependentCase1;
  params.num_states = 32;
  params.num_actions = 24;
  params.horizon = 2;
  params.num_players = 2;
  params.episodes = 2000;
  params.subpar_target = 400;
  params.seed = 5;

  const HardInstanceResult hard = gen_gap_independent_hard(params);
  const MultiTaskInstance& inst = hard.instance;
  REQUIRE(inst.num_players() == 2);
  CHECK(validate(inst).ok());

  const int s1 = 32 - 2 * (2 - 1);
  const long per_state = (400 + s1 - 1) / s1;
  const long live = per_state + 1;
  CHECK(hard.subpar_lower_bound >= 400);
  CHECK(hard.delta == doctest::Approx(std::sqrt(401.0 / (384.0 * 2 * 2000))).epsilon(1e-9));
  CHECK(hard.epsilon == inst.declared_epsilon);

  // Identical players, so measured dissimilarity collapses to zero.
  CHECK(measure_dissimilarity(inst).eps() == 0.0);
  CHECK(mdp_to_json(inst.tasks[0]).dump() == mdp_to_json(inst.tasks[1]).dump());

  const GapAnalysis analysis = analyze_gaps(inst);
  REQUIRE(hard.favored_action.size() == 2);
  CHECK(hard.favored_action[0] == hard.favored_action[1]);
  for (int s = 0; s < s1; ++s) {
    const int fav = hard.favored_action[0][s];
    REQUIRE(fav < live);
    for (int a = 0; a < 24; ++a) {
      const double gap = analysis.per_player[0].at(s, a, 24);
      double want = 0.0;
      if (a != fav && a < live) want = hard.delta;
      if (a >= live) want = 0.5 + hard.delta;
      CHECK(std::abs(gap - want) <= 1e-12);
    }
  }
  // Chain states are action-indifferent.
  for (int s = s1; s < 32; ++s) {
    for (int a = 0; a < 24; ++a) CHECK(analysis.per_player[0].at(s, a, 24) == 0.0);
  }

  CHECK(subpar_set(inst, hard.epsilon / (192.0 * 2)).size() >= 400);
}

TEST_CASE("gap-independent case 2: per-player favored arms on the boundary") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapIndependentCase2;
  params.num_states = 16;
  params.num_actions = 12;
  params.horizon = 2;
  params.num_players = 3;
  params.episodes = 10000;
  params.subpar_target = 32;
  params.seed = 5;

  const HardInstanceResult hard = gen_gap_independent_hard(params);
  const MultiTaskInstance& inst = hard.instance;
  CHECK(validate(inst).ok());

  const int s1 = 16 - 2;
  const long per_state = (32 + s1 - 1) / s1;
  const long live = 12 - per_state;
  CHECK(hard.delta ==
        doctest::Approx(std::sqrt(live * s1 / (384.0 * 10000))).epsilon(1e-9));

  bool some_player_differs = false;
  for (int s = 0; s < s1 && !some_player_differs; ++s) {
    some_player_differs = hard.favored_action[0][s] != hard.favored_action[1][s] ||
                          hard.favored_action[0][s] != hard.favored_action[2][s];
  }
  REQUIRE(some_player_differs);
  // Favored arms differ, so the construction sits exactly on its declared budget.
  CHECK(measure_dissimilarity(inst).eps() == inst.declared_epsilon);

  const GapAnalysis analysis = analyze_gaps(inst);
  for (int p = 0; p < 3; ++p) {
    for (int s = 0; s < s1; ++s) {
      const int fav = hard.favored_action[p][s];
      REQUIRE(fav < live);
      for (int a = 0; a < 12; ++a) {
        const double gap = analysis.per_player[p].at(s, a, 12);
        double want = 0.0;
        if (a != fav && a < live) want = hard.delta;
        if (a >= live) want = 0.5 + hard.delta;
        CHECK(std::abs(gap - want) <= 1e-12);
      }
    }
  }
  CHECK(subpar_set(inst, hard.epsilon / (192.0 * 2)).size() >=
        static_cast<std::size_t>(32));
}

TEST_CASE("gap-independent generator rejects infeasible parameters by name") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapIndependentCase1;
  params.num_states = 32;
  params.num_actions = 24;
  params.horizon = 2;
  params.num_players = 2;
  params.episodes = 2000;
  params.subpar_target = 400;
  params.seed = 5;

  SUBCASE("episode budget") {
    params.episodes = 100;  // K < SA
    CHECK_THROWS_WITH_AS(static_cast<void>(gen_gap_independent_hard(params)),
                         "constraint violation: K >= SA (K=100, SA=768)",
                         std::invalid_argument);
  }
  SUBCASE("subpar target") {
    params.subpar_target = 449;  // > SA - 4(S + HA)
    CHECK_THROWS_AS(static_cast<void>(gen_gap_independent_hard(params)),
                    std::invalid_argument);
  }
  SUBCASE("state budget") {
    params.num_states = 7;  // < 4H
    CHECK_THROWS_AS(static_cast<void>(gen_gap_independent_hard(params)),
                    std::invalid_argument);
  }
}

TEST_CASE("gap-dependent construction realizes its Delta table") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapDependent;
  params.num_states = 4;
  params.num_actions = 2;
  params.horizon = 2;
  params.num_players = 2;
  params.epsilon = 0.02;
  // [s][a][p] flattened: zero action first.
  params.delta_table = {0.0, 0.0, 0.010, 0.011,   // s = 0
                        0.0, 0.0, 0.020, 0.021};  // s = 1

  const HardInstanceResult hard = gen_gap_dependent_hard(params);
  const MultiTaskInstance& inst = hard.instance;
  CHECK(validate(inst).ok());
  // Reported delta is the representable probability bump, not the raw entry.
  CHECK(hard.delta == (0.5 + 0.021) - 0.5);
  CHECK(hard.subpar_lower_bound == 0);

  const GapAnalysis analysis = analyze_gaps(inst);
  for (int p = 0; p < 2; ++p) {
    CHECK(hard.favored_action[p] == std::vector<int>{0, 0});
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const double want = params.delta_table[(s * 2 + a) * 2 + p];
        CHECK(std::abs(analysis.per_player[p].at(s, a, 2) - want) <= 1e-12);
      }
    }
    // Chain gaps vanish, which is what makes the regret identity exact.
    for (int s = 2; s < 4; ++s) {
      for (int a = 0; a < 2; ++a) CHECK(analysis.per_player[p].at(s, a, 2) == 0.0);
    }
  }
  CHECK(measure_dissimilarity(inst).eps() <= 0.02);
}

TEST_CASE("gap-dependent generator rejects bad tables by name") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapDependent;
  params.num_states = 4;
  params.num_actions = 2;
  params.horizon = 2;
  params.num_players = 2;
  params.epsilon = 0.02;
  params.delta_table = {0.0, 0.0, 0.010, 0.011, 0.0, 0.0, 0.020, 0.021};

  SUBCASE("delta above the cap") {
    params.delta_table[2] = 1.0;
    CHECK_THROWS_AS(static_cast<void>(gen_gap_dependent_hard(params)),
                    std::invalid_argument);
  }
  SUBCASE("missing zero entry") {
    params.delta_table[0] = 0.005;
    CHECK_THROWS_AS(static_cast<void>(gen_gap_dependent_hard(params)),
                    std::invalid_argument);
  }
  SUBCASE("players too far apart") {
    params.epsilon = 0.002;  // |0.021 - 0.020| > eps/4
    CHECK_THROWS_AS(static_cast<void>(gen_gap_dependent_hard(params)),
                    std::invalid_argument);
  }
  SUBCASE("table size") {
    params.delta_table.pop_back();
    CHECK_THROWS_AS(static_cast<void>(gen_gap_dependent_hard(params)),
                    std::invalid_argument);
  }
}
