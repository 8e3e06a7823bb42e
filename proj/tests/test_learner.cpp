#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "hand_mdp.hpp"
#include "mtrl/generators.hpp"
#include "mtrl/learner.hpp"

using namespace mtrl;
using mtrl_test::make_hand_instance;

TEST_CASE("clip keeps values at or above the threshold") {
  CHECK(clip(5.0, 2.0) == 5.0);
  CHECK(clip(2.0, 2.0) == 2.0);
  CHECK(clip(1.9, 2.0) == 0.0);
  CHECK(clip(-1.0, 0.5) == 0.0);
}

TEST_CASE("config names resolve to the mode") {
  LearnerConfig cfg;
  CHECK(cfg.resolved_name() == "multitask");
  cfg.mode = LearnerMode::kIndividualBaseline;
  CHECK(cfg.resolved_name() == "individual");
  cfg.name = "tuned";
  CHECK(cfg.resolved_name() == "tuned");
}

TEST_CASE("value iteration on empty estimates hits the reach caps") {
  const MultiTaskInstance inst = make_hand_instance(1);
  ModelEstimates est(inst.tasks[0].shape(), 1);
  LearnerConfig cfg;
  cfg.epsilon_input = 0.0;

  Policy policy;
  const ValueBounds vb = optimistic_value_iteration(est, 0, cfg, &policy);
  CHECK(vb.episode == 0);
  CHECK(vb.range_crossings == 0);
  for (int a = 0; a < 2; ++a) {
    CHECK(vb.q_upper[0 * 2 + a] == 2.0);
    CHECK(vb.q_upper[1 * 2 + a] == 2.0);
    CHECK(vb.q_upper[2 * 2 + a] == 1.0);
    CHECK(vb.q_upper[3 * 2 + a] == 1.0);
  }
  for (double q : vb.q_lower) CHECK(q == 0.0);
  CHECK(vb.v_upper == std::vector<double>{2.0, 2.0, 1.0, 1.0, 0.0});
  CHECK(vb.v_lower == std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0});
  CHECK(policy == Policy{0, 0, 0, 0});  // all ties resolve to action 0

  // Surplus at the cap is exact: cap - R - <P, v_upper>.
  CHECK(surplus(inst, 0, vb, 0, 0) == 0.5);
  CHECK(surplus(inst, 0, vb, 0, 1) == 0.75);
  CHECK(surplus(inst, 0, vb, 2, 0) == 0.0);
}

TEST_CASE("value iteration requires a resolved epsilon and a barrier") {
  const MultiTaskInstance inst = make_hand_instance(2);
  ModelEstimates est(inst.tasks[0].shape(), 2);
  LearnerConfig cfg;
  CHECK_THROWS_AS(optimistic_value_iteration(est, 0, cfg), std::invalid_argument);

  cfg.epsilon_input = 0.0;
  CHECK_THROWS_AS(optimistic_value_iteration(est, 5, cfg), std::invalid_argument);

  Trajectory t;
  t.player = 0;
  t.episode = 0;
  t.steps = {{0, 0, 0.5}, {2, 0, 1.0}};
  est.ingest(t);
  CHECK_THROWS_AS(optimistic_value_iteration(est, 0, cfg), std::logic_error);
}

TEST_CASE("run keeps exact books") {
  RandomInstanceConfig gen;
  gen.layer_width = 2;
  gen.horizon = 2;
  gen.num_actions = 2;
  gen.num_players = 2;
  gen.epsilon = 0.1;
  gen.seed = 3;
  const MultiTaskInstance inst = gen_random(gen);

  LearnerConfig cfg;
  cfg.seed = 17;
  const long episodes = 50;
  const RegretLog log = run(inst, cfg, episodes);

  REQUIRE(log.episodes == episodes);
  REQUIRE(log.num_players == 2);
  REQUIRE(log.regret_increment.size() == 100);
  REQUIRE(log.policies.size() == 100 * 4);
  REQUIRE(log.final_counts.size() == 2 * 4 * 2);

  double cum = 0.0;
  for (std::size_t r = 0; r < log.cum_collective.size(); ++r) {
    CHECK(log.regret_increment[r] >= -1e-12);
    cum += log.regret_increment[r];
    CHECK(log.cum_collective[r] == cum);
    CHECK(log.realized_return[r] >= 0.0);
    CHECK(log.realized_return[r] <= 2.0);
  }
  CHECK(log.final_regret() == cum);
  CHECK(log.cum_at(episodes - 1) == cum);

  // Every episode visits exactly one layer-0 pair and one layer-1 pair.
  for (int p = 0; p < 2; ++p) {
    long layer0 = 0, layer1 = 0;
    for (int a = 0; a < 2; ++a) {
      layer0 += log.final_counts[(p * 4 + 0) * 2 + a];
      layer0 += log.final_counts[(p * 4 + 1) * 2 + a];
      layer1 += log.final_counts[(p * 4 + 2) * 2 + a];
      layer1 += log.final_counts[(p * 4 + 3) * 2 + a];
    }
    CHECK(layer0 == episodes);
    CHECK(layer1 == episodes);
  }
  for (int v : log.violations) CHECK(v >= 0);
  for (std::size_t i = 0; i < log.policies.size(); ++i) {
    CHECK(log.policies[i] >= 0);
    CHECK(log.policies[i] < 2);
  }
}

TEST_CASE("theory preset keeps the confidence bounds on a pinned run") {
  RandomInstanceConfig gen;
  gen.layer_width = 2;
  gen.horizon = 2;
  gen.num_actions = 2;
  gen.num_players = 2;
  gen.epsilon = 0.05;
  gen.seed = 8;
  const MultiTaskInstance inst = gen_random(gen);

  LearnerConfig cfg;
  cfg.bonus = BonusConfig::theory();
  cfg.seed = 1;
  const RegretLog log = run(inst, cfg, 200);
  CHECK(log.total_violations == 0);
  CHECK(log.global_min_surplus >= -1e-9);
  CHECK(log.range_crossings == 0);
}

TEST_CASE("runs are deterministic in the seed") {
  RandomInstanceConfig gen;
  gen.layer_width = 2;
  gen.horizon = 2;
  gen.num_actions = 3;
  gen.num_players = 2;
  gen.epsilon = 0.1;
  gen.seed = 4;
  const MultiTaskInstance inst = gen_random(gen);

  LearnerConfig cfg;
  cfg.seed = 9;
  const RegretLog a = run(inst, cfg, 40);
  const RegretLog b = run(inst, cfg, 40);
  CHECK(a.cum_collective == b.cum_collective);
  CHECK(a.policies == b.policies);
  CHECK(a.min_surplus == b.min_surplus);

  cfg.seed = 10;
  const RegretLog c = run(inst, cfg, 40);
  CHECK(a.realized_return != c.realized_return);
}

TEST_CASE("single player with epsilon 0: modes coincide") {
  RandomInstanceConfig gen;
  gen.layer_width = 2;
  gen.horizon = 3;
  gen.num_actions = 2;
  gen.num_players = 1;
  gen.epsilon = 0.0;
  gen.seed = 6;
  const MultiTaskInstance inst = gen_random(gen);

  LearnerConfig multi;
  multi.seed = 2;
  LearnerConfig solo = multi;
  solo.mode = LearnerMode::kIndividualBaseline;

  const RegretLog a = run(inst, multi, 30);
  const RegretLog b = run(inst, solo, 30);
  CHECK(a.policies == b.policies);
  CHECK(a.cum_collective == b.cum_collective);
}

TEST_CASE("run rejects negative episode counts") {
  const MultiTaskInstance inst = make_hand_instance(1);
  LearnerConfig cfg;
  CHECK_THROWS_AS(run(inst, cfg, -1), std::invalid_argument);
  const RegretLog log = run(inst, cfg, 0);
  CHECK(log.final_regret() == 0.0);
  CHECK(log.global_min_surplus == 0.0);
}
