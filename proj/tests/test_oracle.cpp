#include <cmath>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "hand_mdp.hpp"
#include "mtrl/generators.hpp"
#include "mtrl/oracle.hpp"

using namespace mtrl;
using mtrl_test::make_hand_instance;
using mtrl_test::make_hand_mdp;

TEST_CASE("policy enumeration reproduces backward induction exactly") {
  const LayeredMDP mdp = make_hand_mdp();
  const ValueTables dp = optimal_values(mdp);
  const ValueTables brute = brute_force_optimal(mdp);
  CHECK(dp.v == brute.v);
  CHECK(dp.q == brute.q);
}

TEST_CASE("policy enumeration tracks backward induction on random models") {
  for (int i = 0; i < 5; ++i) {
    RandomInstanceConfig cfg;
    cfg.layer_width = 2;
    cfg.horizon = 3;
    cfg.num_actions = 2;
    cfg.num_players = 1;
    cfg.epsilon = 0.0;
    cfg.seed = 100 + i;
    const LayeredMDP mdp = gen_random(cfg).tasks[0];
    const ValueTables dp = optimal_values(mdp);
    const ValueTables brute = brute_force_optimal(mdp);
    for (std::size_t j = 0; j < dp.v.size(); ++j) {
      CHECK(std::abs(dp.v[j] - brute.v[j]) <= 1e-12);
    }
    for (std::size_t j = 0; j < dp.q.size(); ++j) {
      CHECK(std::abs(dp.q[j] - brute.q[j]) <= 1e-12);
    }
  }
}

TEST_CASE("enumeration budget is enforced") {
  const LayeredMDP mdp = make_hand_mdp();  // 2^4 = 16 policies
  OracleBudget budget;
  budget.max_policies = 15;
  CHECK_THROWS_WITH_AS(static_cast<void>(brute_force_optimal(mdp, budget)),
                       doctest::Contains("enumeration budget exceeded"),
                       std::invalid_argument);
}

TEST_CASE("monte carlo agrees with the evaluator") {
  LayeredMDP mdp = make_hand_mdp();
  const Policy pi = {0, 1, 0, 1};

  SUBCASE("stochastic transitions") {
    RngStream rng = RngStream::derive(12, {0});
    const McEstimate est = mc_value(mdp, pi, 20000, rng);
    CHECK(est.rollouts == 20000);
    CHECK(est.std_error > 0.0);
    CHECK(std::abs(est.mean - 1.53125) < 5.0 * est.std_error + 1e-9);
  }
  SUBCASE("deterministic chain has zero spread") {
    // Collapse all stochasticity: one successor per row.
    auto r00 = mdp.row(0, 0);
    r00[2] = 1.0;
    r00[3] = 0.0;
    auto r11 = mdp.row(1, 1);
    r11[2] = 1.0;
    r11[3] = 0.0;
    mdp.init_dist = {1.0, 0.0, 0.0, 0.0};
    RngStream rng = RngStream::derive(13, {0});
    const McEstimate est = mc_value(mdp, pi, 50, rng);
    CHECK(est.std_error == 0.0);
    CHECK(est.mean == expected_return(mdp, pi));
  }
  SUBCASE("rollout count is validated") {
    RngStream rng = RngStream::derive(14, {0});
    CHECK_THROWS_AS(static_cast<void>(mc_value(mdp, pi, 0, rng)), std::invalid_argument);
  }
}

TEST_CASE("regret decomposition on a zero-gap instance is exact") {
  MultiTaskInstance inst = make_hand_instance(2);
  for (auto& task : inst.tasks) {
    task.mean_reward.assign(task.mean_reward.size(), 0.5);
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        auto row = task.row(s, a);
        row[2] = 0.5;
        row[3] = 0.5;
      }
    }
  }
  LearnerConfig cfg;
  cfg.seed = 21;
  const RegretLog log = run(inst, cfg, 25);
  const DecompositionReport rep = check_regret_decomposition(inst, log);
  CHECK(rep.regret_total == 0.0);
  CHECK(rep.weighted_gap_total == 0.0);
  CHECK(rep.inequality_holds);
  CHECK(rep.identity_applicable);
  CHECK(rep.identity_holds);
  CHECK(rep.max_identity_error == 0.0);
  CHECK(rep.identity_rows_checked == 50);
  CHECK_FALSE(rep.str().empty());
}

TEST_CASE("regret decomposition identity on a gap-dependent instance") {
  HardInstanceParams params;
  params.variant = HardVariant::kGapDependent;
  params.num_states = 5;
  params.num_actions = 3;
  params.horizon = 2;
  params.num_players = 2;
  params.epsilon = 0.02;
  // s-major [s][a][p]: a zero action plus two bumped arms per state.
  params.delta_table = {0.0, 0.0, 0.010, 0.012, 0.020, 0.022,
                        0.0, 0.0, 0.015, 0.014, 0.025, 0.024,
                        0.0, 0.0, 0.028, 0.029, 0.011, 0.013};
  const HardInstanceResult hard = gen_gap_dependent_hard(params);

  LearnerConfig cfg;
  cfg.seed = 5;
  const RegretLog log = run(hard.instance, cfg, 120);
  const DecompositionReport rep = check_regret_decomposition(hard.instance, log);
  CHECK(rep.identity_applicable);
  CHECK(rep.identity_holds);
  CHECK(rep.max_identity_error <= 1e-12);
  CHECK(rep.inequality_holds);
  CHECK(rep.regret_total >= rep.weighted_gap_total - 1e-9);
}

TEST_CASE("decomposition rejects mismatched logs") {
  const MultiTaskInstance inst = make_hand_instance(2);
  LearnerConfig cfg;
  const RegretLog log = run(inst, cfg, 5);
  const MultiTaskInstance other = make_hand_instance(3);
  CHECK_THROWS_AS(static_cast<void>(check_regret_decomposition(other, log)),
                  std::invalid_argument);
}
