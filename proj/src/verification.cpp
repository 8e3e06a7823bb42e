#include "mtrl/verification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "mtrl/detail/strfmt.hpp"
#include "mtrl/experiment.hpp"
#include "mtrl/generators.hpp"
#include "mtrl/oracle.hpp"

namespace mtrl {

using detail::fmt;
using nlohmann::json;

namespace {

void parallel_jobs(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<int>(thread_budget(), static_cast<int>(jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

// Small-MDP corpus for the oracle equivalence check: S <= 6, A <= 3, H <= 3.
LayeredMDP oracle_corpus_mdp(int i) {
  struct Combo {
    int width, horizon, actions;
  };
  static const Combo combos[] = {{1, 1, 2}, {2, 1, 3}, {1, 2, 2}, {2, 2, 3},
                                 {1, 3, 2}, {2, 3, 3}, {3, 2, 2}, {3, 1, 3},
                                 {2, 2, 2}, {2, 3, 2}};
  const Combo c = combos[i % 10];
  RandomInstanceConfig cfg;
  cfg.layer_width = c.width;
  cfg.horizon = c.horizon;
  cfg.num_actions = c.actions;
  cfg.num_players = 1;
  cfg.epsilon = 0.0;
  cfg.seed = 1000 + i;
  return gen_random(cfg).tasks[0];
}

// Dissimilar-instance corpus: eps in {0, 0.05, 0.2}, M in 2..5, S <= 12.
MultiTaskInstance lemma_corpus_instance(int i, double* eps_out) {
  static const double eps_grid[] = {0.0, 0.05, 0.2};
  struct Combo {
    int width, horizon;
  };
  static const Combo combos[] = {{2, 2}, {3, 2}, {4, 2}, {2, 3}, {3, 3}, {4, 3}};
  RandomInstanceConfig cfg;
  cfg.epsilon = eps_grid[i % 3];
  cfg.num_players = 2 + (i / 3) % 4;
  cfg.layer_width = combos[(i / 12) % 6].width;
  cfg.horizon = combos[(i / 12) % 6].horizon;
  cfg.num_actions = 2 + i % 2;
  cfg.seed = 5000 + i;
  *eps_out = cfg.epsilon;
  return gen_random(cfg);
}

}  // namespace

SuiteResult verify_oracle_suite(int num_instances) {
  SuiteResult result;
  result.name = "oracle";
  double max_diff = 0.0;
  int policy_mismatches = 0;

  for (int i = 0; i < num_instances; ++i) {
    const LayeredMDP mdp = oracle_corpus_mdp(i);
    const ValueTables dp = optimal_values(mdp);
    const ValueTables brute = brute_force_optimal(mdp);
    for (std::size_t x = 0; x < dp.v.size(); ++x) {
      max_diff = std::max(max_diff, std::abs(dp.v[x] - brute.v[x]));
    }
    for (std::size_t x = 0; x < dp.q.size(); ++x) {
      max_diff = std::max(max_diff, std::abs(dp.q[x] - brute.q[x]));
    }
    if (greedy_policy(mdp, dp) != greedy_policy(mdp, brute)) ++policy_mismatches;
  }

  result.passed = max_diff <= 1e-12 && policy_mismatches == 0;
  result.detail = fmt("%d instances, max |DP - enumeration| = %.3g, "
                      "policy mismatches %d",
                      num_instances, max_diff, policy_mismatches);
  result.data = {{"instances", num_instances},
                 {"max_abs_diff", max_diff},
                 {"policy_mismatches", policy_mismatches}};
  return result;
}

SuiteResult verify_lemma1_suite(int num_instances) {
  SuiteResult result;
  result.name = "lemma1";
  int failures = 0;
  double worst_q_margin = -std::numeric_limits<double>::infinity();
  double worst_gap_margin = worst_q_margin;

  for (int i = 0; i < num_instances; ++i) {
    double eps = 0.0;
    const MultiTaskInstance inst = lemma_corpus_instance(i, &eps);
    const Lemma1Report rep = verify_lemma1(inst, eps);
    if (!rep.passed) ++failures;
    worst_q_margin = std::max(worst_q_margin, rep.max_q_diff - rep.q_bound);
    worst_gap_margin = std::max(worst_gap_margin, rep.max_gap_diff - rep.gap_bound);
  }

  result.passed = failures == 0;
  result.detail = fmt("%d instances, failures %d, worst value margin %.3g, "
                      "worst gap margin %.3g",
                      num_instances, failures, worst_q_margin, worst_gap_margin);
  result.data = {{"instances", num_instances},
                 {"failures", failures},
                 {"worst_q_margin", worst_q_margin},
                 {"worst_gap_margin", worst_gap_margin}};
  return result;
}

SuiteResult verify_lemma2_suite(int num_instances) {
  SuiteResult result;
  result.name = "lemma2";
  int failures = 0;
  int nonvacuous = 0;
  long positivity = 0, ratio = 0;

  for (int i = 0; i < num_instances; ++i) {
    double eps = 0.0;
    const MultiTaskInstance inst = lemma_corpus_instance(i, &eps);
    const Lemma2Report rep = verify_lemma2(inst, eps);
    if (!rep.passed) ++failures;
    if (!rep.vacuous()) ++nonvacuous;
    positivity += rep.positivity_violations;
    ratio += rep.ratio_violations;
  }

  result.passed = failures == 0;
  result.detail = fmt("%d instances (%d with non-empty subpar sets), "
                      "positivity violations %ld, ratio violations %ld",
                      num_instances, nonvacuous, positivity, ratio);
  result.data = {{"instances", num_instances},
                 {"nonvacuous", nonvacuous},
                 {"positivity_violations", positivity},
                 {"ratio_violations", ratio}};
  return result;
}

namespace {

// Random feasible Delta table; zero action shared across players per state.
HardInstanceParams random_delta_params(int i) {
  static const double eps_grid[] = {0.02, 0.1, 0.3};
  HardInstanceParams params;
  params.variant = HardVariant::kGapDependent;
  params.horizon = 2 + i % 2;
  const int s1 = 2 + (i / 2) % 2;
  params.num_states = s1 + 2 * (params.horizon - 1);
  params.num_actions = 2 + (i / 4) % 2;
  params.num_players = 2 + (i / 8) % 2;
  params.epsilon = eps_grid[i % 3];
  params.seed = 300 + i;

  const double cap = params.horizon / (48.0 * std::sqrt(double(params.num_players)));
  const double span = std::min(cap / 2.0, params.epsilon / 8.0);
  RngStream rng = RngStream::derive(params.seed, {17});
  params.delta_table.assign(
      static_cast<std::size_t>(s1) * params.num_actions * params.num_players, 0.0);
  for (int s = 0; s < s1; ++s) {
    const int zero_a = static_cast<int>(rng.below(params.num_actions));
    for (int a = 0; a < params.num_actions; ++a) {
      const double base = rng.uniform(0.0, cap - span);
      for (int p = 0; p < params.num_players; ++p) {
        const double jitter = rng.uniform(0.0, span);
        if (a != zero_a) {
          params.delta_table[(static_cast<std::size_t>(s) * params.num_actions + a) *
                                 params.num_players + p] = base + jitter;
        }
      }
    }
  }
  return params;
}

struct FidelityCheck {
  double max_gap_err = 0.0;
  double max_deep_gap = 0.0;
  bool epsilon_ok = true;
};

FidelityCheck check_gap_fidelity(const HardInstanceResult& hard,
                                 const std::function<double(int, int, int)>& want) {
  FidelityCheck check;
  const MultiTaskInstance& inst = hard.instance;
  const Shape shape = inst.tasks[0].shape();
  const int s1 = shape.layer_size(0);
  const GapAnalysis analysis = analyze_gaps(inst);
  for (int p = 0; p < inst.num_players(); ++p) {
    for (int s = 0; s < shape.num_states(); ++s) {
      for (int a = 0; a < shape.num_actions; ++a) {
        const double got = analysis.per_player[p].gap[s * shape.num_actions + a];
        if (s < s1) {
          check.max_gap_err = std::max(check.max_gap_err, std::abs(got - want(p, s, a)));
        } else {
          check.max_deep_gap = std::max(check.max_deep_gap, std::abs(got));
        }
      }
    }
  }
  check.epsilon_ok =
      measure_dissimilarity(inst).eps() <= inst.declared_epsilon + 1e-12;
  return check;
}

}  // namespace

SuiteResult verify_construction_suite(int num_tables) {
  SuiteResult result;
  result.name = "construction";
  double max_err = 0.0;
  double max_deep = 0.0;
  int epsilon_failures = 0;

  for (int i = 0; i < num_tables; ++i) {
    const HardInstanceParams params = random_delta_params(i);
    const HardInstanceResult hard = gen_gap_dependent_hard(params);
    const int m = params.num_players;
    const int a_total = params.num_actions;
    const auto want = [&](int p, int s, int a) {
      return params.delta_table[(static_cast<std::size_t>(s) * a_total + a) * m + p];
    };
    const FidelityCheck check = check_gap_fidelity(hard, want);
    max_err = std::max(max_err, check.max_gap_err);
    max_deep = std::max(max_deep, check.max_deep_gap);
    if (!check.epsilon_ok) ++epsilon_failures;
  }

  // Closed-form checks for both minimax constructions.
  struct MinimaxCase {
    HardVariant variant;
    int s, a, h, m;
    long k, l;
  };
  static const MinimaxCase cases[] = {
      {HardVariant::kGapIndependentCase1, 32, 24, 2, 2, 2000, 400},
      {HardVariant::kGapIndependentCase1, 24, 16, 3, 2, 5000, 96},
      {HardVariant::kGapIndependentCase2, 16, 12, 2, 3, 10000, 32},
      {HardVariant::kGapIndependentCase2, 28, 20, 3, 2, 20000, 64},
  };
  double minimax_err = 0.0;
  double minimax_deep = 0.0;
  long subpar_shortfall = 0;
  for (const MinimaxCase& mc : cases) {
    HardInstanceParams params;
    params.variant = mc.variant;
    params.num_states = mc.s;
    params.num_actions = mc.a;
    params.horizon = mc.h;
    params.num_players = mc.m;
    params.episodes = mc.k;
    params.subpar_target = mc.l;
    params.seed = 7 + mc.s;
    const HardInstanceResult hard = gen_gap_independent_hard(params);

    const int s1 = mc.s - 2 * (mc.h - 1);
    const long per_state = (mc.l + s1 - 1) / s1;
    const long live = mc.variant == HardVariant::kGapIndependentCase1
                          ? per_state + 1
                          : mc.a - per_state;
    const double span = mc.h - 1.0;
    const auto want = [&](int p, int s, int a) {
      if (a == hard.favored_action[p][s]) return 0.0;
      if (a < live) return span * hard.delta;
      return span * (0.5 + hard.delta);
    };
    const FidelityCheck check = check_gap_fidelity(hard, want);
    minimax_err = std::max(minimax_err, check.max_gap_err);
    minimax_deep = std::max(minimax_deep, check.max_deep_gap);
    if (!check.epsilon_ok) ++epsilon_failures;

    const double probe = hard.epsilon / (192.0 * mc.h);
    const long subpar = static_cast<long>(subpar_set(hard.instance, probe).size());
    if (subpar < mc.l) subpar_shortfall += mc.l - subpar;
  }

  result.passed = max_err <= 1e-12 && minimax_err <= 1e-12 && max_deep <= 1e-12 &&
                  minimax_deep <= 1e-12 && epsilon_failures == 0 &&
                  subpar_shortfall == 0;
  result.detail = fmt("%d tables: max gap error %.3g; minimax cases: max gap error "
                      "%.3g, subpar shortfall %ld, dissimilarity failures %d",
                      num_tables, max_err, minimax_err, subpar_shortfall,
                      epsilon_failures);
  result.data = {{"tables", num_tables},
                 {"max_gap_error", max_err},
                 {"max_deep_layer_gap", std::max(max_deep, minimax_deep)},
                 {"minimax_max_gap_error", minimax_err},
                 {"subpar_shortfall", subpar_shortfall},
                 {"epsilon_failures", epsilon_failures}};
  return result;
}

BoundsSuiteOutcome verify_bounds_suite(int num_seeds, long episodes,
                                       int max_violating_runs) {
  RandomInstanceConfig icfg;
  icfg.layer_width = 4;
  icfg.horizon = 2;
  icfg.num_actions = 3;
  icfg.num_players = 3;
  icfg.epsilon = 0.05;
  icfg.seed = 20260819;
  const MultiTaskInstance inst = gen_random(icfg);

  std::vector<long> violations(num_seeds, 0);
  std::vector<double> min_surplus(num_seeds, 0.0);
  parallel_jobs(num_seeds, [&](std::size_t i) {
    LearnerConfig cfg;
    cfg.mode = LearnerMode::kMultitask;
    cfg.delta = 0.1;
    cfg.bonus = BonusConfig::theory(0.1);
    cfg.seed = i;
    const RegretLog log = run(inst, cfg, episodes);
    violations[i] = log.total_violations;
    min_surplus[i] = log.global_min_surplus;
  });

  int violating_runs = 0;
  double worst_surplus = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_seeds; ++i) {
    if (violations[i] > 0) ++violating_runs;
    if (violations[i] == 0) worst_surplus = std::min(worst_surplus, min_surplus[i]);
  }
  if (violating_runs == num_seeds) worst_surplus = 0.0;

  BoundsSuiteOutcome outcome;
  outcome.validity.name = "bounds";
  outcome.validity.passed = violating_runs <= max_violating_runs;
  outcome.validity.detail = fmt("%d/%d runs with confidence-bound violations "
                                "(allowed %d), %ld episodes each",
                                violating_runs, num_seeds, max_violating_runs,
                                episodes);
  outcome.validity.data = {{"seeds", num_seeds},
                           {"episodes", episodes},
                           {"violating_runs", violating_runs},
                           {"allowed", max_violating_runs}};

  outcome.optimism.name = "optimism";
  outcome.optimism.passed = worst_surplus >= -1e-9;
  outcome.optimism.detail = fmt("min surplus %.3g over non-violating runs "
                                "(threshold -1e-9)",
                                worst_surplus);
  outcome.optimism.data = {{"min_surplus", worst_surplus}};
  return outcome;
}

SuiteResult verify_decomposition_suite(long episodes) {
  SuiteResult result;
  result.name = "decomposition";

  // Deep-gap random instance: the count-weighted first-layer gaps undercount
  // regret, so the inequality has real slack.
  RandomInstanceConfig icfg;
  icfg.layer_width = 3;
  icfg.horizon = 3;
  icfg.num_actions = 2;
  icfg.num_players = 2;
  icfg.epsilon = 0.05;
  icfg.seed = 99;
  const MultiTaskInstance deep = gen_random(icfg);
  LearnerConfig cfg;
  cfg.seed = 1;
  const DecompositionReport deep_rep =
      check_regret_decomposition(deep, run(deep, cfg, episodes));

  // All-optimal instance: both sides must be exactly zero.
  Shape flat_shape;
  flat_shape.horizon = 2;
  flat_shape.num_actions = 2;
  flat_shape.layer_offset = {0, 2, 4};
  LayeredMDP flat = LayeredMDP::blank(flat_shape);
  flat.init_dist = {0.5, 0.5, 0.0, 0.0};
  for (int s = 0; s < 4; ++s) {
    const int h = s < 2 ? 0 : 1;
    for (int a = 0; a < 2; ++a) {
      flat.mean_reward[s * 2 + a] = 0.5;
      auto row = flat.row(s, a);
      if (h == 0) {
        row[2] = 0.5;
        row[3] = 0.5;
      } else {
        row[4] = 1.0;
      }
    }
  }
  MultiTaskInstance zero_gap;
  zero_gap.declared_epsilon = 0.0;
  zero_gap.tasks = {flat, flat};
  LearnerConfig zcfg;
  zcfg.seed = 2;
  const RegretLog zlog = run(zero_gap, zcfg, std::min(episodes, 100L));
  const DecompositionReport zero_rep = check_regret_decomposition(zero_gap, zlog);

  // Gap-dependent hard instance: gaps live only in the first layer, so each
  // increment must match the initial-distribution-weighted gap of the
  // episode's policy exactly.
  HardInstanceParams params;
  params.variant = HardVariant::kGapDependent;
  params.horizon = 2;
  params.num_states = 5;
  params.num_actions = 3;
  params.num_players = 2;
  params.epsilon = 0.02;
  const int s1 = 3, m = 2;
  params.delta_table.assign(static_cast<std::size_t>(s1) * 3 * m, 0.0);
  for (int s = 0; s < s1; ++s) {
    for (int p = 0; p < m; ++p) {
      params.delta_table[(static_cast<std::size_t>(s) * 3 + 1) * m + p] =
          0.010 + 0.002 * s + 0.001 * p;
      params.delta_table[(static_cast<std::size_t>(s) * 3 + 2) * m + p] =
          0.018 + 0.001 * p;
    }
  }
  const HardInstanceResult hard = gen_gap_dependent_hard(params);
  LearnerConfig hcfg;
  hcfg.seed = 3;
  const DecompositionReport hard_rep =
      check_regret_decomposition(hard.instance, run(hard.instance, hcfg, episodes));

  const bool zero_exact = zero_rep.regret_total == 0.0 &&
                          zero_rep.weighted_gap_total == 0.0;
  result.passed = deep_rep.inequality_holds && zero_rep.inequality_holds &&
                  zero_exact && hard_rep.identity_applicable &&
                  hard_rep.identity_holds;
  result.detail = fmt("deep-gap slack %.4g; zero-gap sides %.3g/%.3g; identity max "
                      "error %.3g over %ld rows",
                      deep_rep.regret_total - deep_rep.weighted_gap_total,
                      zero_rep.regret_total, zero_rep.weighted_gap_total,
                      hard_rep.max_identity_error, hard_rep.identity_rows_checked);
  result.data = {{"deep_regret", deep_rep.regret_total},
                 {"deep_weighted_gaps", deep_rep.weighted_gap_total},
                 {"zero_regret", zero_rep.regret_total},
                 {"identity_max_error", hard_rep.max_identity_error},
                 {"identity_rows", hard_rep.identity_rows_checked}};
  return result;
}

SuiteResult verify_degeneracy_suite(long episodes, int num_seeds) {
  RandomInstanceConfig icfg;
  icfg.layer_width = 3;
  icfg.horizon = 2;
  icfg.num_actions = 3;
  icfg.num_players = 1;
  icfg.epsilon = 0.0;
  icfg.seed = 42;
  const MultiTaskInstance inst = gen_random(icfg);

  SuiteResult result;
  result.name = "degeneracy";
  int mismatched_seeds = 0;
  for (int seed = 0; seed < num_seeds; ++seed) {
    LearnerConfig multi;
    multi.mode = LearnerMode::kMultitask;
    multi.seed = seed;
    LearnerConfig solo = multi;
    solo.mode = LearnerMode::kIndividualBaseline;
    const RegretLog a = run(inst, multi, episodes);
    const RegretLog b = run(inst, solo, episodes);
    if (a.policies != b.policies) ++mismatched_seeds;
  }
  result.passed = mismatched_seeds == 0;
  result.detail = fmt("%d seeds x %ld episodes, policy-sequence mismatches: %d",
                      num_seeds, episodes, mismatched_seeds);
  result.data = {{"seeds", num_seeds},
                 {"episodes", episodes},
                 {"mismatched_seeds", mismatched_seeds}};
  return result;
}

RegretTrendOutcome verify_regret_trend_suite(long episodes, int num_seeds) {
  RandomInstanceConfig icfg;
  icfg.layer_width = 6;
  icfg.horizon = 2;
  icfg.num_actions = 4;
  icfg.num_players = 10;
  icfg.epsilon = 0.0;
  icfg.seed = 777;
  const MultiTaskInstance inst = gen_random(icfg);

  const long early = std::max(1L, episodes / 5);
  // Job layout: [0, num_seeds) multitask, [num_seeds, 2*num_seeds) individual.
  std::vector<double> at_early(2 * num_seeds, 0.0), at_full(2 * num_seeds, 0.0);
  parallel_jobs(static_cast<std::size_t>(2 * num_seeds), [&](std::size_t i) {
    LearnerConfig cfg;
    cfg.mode = i < static_cast<std::size_t>(num_seeds) ? LearnerMode::kMultitask
                                                       : LearnerMode::kIndividualBaseline;
    cfg.seed = i % num_seeds;
    const RegretLog log = run(inst, cfg, episodes);
    at_early[i] = log.cum_at(early - 1);
    at_full[i] = log.cum_at(episodes - 1);
  });

  double multi_early = 0.0, multi_full = 0.0, solo_full = 0.0;
  for (int s = 0; s < num_seeds; ++s) {
    multi_early += at_early[s] / num_seeds;
    multi_full += at_full[s] / num_seeds;
    solo_full += at_full[num_seeds + s] / num_seeds;
  }

  RegretTrendOutcome outcome;
  outcome.sublinear.name = "trend";
  outcome.sublinear.passed = multi_full < 4.0 * multi_early;
  outcome.sublinear.detail = fmt("mean regret %.4g at %ld vs %.4g at %ld "
                                 "(ratio %.3g, linear would be %.3g)",
                                 multi_full, episodes, multi_early, early,
                                 multi_early > 0 ? multi_full / multi_early : 0.0,
                                 static_cast<double>(episodes) / early);
  outcome.sublinear.data = {{"at_early", multi_early},
                            {"at_full", multi_full},
                            {"episodes", episodes},
                            {"early", early}};

  outcome.advantage.name = "advantage";
  outcome.advantage.passed = multi_full <= 0.8 * solo_full;
  outcome.advantage.detail = fmt("multitask %.4g vs individual %.4g at %ld "
                                 "(ratio %.3g, threshold 0.8)",
                                 multi_full, solo_full, episodes,
                                 solo_full > 0 ? multi_full / solo_full : 0.0);
  outcome.advantage.data = {{"multitask", multi_full},
                            {"individual", solo_full},
                            {"ratio", solo_full > 0 ? multi_full / solo_full : 0.0}};
  return outcome;
}

}  // namespace mtrl
