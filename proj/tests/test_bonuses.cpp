#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "hand_mdp.hpp"
#include "mtrl/bonuses.hpp"

using namespace mtrl;

namespace {

BonusContext make_ctx() {
  BonusContext ctx;
  ctx.cfg = BonusConfig::practical(0.1);
  ctx.num_players = 2;
  ctx.num_states = 4;
  ctx.num_actions = 2;
  ctx.horizon = 2;
  return ctx;
}

}  // namespace

TEST_CASE("log term floors at 1 and grows with n") {
  BonusContext ctx = make_ctx();
  CHECK(ctx.log_term(0) == ctx.log_term(1));
  CHECK(ctx.log_term(0) == doctest::Approx(std::log(16.0 / 0.1)));
  CHECK(ctx.log_term(100) > ctx.log_term(10));

  ctx.cfg.delta = 0.99;
  ctx.num_players = 1;
  ctx.num_states = 1;
  ctx.num_actions = 1;
  CHECK(ctx.log_term(1) == 1.0);
}

TEST_CASE("reward bonus: zero-count default, cap, decay") {
  const BonusContext ctx = make_ctx();
  CHECK(b_rw(ctx, 0, 0.0) == 1.0);
  CHECK(b_rw(ctx, 0, 0.7) == 1.0);
  CHECK(b_rw(ctx, 1, 0.0) == 1.0);  // sqrt(L(1)) > 1, capped

  const long n = 1000000;
  const double want = std::sqrt(ctx.log_term(n) / static_cast<double>(n));
  CHECK(b_rw(ctx, n, 0.0) == doctest::Approx(want));
  CHECK(b_rw(ctx, n, 0.2) == doctest::Approx(0.2 + want));
  CHECK(b_rw(ctx, n, 0.0) > b_rw(ctx, 4 * n, 0.0));
}

TEST_CASE("transition bonus against a three-point distribution") {
  const BonusContext ctx = make_ctx();
  const std::vector<double> q = {0.5, 0.3, 0.2};
  const std::vector<double> vu = {1.0, 0.0, 2.0};
  const std::vector<double> vl = {0.5, 0.0, 1.0};
  // Var_q[vu] = 1.3 - 0.81, E_q[(vu-vl)^2] = 0.5*0.25 + 0.2*1.
  const double var = 0.49;
  const double range2 = 0.325;

  CHECK(b_prob(ctx, q, 0, vu, vl, 0.0) == 2.0);
  CHECK(b_prob(ctx, q, 1, vu, vl, 0.0) == 2.0);  // far above the cap at n = 1

  const long n = 50;
  const double ln = ctx.log_term(n) / n;
  const double want =
      2.0 * 0.1 + std::sqrt(var * ln) + std::sqrt(range2 * ln) + 2.0 * ln;
  CHECK(b_prob(ctx, q, n, vu, vl, 0.1) == doctest::Approx(want).epsilon(1e-12));

  const std::vector<double> bad = {0.5, 0.5};
  CHECK_THROWS_AS(b_prob(ctx, bad, n, vu, vl, 0.0), std::invalid_argument);
}

TEST_CASE("transition bonus clamps inverted ranges and reports them") {
  const BonusContext ctx = make_ctx();
  const std::vector<double> q = {0.5, 0.5};
  const std::vector<double> vu = {1.0, 1.0};
  const std::vector<double> vl = {2.0, 0.0};  // first entry inverted
  BonusDiag diag;
  const long n = 50;
  const double ln = ctx.log_term(n) / n;
  const double want = std::sqrt(0.0 * ln) + std::sqrt(0.5 * 1.0 * ln) + 2.0 * ln;
  CHECK(b_prob(ctx, q, n, vu, vl, 0.0, &diag) == doctest::Approx(want).epsilon(1e-12));
  CHECK(diag.range_clips == 1);
}

TEST_CASE("structural bonus scales with the state count") {
  const BonusContext ctx = make_ctx();
  const std::vector<double> q = {0.5, 0.3, 0.2};
  const std::vector<double> vu = {1.0, 0.0, 2.0};
  const std::vector<double> vl = {0.5, 0.0, 1.0};
  CHECK(b_str(ctx, q, 0, vu, vl, 0.0) == 2.0);

  const long n = 5000;
  const double ln = ctx.log_term(n) / n;
  const double want = 0.1 + std::sqrt(4.0 * 0.325 * ln) + 2.0 * 4.0 * ln;
  CHECK(b_str(ctx, q, n, vu, vl, 0.1) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("assembled bonuses: aggregate equals individual when M = 1, kappa = 0") {
  const Shape shape = mtrl_test::make_hand_mdp().shape();
  ModelEstimates est(shape, 1);
  Trajectory t;
  t.player = 0;
  for (long e = 0; e < 6; ++e) {
    t.episode = e;
    t.steps = {{static_cast<int>(e % 2), 0, 0.5}, {2 + static_cast<int>(e % 2), 1, 1.0}};
    est.ingest(t);
  }

  BonusContext ctx = make_ctx();
  ctx.num_players = 1;
  const std::vector<double> vu = {1.0, 0.5};
  const std::vector<double> vl = {0.25, 0.0};
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      const double ind = ind_bonus(ctx, est, 0, s, a, vu, vl);
      CHECK(agg_bonus(ctx, est, s, a, 0.0, vu, vl) == ind);
      CHECK(agg_bonus(ctx, est, s, a, 0.3, vu, vl) >= ind);
    }
  }

  const std::vector<double> wrong = {1.0, 0.5, 0.0};
  CHECK_THROWS_AS(ind_bonus(ctx, est, 0, 0, 0, wrong, wrong), std::invalid_argument);
}
