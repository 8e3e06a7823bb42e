// Acceptance gate: every release-blocking property, one line of verdict each.
// Exit status is the number of failing criteria (0 = accepted).

#include <chrono>
#include <cstdio>
#include <vector>

#include "mtrl/verification.hpp"

namespace {

struct Criterion {
  const char* id;
  mtrl::SuiteResult result;
  double seconds;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  auto timed = [&](const char* id, auto&& fn) {
    const double t0 = now_seconds();
    mtrl::SuiteResult r = fn();
    results.push_back({id, std::move(r), now_seconds() - t0});
  };

  timed("A1", [] { return mtrl::verify_oracle_suite(100); });
  timed("A2", [] { return mtrl::verify_lemma1_suite(200); });
  timed("A3", [] { return mtrl::verify_lemma2_suite(200); });
  timed("A4", [] { return mtrl::verify_construction_suite(50); });
  {
    const double t0 = now_seconds();
    const mtrl::BoundsSuiteOutcome bounds = mtrl::verify_bounds_suite(50, 2000, 5);
    const double dt = (now_seconds() - t0) / 2.0;
    results.push_back({"A5", bounds.validity, dt});
    results.push_back({"A6", bounds.optimism, dt});
  }
  {
    const double t0 = now_seconds();
    const mtrl::RegretTrendOutcome trend = mtrl::verify_regret_trend_suite(20000, 10);
    const double dt = (now_seconds() - t0) / 2.0;
    results.push_back({"A7", trend.sublinear, dt});
    results.push_back({"A8", trend.advantage, dt});
  }
  timed("A9", [] { return mtrl::verify_degeneracy_suite(300, 3); });
  timed("A10", [] { return mtrl::verify_decomposition_suite(500); });

  int failures = 0;
  for (const auto& c : results) {
    if (!c.result.passed) ++failures;
    std::printf("%-4s %-22s %s  %s  [%.1fs]\n", c.id, c.result.name.c_str(),
                c.result.passed ? "PASS" : "FAIL", c.result.detail.c_str(), c.seconds);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures;
}
