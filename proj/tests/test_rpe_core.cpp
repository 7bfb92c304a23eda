#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <cmath>
#include <numbers>

#include "rpe/random.hpp"
#include "rpe/rpe_core.hpp"

using namespace rpe;
using std::numbers::pi;

namespace {

// Exact counts with a constant additive offset on each probability, clamped.
std::vector<StepCounts> offset_counts(double theta, int max_exponent, double dx, double dy) {
  std::vector<StepCounts> out;
  for (int j = 1; j <= max_exponent + 1; ++j) {
    const std::uint64_t n = std::uint64_t{1} << (j - 1);
    const double px = std::clamp(ideal_px(theta, n) + dx, 0.0, 1.0);
    const double py = std::clamp(ideal_py(theta, n) + dy, 0.0, 1.0);
    out.push_back({px, py, 1.0});
  }
  return out;
}

}  // namespace

TEST_SUITE("rpe_core") {

TEST_CASE("step angle examples") {
  CHECK(step_angle({16, 32, 32}).angle == doctest::Approx(pi / 2));
  CHECK(step_angle({32, 16, 32}).angle == doctest::Approx(pi));
  const StepAngle degenerate = step_angle({16, 16, 32});
  CHECK(degenerate.angle == 0.0);
  CHECK(degenerate.degenerate);
  CHECK_FALSE(step_angle({16, 32, 32}).degenerate);
}

TEST_CASE("refine examples") {
  CHECK(refine(pi / 2, pi, 2) == doctest::Approx(pi / 2));
  CHECK(std::fabs(refine(1.0, 8.0 - 2 * pi, 4) - 1.0) <= 1e-12);
  // pi/2 and 3*pi/2 are equidistant from 0; the positive side wins
  CHECK(refine(0.0, pi, 2) == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(refine(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("is_success examples") {
  CHECK(claimed_half_width(7) == doctest::Approx(0.01227184630308513).epsilon(1e-15));
  CHECK(is_success(pi / 2 + 0.01, pi / 2, 7));
  CHECK_FALSE(is_success(pi / 2 + pi / 128, pi / 2, 7));
  for (int l = 0; l < 20; ++l) CHECK(is_success(pi / 2, pi / 2, l));
  // distances are circular
  CHECK(is_success(2 * pi - 0.001, 0.001, 7));
}

TEST_CASE("estimate on exact counts") {
  const RpeResult a = estimate(expected_counts(pi / 2, 7, 32));
  CHECK(std::fabs(a.theta_est - pi / 2) <= 1e-9);
  CHECK(a.steps.size() == 8);
  CHECK(a.steps.back().repetitions == 128);
  CHECK(a.half_width == doctest::Approx(pi / 256));

  const RpeResult b = estimate(expected_counts(1.0, 7, 32));
  CHECK(std::fabs(b.theta_est - 1.0) <= 1e-9);
}

TEST_CASE("estimate rejects malformed input") {
  CHECK_THROWS_AS(estimate(std::vector<StepCounts>{}), std::invalid_argument);
  CHECK_THROWS_AS(estimate(std::vector<StepCounts>{{33, 0, 32}}), std::invalid_argument);
  CHECK_THROWS_AS(estimate(std::vector<StepCounts>{{0, -1, 32}}), std::invalid_argument);
  std::vector<IndexedCounts> gap{{1, {16, 32, 32}}, {3, {16, 32, 32}}};
  CHECK_THROWS_AS(estimate(std::span<const IndexedCounts>(gap)), std::invalid_argument);
}

TEST_CASE("degenerate counts are flagged, or rejected in strict mode") {
  const std::vector<StepCounts> counts{{16, 32, 32}, {16, 16, 32}};
  const RpeResult r = estimate(counts);
  CHECK(r.degenerate_steps == std::vector<int>{2});
  CHECK_THROWS_AS(estimate(counts, DegenerateMode::Strict), DegenerateCountsError);
}

TEST_CASE("property: exactness at infinite statistics") {
  RandomStream rng({31, 0, 0, 0});
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = 0.1 + rng.uniform() * (2 * pi - 0.2);
    const RpeResult r = estimate(expected_counts(theta, 10, 1.0));
    worst = std::max(worst, circular_distance(r.theta_est, theta));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("property: contraction between generations") {
  RandomStream rng({32, 0, 0, 0});
  for (int i = 0; i < 300; ++i) {
    std::vector<StepCounts> counts;
    for (int j = 1; j <= 9; ++j) {
      counts.push_back({std::floor(rng.uniform() * 33), std::floor(rng.uniform() * 33), 32});
    }
    const RpeResult r = estimate(counts);
    for (std::size_t j = 1; j < r.steps.size(); ++j) {
      const double n = static_cast<double>(r.steps[j].repetitions);
      REQUIRE(circular_distance(r.steps[j].theta_hat, r.steps[j - 1].theta_hat) <= pi / n + 1e-12);
      REQUIRE(r.steps[j].generation == r.steps[j - 1].generation + 1);
    }
    CHECK(r.theta_est == r.steps.back().theta_hat);
  }
}

TEST_CASE("property: candidate count and spacing") {
  RandomStream rng({33, 0, 0, 0});
  for (int j = 1; j <= 10; ++j) {
    const double raw = rng.uniform() * 2 * pi;
    const auto c = refine_candidates(raw, j);
    const std::size_t n = std::size_t{1} << (j - 1);
    REQUIRE(c.size() == n);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(c[k] >= 0.0);
      CHECK(c[k] < 2 * pi);
      if (k > 0) CHECK(c[k] - c[k - 1] == doctest::Approx(2 * pi / static_cast<double>(n)));
    }
    // refine returns one of the candidates
    const double prev = rng.uniform() * 2 * pi;
    const double r = refine(prev, raw, j);
    double nearest = 10.0;
    for (double x : c) nearest = std::min(nearest, circular_distance(x, r));
    CHECK(nearest <= 1e-12);
  }
}

TEST_CASE("property: robustness inside the bound") {
  RandomStream rng({34, 0, 0, 0});
  int failures = 0;
  for (int i = 0; i < 200; ++i) {
    const double theta = rng.uniform() * 2 * pi;
    // half the patterns sit on the corners of the |delta| <= 0.30 box
    double dx = (2 * rng.uniform() - 1) * 0.30;
    double dy = (2 * rng.uniform() - 1) * 0.30;
    if (i % 2 == 0) {
      dx = dx < 0 ? -0.30 : 0.30;
      dy = dy < 0 ? -0.30 : 0.30;
    }
    for (int l : {7, 10}) {
      const RpeResult r = estimate(offset_counts(theta, l, dx, dy));
      if (!is_success(r.theta_est, theta, l)) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("property: estimate is deterministic") {
  RandomStream rng({35, 0, 0, 0});
  std::vector<StepCounts> counts;
  for (int j = 1; j <= 8; ++j) counts.push_back({std::floor(rng.uniform() * 33), std::floor(rng.uniform() * 33), 32});
  const RpeResult a = estimate(counts);
  const RpeResult b = estimate(counts);
  CHECK(std::memcmp(&a.theta_est, &b.theta_est, sizeof(double)) == 0);
  for (std::size_t j = 0; j < a.steps.size(); ++j) CHECK(a.steps[j].theta_hat == b.steps[j].theta_hat);
}

}  // TEST_SUITE
