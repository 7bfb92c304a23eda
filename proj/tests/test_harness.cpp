#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rpe/harness.hpp"
#include "rpe/sweep_io.hpp"

using namespace rpe;
using std::numbers::pi;

namespace {

// Wilson bounds as the roots of (p_hat - p)^2 = z^2 p (1 - p) / n.
std::pair<double, double> wilson_reference(double k, double n) {
  const double z = 1.959963984540054;
  const double p = k / n;
  const double a = 1.0 + z * z / n;
  const double b = -(2.0 * p + z * z / n);
  const double c = p * p;
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  return {(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)};
}

double failure_rate(const std::vector<TrialOutcome>& outcomes) {
  double f = 0.0;
  for (const auto& o : outcomes) f += o.success ? 0.0 : 1.0;
  return f / static_cast<double>(outcomes.size());
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("wilson interval against the quadratic form") {
  for (std::uint64_t k : {0u, 50u, 100u}) {
    const WilsonInterval w = wilson_interval(k, 100);
    const auto [lo, hi] = wilson_reference(static_cast<double>(k), 100.0);
    CHECK(w.low == doctest::Approx(std::max(lo, 0.0)).epsilon(1e-12));
    CHECK(w.high == doctest::Approx(std::min(hi, 1.0)).epsilon(1e-12));
    CHECK(w.low <= k / 100.0);
    CHECK(w.high >= k / 100.0);
  }
  CHECK(wilson_interval(0, 100).high == doctest::Approx(0.0370).epsilon(1e-3));
  CHECK(wilson_interval(50, 100).low == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(5, 4), std::invalid_argument);
}

TEST_CASE("trial configuration is validated") {
  TrialConfig c;
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrialConfig{};
  c.samples_schedule = {1, 2};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.samples_schedule.assign(8, 16);
  CHECK_NOTHROW(c.validate());
  c.gate.theta_actual = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("noiseless calibration succeeds") {
  TrialConfig c;
  c.samples = 128;
  const TrialOutcome o = run_trial(c);
  CHECK(o.success);
  CHECK(std::fabs(o.result.theta_est - pi / 2) <= pi / 256);
  CHECK_FALSE(o.first_failure_generation);
}

TEST_CASE("a miscalibrated gate is measured, and scored against the reference") {
  TrialConfig c;
  c.samples = 10000;
  c.gate.theta_actual = pi / 2 + 0.02;
  const TrialOutcome o = run_trial(c);
  CHECK(std::fabs(o.result.theta_est - (pi / 2 + 0.02)) <= pi / 256);
  CHECK_FALSE(o.success);
}

TEST_CASE("heavy preparation error fails") {
  TrialConfig c;
  c.noise.prep_error = 0.9;
  CHECK(failure_rate(run_trials(c, 50)) >= 0.95);
}

TEST_CASE("sample schedules are honoured") {
  TrialConfig c;
  c.max_exponent = 3;
  c.samples_schedule = {10, 20, 30, 40};
  const TrialOutcome o = run_trial(c);
  for (int j = 1; j <= 4; ++j) CHECK(o.result.steps[j - 1].counts.samples == 10.0 * j);
}

TEST_CASE("materialize applies one axis value") {
  SweepSpec spec;
  spec.lambda_ref = 0.5;
  TrialConfig base;
  base.noise.detector = DetectorModel{};
  CHECK(materialize(base, SweepAxis::Threshold, 17, spec).noise.detector->threshold == 17);
  CHECK(materialize(base, SweepAxis::PrepTime, 0.4, spec).noise.prep_error == doctest::Approx(delta_prep(0.4).value));
  CHECK(materialize(base, SweepAxis::LambdaDb, 0.0, spec).noise.phase_damping_per_gate == 0.5);
  CHECK(materialize(base, SweepAxis::Samples, 64, spec).samples == 64);
  CHECK_THROWS_AS(materialize(base, SweepAxis::Threshold, 2.5, spec), std::invalid_argument);
  CHECK_THROWS_AS(materialize(base, SweepAxis::Samples, 0, spec), std::invalid_argument);
  CHECK_THROWS_AS(materialize(TrialConfig{}, SweepAxis::Threshold, 3, spec), std::invalid_argument);
  CHECK(parse_sweep_axis("prep_time_us") == SweepAxis::PrepTime);
  CHECK_THROWS_AS(parse_sweep_axis("bogus"), std::invalid_argument);
}

TEST_CASE("sweep rejects bad grids") {
  TrialConfig base;
  SweepSpec spec;
  spec.primary = {SweepAxis::Samples, {}};
  CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
  spec.primary = {SweepAxis::Samples, {8}};
  spec.secondary = AxisGrid{SweepAxis::Samples, {16}};
  CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
  spec.secondary.reset();
  spec.trials_per_point = 0;
  CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
}

TEST_CASE("property: failure counts are bounded and bracketed") {
  TrialConfig base;
  SweepSpec spec;
  spec.primary = {SweepAxis::PrepTime, {0.3, 0.6, 0.7, 1.2}};
  spec.secondary = AxisGrid{SweepAxis::Samples, {4, 16}};
  spec.trials_per_point = 40;
  const SweepResult r = sweep(base, spec);
  REQUIRE(r.points.size() == 8);
  for (const auto& p : r.points) {
    CHECK(p.failures <= p.trials);
    CHECK(p.ci_low >= 0.0);
    CHECK(p.ci_high <= 1.0);
    CHECK(p.ci_low <= p.failure_rate);
    CHECK(p.ci_high >= p.failure_rate);
  }
}

TEST_CASE("property: first-failure generations account for every failure") {
  TrialConfig base;
  base.noise.detector = DetectorModel{0.1, 19.0, 0.0121, 2};
  SweepSpec spec;
  spec.primary = {SweepAxis::Threshold, {0, 17, 18, 19, 22}};
  spec.trials_per_point = 60;
  const SweepResult r = sweep(base, spec);
  std::uint64_t total_failures = 0;
  for (const auto& p : r.points) {
    std::uint64_t sum = 0;
    for (auto f : p.failures_by_generation) sum += f;
    CHECK(sum == p.failures);
    CHECK(p.failures_by_generation.size() == 8);
    total_failures += p.failures;
  }
  CHECK(total_failures > 0);

  // and per trial: a failure has a generation, a success has none
  TrialConfig c = base;
  c.noise.detector->threshold = 18;
  for (const auto& o : run_trials(c, 50)) {
    CHECK(o.success != o.first_failure_generation.has_value());
    if (o.first_failure_generation) {
      CHECK(*o.first_failure_generation >= 1);
      CHECK(*o.first_failure_generation <= 8);
    }
  }
}

TEST_CASE("property: sweeps are reproducible under any thread count") {
  TrialConfig base;
  base.seed = 1234;
  base.noise.detector = DetectorModel{0.1, 19.0, 0.0121, 2};
  SweepSpec spec;
  spec.primary = {SweepAxis::Threshold, {2, 16, 17, 18, 19}};
  spec.secondary = AxisGrid{SweepAxis::Samples, {8, 32}};
  spec.trials_per_point = 30;
  spec.threads = 1;
  const SweepResult one = sweep(base, spec);
  for (unsigned t : {2u, 3u, 8u, 0u}) {
    spec.threads = t;
    const SweepResult many = sweep(base, spec);
    CHECK(many == one);
    CHECK(format_table(many) == format_table(one));
    CHECK(format_metadata(many) == format_metadata(one));
  }
  base.seed = 1235;
  CHECK(format_table(sweep(base, spec)) != format_table(one));
}

TEST_CASE("property: more injected error fails more often, for each source") {
  constexpr std::uint64_t kTrials = 400;
  auto rate = [](const TrialConfig& c) { return failure_rate(run_trials(c, kTrials)); };

  TrialConfig low, high;
  low.noise.prep_error = 0.05;
  high.noise.prep_error = 0.45;
  CHECK(rate(high) > rate(low));

  // bright tail fraction q sets the bright misread rate at threshold 2
  low = high = TrialConfig{};
  low.noise.detector = DetectorModel{0.1, 19.0, 0.05, 2};
  high.noise.detector = DetectorModel{0.1, 19.0, 0.45, 2};
  CHECK(delta_meas(*low.noise.detector).value == doctest::Approx(0.05).epsilon(0.01));
  CHECK(delta_meas(*high.noise.detector).value == doctest::Approx(0.45).epsilon(0.01));
  CHECK(rate(high) > rate(low));

  low = high = TrialConfig{};
  low.noise.phase_damping_per_gate = lambda_for_delta(0.05, 128);
  high.noise.phase_damping_per_gate = lambda_for_delta(0.45, 128);
  CHECK(rate(high) > rate(low));
}

TEST_CASE("histogram of estimates") {
  TrialConfig c;
  c.samples = 128;
  std::vector<RpeResult> results;
  for (const auto& o : run_trials(c, 50)) results.push_back(o.result);
  const double half = pi / 256;
  const EstimateHistogram h = failure_histogram(results, pi / 2, 7, 40, pi / 2 - 4 * half, pi / 2 + 4 * half);
  CHECK(h.total == 50);
  CHECK(h.failures == 0);
  CHECK_FALSE(h.failures_within_twice);
  std::uint64_t inside = 0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double lo = h.range_low + (h.range_high - h.range_low) * b / 40.0;
    const double hi = h.range_low + (h.range_high - h.range_low) * (b + 1) / 40.0;
    if (lo >= h.bound_low - 1e-12 && hi <= h.bound_high + 1e-12) inside += h.counts[b];
  }
  CHECK(inside == 50);
  CHECK_THROWS_AS(failure_histogram({}, pi / 2, 7, 10, 0, 1), std::invalid_argument);
}

TEST_CASE("failure shapes: damping clusters, detection spreads") {
  constexpr std::uint64_t kTrials = 2000;
  TrialConfig damped;
  damped.noise.phase_damping_per_gate = lambda_for_delta(0.40, 128);
  TrialConfig misread;
  misread.noise.detector = DetectorModel{0.1, 19.0, 0.0121, 20};
  auto share = [&](const TrialConfig& c) {
    std::vector<RpeResult> results;
    for (const auto& o : run_trials(c, kTrials)) results.push_back(o.result);
    const EstimateHistogram h = failure_histogram(results, pi / 2, 7, 10, 0.0, 2 * pi);
    REQUIRE(h.failures > 20);
    return *h.failures_within_twice;
  };
  const double clustered = share(damped);
  const double spread = share(misread);
  CHECK(clustered > 0.6);
  CHECK(spread < 0.3);
}

}  // TEST_SUITE
