#pragma once

// Seeded Monte Carlo driver for repeated calibrations and error sweeps.

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpe/noise_models.hpp"
#include "rpe/qubit_sim.hpp"
#include "rpe/rpe_core.hpp"

namespace rpe {

struct TrialConfig {
  /// L: the longest sequence has 2^L gates, giving L+1 generations.
  int max_exponent = 7;
  std::uint64_t samples = 32;
  /// Samples for generations 1..L+1; overrides `samples` when non-empty.
  std::vector<std::uint64_t> samples_schedule;
  GateSpec gate{std::numbers::pi / 2.0};
  NoiseConfig noise;
  double theta_ref = std::numbers::pi / 2.0;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;
  DegenerateMode degenerate_mode = DegenerateMode::Flag;

  int generation_count() const { return max_exponent + 1; }
  std::uint64_t samples_at(int generation) const;
  void validate() const;
};

struct TrialOutcome {
  RpeResult result;
  bool success = false;
  /// Earliest generation from which every later estimate stays outside its
  /// bound pi/2^j; empty for successful trials.
  std::optional<int> first_failure_generation;
};

TrialOutcome run_trial(const TrialConfig& config);

/// First generation of the trailing run of out-of-bound estimates.
std::optional<int> first_failure_generation(const RpeResult& result, double theta_ref);

enum class SweepAxis { Threshold, PrepTime, LambdaDb, Samples };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct AxisGrid {
  SweepAxis axis = SweepAxis::Threshold;
  std::vector<double> values;
};

struct SweepSpec {
  AxisGrid primary;
  std::optional<AxisGrid> secondary;
  std::uint64_t trials_per_point = 100;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;
  PrepCurve prep_curve;
  double lambda_ref = 0.0;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

/// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct SweepPoint {
  std::string axis_name;
  double axis_value = 0.0;
  std::optional<double> secondary_axis_value;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double failure_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double predicted_delta = 0.0;
  /// Index j-1 holds failing trials whose first failure generation is j.
  std::vector<std::uint64_t> failures_by_generation;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

inline constexpr const char* kSweepSchema = "rpe-sweep-v1";

struct SweepMetadata {
  std::string schema = kSweepSchema;
  std::string code_version;
  std::uint64_t seed = 0;
  std::string secondary_axis_name;  // empty for one-axis sweeps
  nlohmann::json config;

  friend bool operator==(const SweepMetadata&, const SweepMetadata&) = default;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  SweepMetadata metadata;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Applies one axis value to a trial configuration.
TrialConfig materialize(const TrialConfig& base, SweepAxis axis, double value,
                        const SweepSpec& spec);

/// Largest additive error predicted for the configured error sources, with
/// phase damping evaluated at the longest sequence.
double predicted_delta(const TrialConfig& config);

SweepResult sweep(const TrialConfig& base, const SweepSpec& spec);

/// Runs `trials` trials of one configuration with indices first_index + t,
/// in parallel, returned in index order.
std::vector<TrialOutcome> run_trials(const TrialConfig& base, std::uint64_t trials,
                                     std::uint64_t first_index = 0, unsigned threads = 0);

struct EstimateHistogram {
  double range_low = 0.0;
  double range_high = kTwoPi;
  std::vector<std::uint64_t> counts;
  double bound_low = 0.0;   // theta_ref - pi/2^(L+1)
  double bound_high = 0.0;  // theta_ref + pi/2^(L+1)
  std::uint64_t total = 0;
  std::uint64_t failures = 0;
  /// Share of failures within twice the claimed range; empty without failures.
  std::optional<double> failures_within_twice;
};

/// Bins final estimates of `results` over [range_low, range_high).
EstimateHistogram failure_histogram(const std::vector<RpeResult>& results, double theta_ref,
                                    int max_exponent, std::size_t bins, double range_low,
                                    double range_high);

}  // namespace rpe
