#pragma once

// Analytic additive-error predictors for each injected error source.

#include <cstdint>
#include <string_view>

#include "rpe/qubit_sim.hpp"

namespace rpe {

/// Largest additive error under which the estimator is guaranteed to succeed.
inline constexpr double kDeltaBound = 0.353553390593274;  // 1/sqrt(8)

enum class ErrorSource { Measurement, Preparation, PhaseDamping };

std::string_view to_string(ErrorSource source);

struct DeltaEstimate {
  double value = 0.0;
  ErrorSource source = ErrorSource::Measurement;
  bool exceeds_bound = false;
};

DeltaEstimate make_delta(double value, ErrorSource source);

/// Preparation infidelity versus pumping time, E(t) = a e^{-b t} + c.
struct PrepCurve {
  double amplitude = 0.95;
  double rate_per_us = 1.5;
  double floor = 0.025;

  void validate() const;
};

/// P(K <= k) for K ~ Poisson(mean). k = -1 gives 0.
double poisson_cdf(std::int64_t k, double mean);

/// Probability that a dark outcome reads bright at the detector's threshold.
double dark_misread(const DetectorModel& detector);
/// Probability that a bright outcome reads dark, including the tail mixture.
double bright_misread(const DetectorModel& detector);

/// Pessimistic measurement error: the larger of the two misread rates.
DeltaEstimate delta_meas(const DetectorModel& detector);

DeltaEstimate delta_prep(double prep_time_us, const PrepCurve& curve = {});

/// Contrast loss after n gates, each followed by a damping step of strength
/// lambda. A y-rotation keeps the state in superposition for half of each
/// turn on average, so the Bloch vector shrinks by (1-lambda)^{1/4} per gate
/// and the additive error is half the lost contrast.
DeltaEstimate delta_phase_damping(double lambda, std::uint64_t n);

/// Scales a reference damping strength by relative intensity in dB.
double db_to_lambda(double db, double lambda_ref);

/// Per-gate lambda at which delta_phase_damping(lambda, n) equals delta.
double lambda_for_delta(double delta, std::uint64_t n);

}  // namespace rpe
