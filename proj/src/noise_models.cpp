#include "rpe/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rpe {

std::string_view to_string(ErrorSource source) {
  switch (source) {
    case ErrorSource::Measurement: return "measurement";
    case ErrorSource::Preparation: return "preparation";
    case ErrorSource::PhaseDamping: return "phase_damping";
  }
  return "unknown";
}

DeltaEstimate make_delta(double value, ErrorSource source) {
  const double v = std::clamp(value, 0.0, 1.0);
  return {v, source, v > kDeltaBound};
}

void PrepCurve::validate() const {
  if (!(amplitude >= 0.0 && rate_per_us >= 0.0 && floor >= 0.0) || amplitude + floor > 1.0) {
    throw std::invalid_argument("preparation curve needs a, b, c >= 0 and a + c <= 1");
  }
}

double poisson_cdf(std::int64_t k, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson_cdf: mean must be finite and non-negative");
  }
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;

  // Terms are built in log space so that large means do not underflow e^{-mean}.
  const double log_mean = std::log(mean);
  double sum = 0.0;
  for (std::int64_t i = 0; i <= k; ++i) {
    const double x = static_cast<double>(i);
    const double term = std::exp(x * log_mean - mean - std::lgamma(x + 1.0));
    sum += term;
    if (x > mean && term < sum * 1e-17) break;
  }
  return std::min(sum, 1.0);
}

double dark_misread(const DetectorModel& d) {
  d.validate();
  return 1.0 - poisson_cdf(d.threshold - 1, d.dark_mean);
}

double bright_misread(const DetectorModel& d) {
  d.validate();
  const double q = d.bright_tail_fraction;
  return q * poisson_cdf(d.threshold - 1, d.dark_mean) +
         (1.0 - q) * poisson_cdf(d.threshold - 1, d.bright_mean);
}

DeltaEstimate delta_meas(const DetectorModel& detector) {
  return make_delta(std::max(dark_misread(detector), bright_misread(detector)),
                    ErrorSource::Measurement);
}

DeltaEstimate delta_prep(double prep_time_us, const PrepCurve& curve) {
  curve.validate();
  if (!(prep_time_us >= 0.0)) throw std::invalid_argument("preparation time must be non-negative");
  const double e = curve.amplitude * std::exp(-curve.rate_per_us * prep_time_us) + curve.floor;
  return make_delta(e, ErrorSource::Preparation);
}

DeltaEstimate delta_phase_damping(double lambda, std::uint64_t n) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("phase damping lambda must lie in [0, 1]");
  }
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  const double contrast = std::pow(1.0 - lambda, static_cast<double>(n) / 4.0);
  return make_delta((1.0 - contrast) / 2.0, ErrorSource::PhaseDamping);
}

double db_to_lambda(double db, double lambda_ref) {
  // lambda_ref is an extrapolation to 0 dB and may exceed 1; only the scaled
  // value has to be a probability.
  if (!(lambda_ref >= 0.0) || !std::isfinite(lambda_ref)) {
    throw std::invalid_argument("lambda_ref must be finite and non-negative");
  }
  return std::clamp(lambda_ref * std::pow(10.0, db / 10.0), 0.0, 1.0);
}

double lambda_for_delta(double delta, std::uint64_t n) {
  if (!(delta >= 0.0 && delta < 0.5)) throw std::invalid_argument("delta must lie in [0, 0.5)");
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  return 1.0 - std::pow(1.0 - 2.0 * delta, 4.0 / static_cast<double>(n));
}

}  // namespace rpe
