#include "rpe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rpe/config.hpp"

#ifndef RPE_VERSION
#define RPE_VERSION "0.0.0"
#endif

namespace rpe {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // two-sided 95%

unsigned resolve_threads(unsigned requested, std::uint64_t jobs) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(jobs, 1)));
}

// Calls body(i) for i in [0, count) on `threads` workers. The first exception
// thrown by any worker is rethrown once all workers have stopped.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned threads, Body body) {
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::uint64_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const unsigned n = resolve_threads(threads, count);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t as_count(double value, const char* what, double minimum) {
  if (!(value >= minimum) || value != std::floor(value) || value > 9.0e15) {
    throw std::invalid_argument(std::string(what) + " must be an integer >= " +
                                std::to_string(static_cast<long long>(minimum)) + ", got " +
                                std::to_string(value));
  }
  return static_cast<std::uint64_t>(value);
}

}  // namespace

std::uint64_t TrialConfig::samples_at(int generation) const {
  if (samples_schedule.empty()) return samples;
  return samples_schedule.at(static_cast<std::size_t>(generation - 1));
}

void TrialConfig::validate() const {
  if (max_exponent < 0 || max_exponent > 60) throw std::invalid_argument("max_exponent must lie in [0, 60]");
  if (!samples_schedule.empty() &&
      samples_schedule.size() != static_cast<std::size_t>(generation_count())) {
    throw std::invalid_argument("samples_schedule needs one entry per generation");
  }
  for (int j = 1; j <= generation_count(); ++j) {
    if (samples_at(j) < 1) throw std::invalid_argument("samples must be at least 1");
  }
  gate.validate();
  noise.validate();
}

std::optional<int> first_failure_generation(const RpeResult& result, double theta_ref) {
  std::optional<int> first;
  for (auto it = result.steps.rbegin(); it != result.steps.rend(); ++it) {
    if (is_success(it->theta_hat, theta_ref, it->generation - 1)) break;
    first = it->generation;
  }
  return first;
}

TrialOutcome run_trial(const TrialConfig& config) {
  config.validate();
  std::vector<StepCounts> counts;
  counts.reserve(static_cast<std::size_t>(config.generation_count()));
  for (int j = 1; j <= config.generation_count(); ++j) {
    const std::uint64_t n = std::uint64_t{1} << (j - 1);
    const std::uint64_t m = config.samples_at(j);
    const auto gen = static_cast<std::uint32_t>(j);
    RandomStream zero_rng({config.seed, config.trial_index, gen, 0});
    RandomStream plus_rng({config.seed, config.trial_index, gen, 1});
    const auto x = run_sequence(n, StartState::FromZero, m, config.gate, config.noise, zero_rng);
    const auto y = run_sequence(n, StartState::FromPlus, m, config.gate, config.noise, plus_rng);
    counts.push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(m)});
  }

  TrialOutcome out;
  out.result = estimate(std::span<const StepCounts>(counts), config.degenerate_mode);
  out.success = is_success(out.result.theta_est, config.theta_ref, config.max_exponent);
  if (!out.success) out.first_failure_generation = first_failure_generation(out.result, config.theta_ref);
  return out;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Threshold: return "threshold";
    case SweepAxis::PrepTime: return "prep_time_us";
    case SweepAxis::LambdaDb: return "intensity_db";
    case SweepAxis::Samples: return "samples";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  for (auto axis : {SweepAxis::Threshold, SweepAxis::PrepTime, SweepAxis::LambdaDb, SweepAxis::Samples}) {
    if (to_string(axis) == name) return axis;
  }
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson_interval needs at least one trial");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::clamp(std::min(center - half, p), 0.0, 1.0),
          std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

TrialConfig materialize(const TrialConfig& base, SweepAxis axis, double value, const SweepSpec& spec) {
  TrialConfig c = base;
  switch (axis) {
    case SweepAxis::Threshold: {
      if (!c.noise.detector) throw std::invalid_argument("threshold sweep needs a detector model");
      c.noise.detector->threshold = static_cast<std::int64_t>(as_count(value, "threshold", 0));
      break;
    }
    case SweepAxis::PrepTime:
      if (!(value >= 0.0)) throw std::invalid_argument("preparation time must be non-negative");
      c.noise.prep_error = delta_prep(value, spec.prep_curve).value;
      break;
    case SweepAxis::LambdaDb:
      if (!std::isfinite(value)) throw std::invalid_argument("intensity must be finite");
      c.noise.phase_damping_per_gate = db_to_lambda(value, spec.lambda_ref);
      break;
    case SweepAxis::Samples:
      c.samples = as_count(value, "samples", 1);
      c.samples_schedule.clear();
      break;
  }
  return c;
}

double predicted_delta(const TrialConfig& c) {
  double delta = c.noise.prep_error;
  if (c.noise.detector) delta = std::max(delta, delta_meas(*c.noise.detector).value);
  if (c.noise.phase_damping_per_gate > 0.0) {
    const std::uint64_t longest = std::uint64_t{1} << c.max_exponent;
    delta = std::max(delta, delta_phase_damping(c.noise.phase_damping_per_gate, longest).value);
  }
  return delta;
}

std::vector<TrialOutcome> run_trials(const TrialConfig& base, std::uint64_t trials,
                                     std::uint64_t first_index, unsigned threads) {
  base.validate();
  std::vector<TrialOutcome> out(trials);
  parallel_for(trials, threads, [&](std::uint64_t t) {
    TrialConfig c = base;
    c.trial_index = first_index + t;
    out[t] = run_trial(c);
  });
  return out;
}

SweepResult sweep(const TrialConfig& base, const SweepSpec& spec) {
  if (spec.primary.values.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.secondary && spec.secondary->values.empty()) {
    throw std::invalid_argument("secondary sweep grid is empty");
  }
  if (spec.secondary && spec.secondary->axis == spec.primary.axis) {
    throw std::invalid_argument("sweep axes must differ");
  }
  if (spec.trials_per_point < 1) throw std::invalid_argument("trials_per_point must be at least 1");

  // Grid points are laid out primary-major. Materializing all of them first
  // rejects out-of-range values before any trial runs.
  struct Cell {
    double primary;
    std::optional<double> secondary;
    TrialConfig config;
  };
  std::vector<Cell> cells;
  for (double v : spec.primary.values) {
    TrialConfig c = materialize(base, spec.primary.axis, v, spec);
    if (!spec.secondary) {
      c.validate();
      cells.push_back({v, std::nullopt, c});
      continue;
    }
    for (double w : spec.secondary->values) {
      TrialConfig c2 = materialize(c, spec.secondary->axis, w, spec);
      c2.validate();
      cells.push_back({v, w, c2});
    }
  }

  const std::uint64_t per = spec.trials_per_point;
  const std::uint64_t total = cells.size() * per;
  std::vector<TrialOutcome> outcomes(total);
  parallel_for(total, spec.threads, [&](std::uint64_t i) {
    TrialConfig c = cells[i / per].config;
    c.trial_index = i;
    outcomes[i] = run_trial(c);
  });

  SweepResult result;
  for (std::size_t p = 0; p < cells.size(); ++p) {
    SweepPoint pt;
    pt.axis_name = to_string(spec.primary.axis);
    pt.axis_value = cells[p].primary;
    pt.secondary_axis_value = cells[p].secondary;
    pt.trials = per;
    pt.failures_by_generation.assign(static_cast<std::size_t>(cells[p].config.generation_count()), 0);
    for (std::uint64_t t = 0; t < per; ++t) {
      const TrialOutcome& o = outcomes[p * per + t];
      if (o.success) continue;
      ++pt.failures;
      ++pt.failures_by_generation.at(static_cast<std::size_t>(*o.first_failure_generation - 1));
    }
    pt.failure_rate = static_cast<double>(pt.failures) / static_cast<double>(per);
    const WilsonInterval ci = wilson_interval(pt.failures, per);
    pt.ci_low = ci.low;
    pt.ci_high = ci.high;
    pt.predicted_delta = predicted_delta(cells[p].config);
    result.points.push_back(std::move(pt));
  }

  result.metadata.code_version = RPE_VERSION;
  result.metadata.seed = base.seed;
  result.metadata.secondary_axis_name = spec.secondary ? to_string(spec.secondary->axis) : "";
  result.metadata.config = {{"trial", to_json(base)}, {"sweep", to_json(spec)}};
  return result;
}

EstimateHistogram failure_histogram(const std::vector<RpeResult>& results, double theta_ref,
                                    int max_exponent, std::size_t bins, double range_low,
                                    double range_high) {
  if (results.empty()) throw std::invalid_argument("failure_histogram needs at least one result");
  if (bins < 1 || !(range_high > range_low)) throw std::invalid_argument("bad histogram binning");

  const double half = claimed_half_width(max_exponent);
  EstimateHistogram h;
  h.range_low = range_low;
  h.range_high = range_high;
  h.counts.assign(bins, 0);
  h.bound_low = theta_ref - half;
  h.bound_high = theta_ref + half;

  std::uint64_t within_twice = 0;
  for (const RpeResult& r : results) {
    ++h.total;
    // Unwrap the estimate onto the turn centred at theta_ref.
    const double offset = std::remainder(r.theta_est - theta_ref, kTwoPi);
    const double x = theta_ref + offset;
    if (x >= range_low && x < range_high) {
      auto bin = static_cast<std::size_t>((x - range_low) / (range_high - range_low) * bins);
      ++h.counts[std::min(bin, bins - 1)];
    }
    if (!is_success(r.theta_est, theta_ref, max_exponent)) {
      ++h.failures;
      if (std::fabs(offset) <= 2.0 * half) ++within_twice;
    }
  }
  if (h.failures > 0) {
    h.failures_within_twice = static_cast<double>(within_twice) / static_cast<double>(h.failures);
  }
  return h;
}

}  // namespace rpe
