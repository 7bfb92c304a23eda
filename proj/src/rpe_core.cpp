#include "rpe/rpe_core.hpp"

#include <cmath>
#include <string>

namespace rpe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxGenerations = 62;

double repetitions_of(int generation) { return std::ldexp(1.0, generation - 1); }

void check_generation(int generation) {
  if (generation < 1 || generation > kMaxGenerations) {
    throw std::invalid_argument("generation index out of range: " + std::to_string(generation));
  }
}

void check_counts(const StepCounts& c, int generation) {
  if (!(c.samples > 0.0) || !(c.x >= 0.0 && c.x <= c.samples) ||
      !(c.y >= 0.0 && c.y <= c.samples)) {
    throw std::invalid_argument("invalid counts at generation " + std::to_string(generation));
  }
}

}  // namespace

double wrap_angle(double angle) {
  double w = std::fmod(angle, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double circular_distance(double a, double b) {
  return std::fabs(std::remainder(a - b, kTwoPi));
}

double claimed_half_width(int max_exponent) {
  if (max_exponent < 0 || max_exponent >= kMaxGenerations) {
    throw std::invalid_argument("max exponent out of range: " + std::to_string(max_exponent));
  }
  return std::ldexp(kPi, -(max_exponent + 1));
}

StepAngle step_angle(const StepCounts& c) {
  const double half = c.samples / 2.0;
  const double num = c.y - half;
  const double den = half - c.x;
  if (num == 0.0 && den == 0.0) return {0.0, true};
  return {wrap_angle(std::atan2(num, den)), false};
}

double refine(double prev_theta_hat, double raw_angle, int generation) {
  check_generation(generation);
  const double n = repetitions_of(generation);
  // Offset of the nearest candidate, measured in n*theta space, in (-pi, pi].
  double offset = std::remainder(raw_angle - n * prev_theta_hat, kTwoPi);
  if (offset <= -kPi) offset += kTwoPi;
  const double refined = wrap_angle(prev_theta_hat + offset / n);
  if (circular_distance(refined, prev_theta_hat) > kPi / n + 1e-12) {
    throw std::logic_error("refinement left the admissible range");
  }
  return refined;
}

std::vector<double> refine_candidates(double raw_angle, int generation) {
  check_generation(generation);
  const auto n = static_cast<std::uint64_t>(repetitions_of(generation));
  std::vector<double> out;
  out.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    out.push_back((raw_angle + kTwoPi * static_cast<double>(k)) / static_cast<double>(n));
  }
  return out;
}

RpeResult estimate(std::span<const StepCounts> generations, DegenerateMode mode) {
  if (generations.empty()) throw std::invalid_argument("estimate needs at least one generation");
  const int count = static_cast<int>(generations.size());
  check_generation(count);

  RpeResult result;
  result.steps.reserve(generations.size());
  for (int j = 1; j <= count; ++j) {
    const StepCounts& counts = generations[j - 1];
    check_counts(counts, j);
    const StepAngle raw = step_angle(counts);
    if (raw.degenerate) {
      if (mode == DegenerateMode::Strict) {
        throw DegenerateCountsError("indeterminate angle at generation " + std::to_string(j));
      }
      result.degenerate_steps.push_back(j);
    }
    const double theta_hat = j == 1 ? raw.angle : refine(result.steps.back().theta_hat, raw.angle, j);
    result.steps.push_back(StepRecord{j, std::uint64_t{1} << (j - 1), counts, raw.angle, theta_hat});
  }
  result.theta_est = result.steps.back().theta_hat;
  result.half_width = claimed_half_width(count - 1);
  return result;
}

RpeResult estimate(std::span<const IndexedCounts> generations, DegenerateMode mode) {
  std::vector<StepCounts> ordered;
  ordered.reserve(generations.size());
  for (std::size_t i = 0; i < generations.size(); ++i) {
    if (generations[i].generation != static_cast<int>(i) + 1) {
      throw std::invalid_argument("generations must be contiguous starting at 1");
    }
    ordered.push_back(generations[i].counts);
  }
  return estimate(std::span<const StepCounts>(ordered), mode);
}

bool is_success(double theta_est, double theta_ref, int max_exponent) {
  return circular_distance(theta_est, theta_ref) <= claimed_half_width(max_exponent);
}

double ideal_px(double theta, std::uint64_t n) {
  return (1.0 - std::cos(static_cast<double>(n) * theta)) / 2.0;
}

double ideal_py(double theta, std::uint64_t n) {
  return (1.0 + std::sin(static_cast<double>(n) * theta)) / 2.0;
}

std::vector<StepCounts> expected_counts(double theta, int max_exponent, double samples) {
  check_generation(max_exponent + 1);
  std::vector<StepCounts> out;
  for (int j = 1; j <= max_exponent + 1; ++j) {
    const std::uint64_t n = std::uint64_t{1} << (j - 1);
    out.push_back({samples * ideal_px(theta, n), samples * ideal_py(theta, n), samples});
  }
  return out;
}

}  // namespace rpe
