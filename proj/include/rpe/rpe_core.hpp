#pragma once

// Robust phase estimation of a rotation angle from bright counts of the two
// sequence families at lengths n = 2^(j-1).
//
// A run to maximum exponent L uses the L+1 generations j = 1..L+1, so the
// longest sequence has 2^L gates. After generation j the estimate is within
// pi/2^j of the true angle, given every step's raw angle is off by less than
// pi/2; the final claim is therefore pi/2^(L+1).

#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace rpe {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Counts for one generation. Real-valued so that exact expectations can be
/// fed in; the simulator always supplies integers.
struct StepCounts {
  double x = 0.0;  // bright count, sequence started in |0>
  double y = 0.0;  // bright count, sequence started in |+>
  double samples = 1.0;
};

struct StepAngle {
  double angle = 0.0;  // in [0, 2*pi)
  bool degenerate = false;
};

struct StepRecord {
  int generation = 1;  // j
  std::uint64_t repetitions = 1;  // n = 2^(j-1)
  StepCounts counts;
  double raw_angle = 0.0;  // n*theta mod 2*pi from this step alone
  double theta_hat = 0.0;  // refined estimate after this step

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RpeResult {
  std::vector<StepRecord> steps;
  double theta_est = 0.0;
  double half_width = 0.0;  // pi/2^(L+1), L = steps.size() - 1
  std::vector<int> degenerate_steps;

  friend bool operator==(const RpeResult&, const RpeResult&) = default;
};

enum class DegenerateMode {
  Flag,    // record the step and use angle 0
  Strict,  // throw DegenerateCountsError
};

struct DegenerateCountsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double angle);

/// Shortest distance between two angles on the circle, in [0, pi].
double circular_distance(double a, double b);

/// Claimed accuracy pi/2^(L+1) once the 2^L-gate sequence has been used.
double claimed_half_width(int max_exponent);

StepAngle step_angle(const StepCounts& counts);

/// Picks the candidate (raw + 2*pi*k)/n closest to prev on the circle. An
/// exact tie resolves to prev + pi/n.
double refine(double prev_theta_hat, double raw_angle, int generation);

/// All n = 2^(j-1) candidates for generation j, ascending.
std::vector<double> refine_candidates(double raw_angle, int generation);

/// Generation j is generations[j-1].
RpeResult estimate(std::span<const StepCounts> generations,
                   DegenerateMode mode = DegenerateMode::Flag);

/// Counts tagged with their generation index; must run 1, 2, ..., L.
struct IndexedCounts {
  int generation = 1;
  StepCounts counts;
};

RpeResult estimate(std::span<const IndexedCounts> generations,
                   DegenerateMode mode = DegenerateMode::Flag);

bool is_success(double theta_est, double theta_ref, int max_exponent);

/// Expected bright probabilities for a noiseless gate of angle theta.
double ideal_px(double theta, std::uint64_t n);
double ideal_py(double theta, std::uint64_t n);

/// Exact expected counts for generations 1..L+1.
std::vector<StepCounts> expected_counts(double theta, int max_exponent, double samples);

}  // namespace rpe
