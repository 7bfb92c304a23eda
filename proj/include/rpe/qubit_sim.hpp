#pragma once

// Single-qubit density-matrix simulator with an inert, always-bright
// leakage level and photon-counting readout.
//
// Gate convention: Y_theta = cos(theta/2) I - i sin(theta/2) sigma_Y, which is
// the real rotation matrix [[c, -s], [s, c]] with c = cos(theta/2) and
// s = sin(theta/2). Hence <1|Y_{pi/2}|0> = +1/sqrt(2), Y_{pi/2}|0> = |+> and
// rho01 = +1/2 after one pi/2 gate from |0>.

#include <complex>
#include <cstdint>
#include <optional>

#include "rpe/random.hpp"

namespace rpe {

struct QubitState {
  double rho00 = 1.0;
  double rho11 = 0.0;
  std::complex<double> rho01{0.0, 0.0};
  double leak = 0.0;  // population of the always-bright auxiliary manifold

  friend bool operator==(const QubitState&, const QubitState&) = default;
};

/// Tolerance used by the runtime invariant guard.
inline constexpr double kStateTolerance = 1e-12;

/// Throws std::domain_error if the state violates trace, positivity or
/// non-negativity.
void check_invariants(const QubitState& state);

struct GateSpec {
  double theta_actual = 0.0;  // radians, rotation about Y

  void validate() const;
};

struct DetectorModel {
  double dark_mean = 0.1;
  double bright_mean = 19.0;
  /// Probability q that a bright outcome yields a dark-distributed count.
  double bright_tail_fraction = 0.0;
  /// Counts >= threshold classify as bright.
  std::int64_t threshold = 2;

  void validate() const;
  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

enum class PlusPrep {
  SelfPrep,  // |+> made by one extra application of the gate under test
  Ideal,     // |+> injected perfectly
};

struct NoiseConfig {
  double prep_error = 0.0;
  /// Empty means perfect readout: the classified bit equals the outcome.
  std::optional<DetectorModel> detector;
  double phase_damping_per_gate = 0.0;
  PlusPrep plus_prep = PlusPrep::SelfPrep;

  void validate() const;
  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

enum class StartState { FromZero, FromPlus };

/// Worst-case preparation: the residual error sits entirely in leakage.
QubitState prepare(double prep_error);

QubitState apply_gate(const QubitState& state, const GateSpec& gate);

using GateFunction = QubitState (*)(const QubitState&, const GateSpec&);

/// Phase-damping channel; the coherence is scaled by sqrt(1 - lambda).
QubitState apply_phase_damping(const QubitState& state, double lambda);

/// rho11 + leak, clamped to [0, 1].
double bright_probability(const QubitState& state);

std::uint32_t sample_photon_count(bool outcome_is_bright, const DetectorModel& detector,
                                  RandomStream& rng);

/// Bright iff count >= threshold.
constexpr bool classify(std::int64_t count, std::int64_t threshold) { return count >= threshold; }

/// State just before measurement: preparation, optional self-prepared |+>,
/// then n gates each followed by one damping step.
/// `gate_fn` replaces the gate implementation for oracle negative controls.
QubitState evolve_sequence(std::uint64_t n, StartState start, const GateSpec& gate,
                           const NoiseConfig& noise, GateFunction gate_fn = &apply_gate);

/// Runs `samples` independent shots and returns how many classified bright.
std::uint64_t run_sequence(std::uint64_t n, StartState start, std::uint64_t samples,
                           const GateSpec& gate, const NoiseConfig& noise, RandomStream& rng);

}  // namespace rpe
