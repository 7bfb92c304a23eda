#include "rpe/qubit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rpe {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

void check_invariants(const QubitState& s) {
  const double tol = kStateTolerance;
  if (!(s.rho00 >= -tol && s.rho11 >= -tol && s.leak >= -tol)) {
    throw std::domain_error("qubit state has a negative population");
  }
  if (std::fabs(s.rho00 + s.rho11 + s.leak - 1.0) > tol) {
    throw std::domain_error("qubit state trace differs from 1");
  }
  if (std::norm(s.rho01) > s.rho00 * s.rho11 + tol) {
    throw std::domain_error("qubit state coherence violates positivity");
  }
}

void GateSpec::validate() const {
  if (!(theta_actual > 0.0 && theta_actual < 2.0 * std::numbers::pi)) {
    throw std::invalid_argument("gate angle must lie in (0, 2*pi)");
  }
}

void DetectorModel::validate() const {
  if (!(dark_mean >= 0.0) || !std::isfinite(dark_mean)) {
    throw std::invalid_argument("detector dark_mean must be non-negative");
  }
  if (!(bright_mean > dark_mean) || !std::isfinite(bright_mean)) {
    throw std::invalid_argument("detector bright_mean must exceed dark_mean");
  }
  require_probability(bright_tail_fraction, "detector bright_tail_fraction");
  if (threshold < 0) throw std::invalid_argument("detector threshold must be non-negative");
}

void NoiseConfig::validate() const {
  require_probability(prep_error, "prep_error");
  require_probability(phase_damping_per_gate, "phase_damping_per_gate");
  if (detector) detector->validate();
}

QubitState prepare(double prep_error) {
  require_probability(prep_error, "prep_error");
  return QubitState{1.0 - prep_error, 0.0, {0.0, 0.0}, prep_error};
}

QubitState apply_gate(const QubitState& s, const GateSpec& gate) {
  check_invariants(s);
  const double c = std::cos(gate.theta_actual / 2.0);
  const double sn = std::sin(gate.theta_actual / 2.0);
  const double cc = c * c;
  const double ss = sn * sn;
  const double cs = c * sn;
  const double re = s.rho01.real();

  // R rho R^T with R = [[c, -s], [s, c]]; the imaginary part of rho01 is an
  // antisymmetric term that R leaves unchanged (det R = 1).
  QubitState out = s;
  out.rho00 = cc * s.rho00 - 2.0 * cs * re + ss * s.rho11;
  out.rho11 = ss * s.rho00 + 2.0 * cs * re + cc * s.rho11;
  out.rho01 = {cs * (s.rho00 - s.rho11) + (cc - ss) * re, s.rho01.imag()};
  return out;
}

QubitState apply_phase_damping(const QubitState& s, double lambda) {
  require_probability(lambda, "phase damping lambda");
  QubitState out = s;
  out.rho01 *= std::sqrt(1.0 - lambda);
  return out;
}

double bright_probability(const QubitState& s) {
  return std::clamp(s.rho11 + s.leak, 0.0, 1.0);
}

std::uint32_t sample_photon_count(bool outcome_is_bright, const DetectorModel& detector,
                                  RandomStream& rng) {
  if (!outcome_is_bright) return sample_poisson(detector.dark_mean, rng);
  if (sample_bernoulli(detector.bright_tail_fraction, rng)) {
    return sample_poisson(detector.dark_mean, rng);
  }
  return sample_poisson(detector.bright_mean, rng);
}

QubitState evolve_sequence(std::uint64_t n, StartState start, const GateSpec& gate,
                           const NoiseConfig& noise, GateFunction gate_fn) {
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  gate.validate();
  noise.validate();

  const double lambda = noise.phase_damping_per_gate;
  QubitState state = prepare(noise.prep_error);
  if (start == StartState::FromPlus) {
    if (noise.plus_prep == PlusPrep::SelfPrep) {
      state = apply_phase_damping(gate_fn(state, gate), lambda);
    } else {
      const double pop = 1.0 - noise.prep_error;
      state = QubitState{pop / 2.0, pop / 2.0, {pop / 2.0, 0.0}, noise.prep_error};
    }
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    state = apply_phase_damping(gate_fn(state, gate), lambda);
  }
  check_invariants(state);
  return state;
}

std::uint64_t run_sequence(std::uint64_t n, StartState start, std::uint64_t samples,
                           const GateSpec& gate, const NoiseConfig& noise, RandomStream& rng) {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  const double p_bright = bright_probability(evolve_sequence(n, start, gate, noise));

  std::uint64_t bright = 0;
  for (std::uint64_t shot = 0; shot < samples; ++shot) {
    const bool outcome = sample_bernoulli(p_bright, rng);
    bool classified = outcome;
    if (noise.detector) {
      const auto count = sample_photon_count(outcome, *noise.detector, rng);
      classified = classify(count, noise.detector->threshold);
    }
    bright += classified ? 1 : 0;
  }
  return bright;
}

}  // namespace rpe
