#include "rpe/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include "rpe/noise_models.hpp"
#include "rpe/random.hpp"
#include "rpe/rpe_core.hpp"

namespace rpe::oracle {

namespace {

using cd = std::complex<double>;

Matrix3 zero() { return Matrix3{}; }

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 out = zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Matrix3 adjoint(const Matrix3& a) {
  Matrix3 out = zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = std::conj(a[j][i]);
  return out;
}

Matrix3 add(const Matrix3& a, const Matrix3& b) {
  Matrix3 out = a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] += b[i][j];
  return out;
}

Matrix3 conjugate(const Matrix3& op, const Matrix3& rho) {
  return multiply(multiply(op, rho), adjoint(op));
}

// cos(theta/2) I - i sin(theta/2) sigma_Y on the qubit, identity on leakage.
Matrix3 y_rotation(double theta) {
  const cd i(0.0, 1.0);
  const std::array<std::array<cd, 2>, 2> sigma_y = {{{0.0, -i}, {i, 0.0}}};
  Matrix3 u = zero();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      u[r][c] = (r == c ? std::cos(theta / 2.0) : 0.0) - i * std::sin(theta / 2.0) * sigma_y[r][c];
    }
  u[2][2] = 1.0;
  return u;
}

Matrix3 phase_damp(const Matrix3& rho, double lambda) {
  Matrix3 k0 = zero();
  Matrix3 k1 = zero();
  k0[0][0] = 1.0;
  k0[1][1] = std::sqrt(1.0 - lambda);
  k0[2][2] = 1.0;
  k1[1][1] = std::sqrt(lambda);
  return add(conjugate(k0, rho), conjugate(k1, rho));
}

double pick_tolerance(const Options& o, double fallback) {
  return o.tolerance_override > 0.0 ? o.tolerance_override : fallback;
}

Report finish(std::string name, double deviation, double tolerance, std::string detail = {}) {
  return {std::move(name), deviation <= tolerance, deviation, tolerance, std::move(detail)};
}

}  // namespace

Matrix3 evolve_density_matrix(std::uint64_t n, StartState start, double theta,
                              const NoiseConfig& noise) {
  Matrix3 rho = zero();
  rho[0][0] = 1.0 - noise.prep_error;
  rho[2][2] = noise.prep_error;
  const Matrix3 u = y_rotation(theta);
  const double lambda = noise.phase_damping_per_gate;

  if (start == StartState::FromPlus) {
    if (noise.plus_prep == PlusPrep::SelfPrep) {
      rho = phase_damp(conjugate(u, rho), lambda);
    } else {
      const double a = (1.0 - noise.prep_error) / 2.0;
      rho[0][0] = rho[0][1] = rho[1][0] = rho[1][1] = a;
    }
  }
  for (std::uint64_t step = 0; step < n; ++step) rho = phase_damp(conjugate(u, rho), lambda);
  return rho;
}

double brute_force_bright_probability(std::uint64_t n, StartState start, double theta,
                                      const NoiseConfig& noise) {
  const Matrix3 rho = evolve_density_matrix(n, start, theta, noise);
  return rho[1][1].real() + rho[2][2].real();
}

double poisson_cdf_by_summation(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  long double term = std::exp(-static_cast<long double>(mean));
  long double sum = term;
  for (std::int64_t i = 1; i <= k; ++i) {
    term *= static_cast<long double>(mean) / static_cast<long double>(i);
    sum += term;
  }
  return static_cast<double>(std::min(sum, 1.0L));
}

Report check_simulator(const Options& o, int configs) {
  const double tol = pick_tolerance(o, 1e-10);
  RandomStream rng({o.seed, 0, 0, 0});
  double worst = 0.0;
  try {
    for (int c = 0; c < configs; ++c) {
      NoiseConfig noise;
      noise.prep_error = rng.uniform() * 0.5;
      noise.phase_damping_per_gate = rng.uniform() * 0.3;
      noise.plus_prep = c % 3 == 0 ? PlusPrep::Ideal : PlusPrep::SelfPrep;
      const GateSpec gate{0.05 + rng.uniform() * (kTwoPi - 0.1)};
      for (std::uint64_t n = 1; n <= 8; ++n) {
        for (auto start : {StartState::FromZero, StartState::FromPlus}) {
          const double sim = bright_probability(evolve_sequence(n, start, gate, noise, o.gate_fn));
          const double ref = brute_force_bright_probability(n, start, gate.theta_actual, noise);
          worst = std::max(worst, std::fabs(sim - ref));
        }
      }
    }
  } catch (const std::exception& e) {
    return {"simulator-vs-3x3", false, INFINITY, tol, e.what()};
  }
  return finish("simulator-vs-3x3", worst, tol);
}

Report check_composition(const Options& o, int cases) {
  const double tol = pick_tolerance(o, 1e-10);
  RandomStream rng({o.seed, 1, 0, 0});
  double worst = 0.0;
  try {
    for (int c = 0; c < cases; ++c) {
      const double leak = rng.uniform() * 0.3;
      const double polar = rng.uniform() * kTwoPi;
      const double qubit = 1.0 - leak;
      QubitState start{qubit * (1.0 + std::cos(polar)) / 2.0, qubit * (1.0 - std::cos(polar)) / 2.0,
                       {qubit * std::sin(polar) / 2.0, 0.0}, leak};
      const double theta = 0.05 + rng.uniform() * (kTwoPi - 0.1);
      const auto n = static_cast<std::uint64_t>(1 + c % 8);

      QubitState repeated = start;
      for (std::uint64_t i = 0; i < n; ++i) repeated = o.gate_fn(repeated, GateSpec{theta});
      // The density-matrix action has period 2*pi in the angle.
      const QubitState once = o.gate_fn(start, GateSpec{wrap_angle(static_cast<double>(n) * theta)});
      worst = std::max({worst, std::fabs(repeated.rho00 - once.rho00),
                        std::fabs(repeated.rho11 - once.rho11), std::abs(repeated.rho01 - once.rho01),
                        std::fabs(repeated.leak - once.leak)});
    }
  } catch (const std::exception& e) {
    return {"gate-composition", false, INFINITY, tol, e.what()};
  }
  return finish("gate-composition", worst, tol);
}

Report check_poisson(const Options& o) {
  const double tol = pick_tolerance(o, 1e-12);
  double worst = 0.0;
  for (int m = 0; m <= 80; ++m) {
    const double mean = 0.5 * m;
    for (std::int64_t k = -1; k <= 60; ++k) {
      worst = std::max(worst, std::fabs(poisson_cdf(k, mean) - poisson_cdf_by_summation(k, mean)));
    }
  }
  return finish("poisson-cdf", worst, tol);
}

Report check_exactness(const Options& o, int cases) {
  const double tol = pick_tolerance(o, 1e-9);
  constexpr int kGenerations = 10;
  RandomStream rng({o.seed, 2, 0, 0});
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    const double theta = 0.1 + rng.uniform() * (kTwoPi - 0.2);
    const auto counts = expected_counts(theta, kGenerations, 1.0);
    const RpeResult r = estimate(std::span<const StepCounts>(counts));
    worst = std::max(worst, circular_distance(r.theta_est, theta));
  }
  return finish("estimator-exactness", worst, tol);
}

std::vector<Report> run_all(const Options& o) {
  return {check_simulator(o), check_composition(o), check_poisson(o), check_exactness(o)};
}

}  // namespace rpe::oracle
