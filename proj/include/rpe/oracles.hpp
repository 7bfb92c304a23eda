#pragma once

// Independent cross-checks of the simulator, the Poisson CDF and the
// estimator. Nothing here reuses the code paths being checked: the simulator
// oracle evolves a full 3x3 complex density matrix (qubit plus leakage) with
// explicit Kraus operators, and the Poisson oracle sums in long double.

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rpe/qubit_sim.hpp"

namespace rpe::oracle {

using Matrix3 = std::array<std::array<std::complex<double>, 3>, 3>;

/// Density matrix in the basis {|0>, |1>, leakage} just before measurement.
Matrix3 evolve_density_matrix(std::uint64_t n, StartState start, double theta,
                              const NoiseConfig& noise);

double brute_force_bright_probability(std::uint64_t n, StartState start, double theta,
                                      const NoiseConfig& noise);

/// P(K <= k) by direct long double summation of the pmf.
double poisson_cdf_by_summation(std::int64_t k, double mean);

struct Report {
  std::string name;
  bool passed = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 20200101;
  GateFunction gate_fn = &apply_gate;
  /// Overrides every oracle's own tolerance when positive.
  double tolerance_override = 0.0;
};

/// n <= 8 random configurations: simulator bright probability vs the 3x3
/// brute force. Default tolerance 1e-10.
Report check_simulator(const Options& options, int configs = 50);

/// n gates of angle theta against one gate of angle n*theta. Default 1e-10.
Report check_composition(const Options& options, int cases = 50);

/// poisson_cdf vs long double summation over k <= 60, mean <= 40. Default 1e-12.
Report check_poisson(const Options& options);

/// Estimator on exact expected counts, L = 10, theta in (0.1, 2pi - 0.1).
/// Default 1e-9.
Report check_exactness(const Options& options, int cases = 1000);

std::vector<Report> run_all(const Options& options);

}  // namespace rpe::oracle
