#pragma once

// Counter-based random streams.
//
// Every Monte Carlo draw in the project comes from a Philox4x32-10 block
// cipher keyed by the master seed and addressed by a (trial, generation,
// sequence) tuple. A stream therefore depends only on its address, never on
// the order in which other streams were consumed, which is what makes sweeps
// bit-reproducible under any thread count.

#include <array>
#include <cstdint>
#include <limits>

namespace rpe {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Identifies one independent stream of random numbers.
struct StreamAddress {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint32_t generation = 0;
  std::uint32_t sequence = 0;  // 0 = from |0>, 1 = from |+>
};

/// UniformRandomBitGenerator over a single Philox stream. Copying a stream
/// copies its position.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(const StreamAddress& address);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  void refill();

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

/// Poisson variate. Inversion by sequential search for small means,
/// transformed rejection (Hormann's PTRS) above that.
std::uint32_t sample_poisson(double mean, RandomStream& rng);

/// True with probability p.
bool sample_bernoulli(double p, RandomStream& rng);

}  // namespace rpe
