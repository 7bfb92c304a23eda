#include <doctest.h>

#include <cmath>
#include <set>

#include "rpe/random.hpp"

using namespace rpe;

TEST_SUITE("random") {

TEST_CASE("philox known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams depend only on their address") {
  RandomStream a({7, 3, 2, 1});
  RandomStream b({7, 3, 2, 1});
  RandomStream other({7, 3, 2, 0});
  RandomStream unrelated({1, 0, 0, 0});
  for (int i = 0; i < 100; ++i) unrelated();
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != other();
  }
  CHECK(differs);
}

TEST_CASE("uniform lies in [0, 1) with the right mean") {
  RandomStream rng({1, 0, 0, 0});
  double sum = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / kN == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("poisson sampler mean and variance") {
  for (double mean : {0.0, 0.1, 2.5, 19.0, 45.0, 300.0}) {
    RandomStream rng({11, static_cast<std::uint64_t>(mean * 10), 0, 0});
    constexpr int kN = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < kN; ++i) {
      const double k = sample_poisson(mean, rng);
      s += k;
      s2 += k * k;
    }
    const double m = s / kN;
    const double var = s2 / kN - m * m;
    CAPTURE(mean);
    CHECK(std::fabs(m - mean) <= 5.0 * std::sqrt(std::max(mean, 1e-3) / kN) + 1e-12);
    if (mean > 0.0) CHECK(var == doctest::Approx(mean).epsilon(0.03));
  }
}

TEST_CASE("bernoulli edge cases") {
  RandomStream rng({2, 0, 0, 0});
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(sample_bernoulli(0.0, rng));
    CHECK(sample_bernoulli(1.0, rng));
  }
}

}  // TEST_SUITE
