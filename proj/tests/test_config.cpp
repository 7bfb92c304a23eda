#include <doctest.h>

#include "rpe/config.hpp"

using namespace rpe;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("trial config round trips through json") {
  TrialConfig c;
  c.max_exponent = 5;
  c.samples = 64;
  c.gate.theta_actual = 1.0;
  c.seed = 99;
  c.degenerate_mode = DegenerateMode::Strict;
  c.noise.prep_error = 0.1;
  c.noise.phase_damping_per_gate = 0.01;
  c.noise.plus_prep = PlusPrep::Ideal;
  c.noise.detector = DetectorModel{0.2, 18.0, 0.01, 3};
  const TrialConfig back = trial_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.noise == c.noise);
}

TEST_CASE("missing keys fall back to defaults") {
  const TrialConfig c = trial_from_json(json::object());
  CHECK(c.max_exponent == 7);
  CHECK(c.samples == 32);
  CHECK_FALSE(c.noise.detector);
  const NoiseConfig n = noise_from_json(json{{"detector", {{"threshold_photons", 17}}}});
  REQUIRE(n.detector);
  CHECK(n.detector->threshold == 17);
  CHECK(n.detector->bright_mean == 19.0);
  CHECK_FALSE(noise_from_json(json{{"detector", nullptr}}).detector);
}

TEST_CASE("bad values are config errors") {
  CHECK_THROWS_AS(trial_from_json(json{{"samples", "many"}}), ConfigError);
  CHECK_THROWS_AS(trial_from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(noise_from_json(json{{"plus_prep", "perfect"}}), ConfigError);
  CHECK_THROWS_AS(prep_curve_from_json(json{{"floor", true}}), ConfigError);
}

}  // TEST_SUITE
