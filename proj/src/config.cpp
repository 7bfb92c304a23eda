#include "rpe/config.hpp"

#include <string>

namespace rpe {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_null() && !j.is_object()) throw ConfigError(std::string(what) + " must be an object");
}

std::string plus_prep_name(PlusPrep p) { return p == PlusPrep::SelfPrep ? "self" : "ideal"; }

}  // namespace

json to_json(const DetectorModel& d) {
  return {{"dark_mean_photons", d.dark_mean},
          {"bright_mean_photons", d.bright_mean},
          {"bright_tail_fraction", d.bright_tail_fraction},
          {"threshold_photons", d.threshold}};
}

json to_json(const NoiseConfig& n) {
  return {{"prep_error", n.prep_error},
          {"phase_damping_per_gate", n.phase_damping_per_gate},
          {"plus_prep", plus_prep_name(n.plus_prep)},
          {"detector", n.detector ? to_json(*n.detector) : json(nullptr)}};
}

json to_json(const TrialConfig& c) {
  return {{"max_exponent", c.max_exponent},
          {"samples", c.samples},
          {"samples_schedule", c.samples_schedule},
          {"theta_actual_rad", c.gate.theta_actual},
          {"theta_ref_rad", c.theta_ref},
          {"seed", c.seed},
          {"strict", c.degenerate_mode == DegenerateMode::Strict},
          {"noise", to_json(c.noise)}};
}

json to_json(const SweepSpec& s) {
  json out = {{"axis", to_string(s.primary.axis)},
              {"values", s.primary.values},
              {"trials_per_point", s.trials_per_point},
              {"prep_curve",
               {{"amplitude", s.prep_curve.amplitude},
                {"rate_per_us", s.prep_curve.rate_per_us},
                {"floor", s.prep_curve.floor}}},
              {"lambda_ref", s.lambda_ref}};
  if (s.secondary) {
    out["secondary_axis"] = to_string(s.secondary->axis);
    out["secondary_values"] = s.secondary->values;
  }
  return out;
}

DetectorModel detector_from_json(const json& j, const DetectorModel& defaults) {
  require_object(j, "detector");
  DetectorModel d = defaults;
  d.dark_mean = get_or(j, "dark_mean_photons", d.dark_mean);
  d.bright_mean = get_or(j, "bright_mean_photons", d.bright_mean);
  d.bright_tail_fraction = get_or(j, "bright_tail_fraction", d.bright_tail_fraction);
  d.threshold = get_or(j, "threshold_photons", d.threshold);
  return d;
}

NoiseConfig noise_from_json(const json& j, const NoiseConfig& defaults) {
  require_object(j, "noise");
  NoiseConfig n = defaults;
  n.prep_error = get_or(j, "prep_error", n.prep_error);
  n.phase_damping_per_gate = get_or(j, "phase_damping_per_gate", n.phase_damping_per_gate);
  const auto prep = get_or(j, "plus_prep", plus_prep_name(n.plus_prep));
  if (prep == "self") {
    n.plus_prep = PlusPrep::SelfPrep;
  } else if (prep == "ideal") {
    n.plus_prep = PlusPrep::Ideal;
  } else {
    throw ConfigError("plus_prep must be \"self\" or \"ideal\", got \"" + prep + "\"");
  }
  if (j.is_object() && j.contains("detector")) {
    const json& d = j.at("detector");
    if (d.is_null()) {
      n.detector.reset();
    } else {
      n.detector = detector_from_json(d, n.detector.value_or(DetectorModel{}));
    }
  }
  return n;
}

TrialConfig trial_from_json(const json& j, const TrialConfig& defaults) {
  require_object(j, "trial");
  TrialConfig c = defaults;
  c.max_exponent = get_or(j, "max_exponent", c.max_exponent);
  c.samples = get_or(j, "samples", c.samples);
  c.samples_schedule = get_or(j, "samples_schedule", c.samples_schedule);
  c.gate.theta_actual = get_or(j, "theta_actual_rad", c.gate.theta_actual);
  c.theta_ref = get_or(j, "theta_ref_rad", c.theta_ref);
  c.seed = get_or(j, "seed", c.seed);
  if (get_or(j, "strict", c.degenerate_mode == DegenerateMode::Strict)) {
    c.degenerate_mode = DegenerateMode::Strict;
  } else {
    c.degenerate_mode = DegenerateMode::Flag;
  }
  if (j.is_object() && j.contains("noise")) c.noise = noise_from_json(j.at("noise"), c.noise);
  return c;
}

PrepCurve prep_curve_from_json(const json& j, const PrepCurve& defaults) {
  require_object(j, "prep_curve");
  PrepCurve p = defaults;
  p.amplitude = get_or(j, "amplitude", p.amplitude);
  p.rate_per_us = get_or(j, "rate_per_us", p.rate_per_us);
  p.floor = get_or(j, "floor", p.floor);
  return p;
}

}  // namespace rpe
