#pragma once

// JSON form of the run configuration. Keys carry their units; every key is
// optional and falls back to the library default.

#include <nlohmann/json.hpp>

#include "rpe/harness.hpp"

namespace rpe {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const DetectorModel& detector);
nlohmann::json to_json(const NoiseConfig& noise);
nlohmann::json to_json(const TrialConfig& config);
nlohmann::json to_json(const SweepSpec& spec);

/// Each reader starts from `defaults` and overrides the keys present.
DetectorModel detector_from_json(const nlohmann::json& j, const DetectorModel& defaults = {});
NoiseConfig noise_from_json(const nlohmann::json& j, const NoiseConfig& defaults = {});
TrialConfig trial_from_json(const nlohmann::json& j, const TrialConfig& defaults = {});
PrepCurve prep_curve_from_json(const nlohmann::json& j, const PrepCurve& defaults = {});

}  // namespace rpe
