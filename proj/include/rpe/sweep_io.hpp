#pragma once

// "rpe-sweep-v1" result files: a CSV table plus a JSON metadata sidecar.
//
// Table columns, in order:
//   axis_name, axis_value, secondary_axis_value, trials, failures,
//   failure_rate, ci_low, ci_high, predicted_delta
// secondary_axis_value is empty for one-axis sweeps. Reals are written in
// shortest round-trip form, so a table reloads bit-exactly.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "rpe/harness.hpp"

namespace rpe {

struct SweepIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sidecar path for a table path: "<table>.meta.json".
std::filesystem::path metadata_path(const std::filesystem::path& table);

std::string format_table(const SweepResult& result);
std::string format_metadata(const SweepResult& result);

void persist(const SweepResult& result, const std::filesystem::path& table);
SweepResult load(const std::filesystem::path& table);

}  // namespace rpe
