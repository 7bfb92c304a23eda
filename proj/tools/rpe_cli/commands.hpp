#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace rpe::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

enum class Command { Calibrate, SweepDetection, SweepPrep, SweepDamping, Histogram, Oracle };

struct RunManifest {
  Command command = Command::Calibrate;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> threads;
  std::optional<double> tolerance;
  bool plot = false;
  bool strict = false;
};

/// Runs one command; never throws. Returns an ExitCode.
int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to execute(). Usage errors exit with kConfigError.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rpe::cli
