#pragma once

// Self-contained SVG figures for sweep results. No scripts, fonts or links to
// external resources are emitted.

#include <optional>
#include <string>
#include <vector>

#include "rpe/harness.hpp"

namespace rpe::cli {

/// Failure rate with Wilson bars and the predicted-delta curve against one
/// axis, plus a dashed line at the 1/sqrt(8) bound and a marker where the
/// predicted delta crosses it.
std::string plot_failure_curve(const SweepResult& result, const std::string& title,
                               const std::string& x_label);

/// Two-axis sweep as a coloured cell grid (primary axis horizontal).
/// `bound_x`, when set, draws a vertical marker at that primary-axis value.
std::string plot_failure_grid(const SweepResult& result, const std::string& title,
                              const std::string& x_label, const std::string& y_label,
                              std::optional<double> bound_x);

struct HistogramPanel {
  std::string label;
  EstimateHistogram histogram;
};

/// One histogram per panel, stacked vertically, with dashed success bounds.
std::string plot_histograms(const std::vector<HistogramPanel>& panels, const std::string& title);

}  // namespace rpe::cli
