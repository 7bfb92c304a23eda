#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpe/config.hpp"
#include "rpe/harness.hpp"
#include "rpe/noise_models.hpp"
#include "rpe/oracles.hpp"
#include "rpe/sweep_io.hpp"
#include "svg_plot.hpp"

namespace rpe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kSections[] = {"trial",          "prep_curve",    "threads",      "calibrate",
                                 "sweep_detection", "sweep_prep",   "sweep_damping", "histogram",
                                 "oracle"};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

json read_config(const RunManifest& m) {
  if (!m.config_path) return json::object();
  std::ifstream in(*m.config_path);
  if (!in) throw ConfigError("cannot read config file " + m.config_path->string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(m.config_path->string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(m.config_path->string() + ": top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* s : kSections) known = known || key == s;
    if (!known) throw ConfigError(m.config_path->string() + ": unknown key '" + key + "'");
  }
  return doc;
}

json section(const json& doc, const char* name) {
  if (!doc.contains(name) || doc.at(name).is_null()) return json::object();
  if (!doc.at(name).is_object()) throw ConfigError(std::string(name) + " must be an object");
  return doc.at(name);
}

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// Command defaults, then the shared "trial" section, then the command's own
// "trial" section, then flags.
TrialConfig resolve_trial(const RunManifest& m, const json& doc, const json& sect, TrialConfig defaults) {
  TrialConfig c = trial_from_json(section(doc, "trial"), defaults);
  c = trial_from_json(section(sect, "trial"), c);
  if (m.seed) c.seed = *m.seed;
  if (m.strict) c.degenerate_mode = DegenerateMode::Strict;
  c.validate();
  return c;
}

unsigned resolve_threads(const RunManifest& m, const json& doc) {
  if (m.threads) return *m.threads;
  return value_or<unsigned>(doc, "threads", 0);
}

std::uint64_t resolve_trials(const RunManifest& m, const json& sect, const char* key, std::uint64_t fallback) {
  const std::uint64_t t = m.trials ? *m.trials : value_or<std::uint64_t>(sect, key, fallback);
  if (t < 1) throw ConfigError(std::string(key) + " must be at least 1");
  return t;
}

// Files are written under temporary names and renamed together on commit;
// anything not committed is removed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(partial(f), ec);
    if (!committed_) {
      for (const auto& f : renamed_) fs::remove(f, ec);
    }
  }

  void add(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path target = dir_ / name;
    files_.push_back(target);
    std::ofstream out(partial(target), std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + target.string());
  }

  std::vector<fs::path> commit() {
    for (const auto& f : files_) {
      fs::rename(partial(f), f);
      renamed_.push_back(f);
    }
    committed_ = true;
    return files_;
  }

 private:
  static fs::path partial(const fs::path& p) { return fs::path(p.string() + ".partial"); }

  fs::path dir_;
  std::vector<fs::path> files_;
  std::vector<fs::path> renamed_;
  bool committed_ = false;
};

void report_written(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
}

void print_points(std::ostream& out, const SweepResult& r) {
  for (const auto& p : r.points) {
    out << p.axis_name << "=" << fmt("%g", p.axis_value);
    if (p.secondary_axis_value) {
      out << " " << r.metadata.secondary_axis_name << "=" << fmt("%g", *p.secondary_axis_value);
    }
    out << " failures=" << p.failures << "/" << p.trials << " predicted_delta=" << fmt("%.4f", p.predicted_delta)
        << "\n";
  }
}

std::vector<double> values_or(const json& sect, const char* key, std::vector<double> fallback) {
  auto v = value_or(sect, key, std::move(fallback));
  if (v.empty()) throw ConfigError(std::string(key) + " must not be empty");
  return v;
}

// Per-gate damping strength at 0 dB. An explicit lambda_ref wins; otherwise it
// is chosen so the reference intensity gives the reference delta at the
// longest sequence.
double resolve_lambda_ref(const json& sect, const TrialConfig& trial) {
  if (sect.contains("lambda_ref") && !sect.at("lambda_ref").is_null()) {
    const double l = value_or<double>(sect, "lambda_ref", 0.0);
    if (!(l >= 0.0)) throw ConfigError("lambda_ref must be non-negative");
    return l;
  }
  const double ref_db = value_or<double>(sect, "reference_intensity_db", -20.0);
  const double ref_delta = value_or<double>(sect, "reference_delta", 0.40);
  const std::uint64_t longest = std::uint64_t{1} << trial.max_exponent;
  return lambda_for_delta(ref_delta, longest) / std::pow(10.0, ref_db / 10.0);
}

void check_grid(const TrialConfig& base, const SweepSpec& spec) {
  for (double v : spec.primary.values) {
    const TrialConfig c = materialize(base, spec.primary.axis, v, spec);
    c.validate();
    if (!spec.secondary) continue;
    for (double w : spec.secondary->values) materialize(c, spec.secondary->axis, w, spec).validate();
  }
}

struct Context {
  const RunManifest& manifest;
  std::ostream& out;
  std::ostream& err;
};

// Runs `f` and reclassifies anything it throws as a configuration error.
template <typename F>
auto configure(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

int cmd_calibrate(const Context& ctx) {
  struct Plan {
    TrialConfig trial;
    std::uint64_t trials;
    unsigned threads;
  };
  const Plan plan = configure([&] {
    const json doc = read_config(ctx.manifest);
    const json sect = section(doc, "calibrate");
    TrialConfig defaults;
    defaults.samples = 128;
    return Plan{resolve_trial(ctx.manifest, doc, sect, defaults), resolve_trials(ctx.manifest, sect, "trials", 1),
                resolve_threads(ctx.manifest, doc)};
  });

  const auto outcomes = run_trials(plan.trial, plan.trials, 0, plan.threads);
  const RpeResult& first = outcomes.front().result;
  std::uint64_t successes = 0;
  for (const auto& o : outcomes) successes += o.success ? 1 : 0;

  auto& out = ctx.out;
  out << "theta_est_rad: " << fmt("%.10f", first.theta_est) << "\n";
  out << "bound_rad: +/-" << fmt("%.10f", first.half_width) << "\n";
  out << "fractional_uncertainty: " << fmt("%.2f", 100.0 * first.half_width / first.theta_est) << "%\n";
  if (!first.degenerate_steps.empty()) {
    out << "degenerate_generations:";
    for (int j : first.degenerate_steps) out << " " << j;
    out << "\n";
  }
  out << "trials: " << plan.trials << "\n";
  out << "within_bound_of_reference: " << successes << "/" << plan.trials << "\n";
  return kOk;
}

enum class SweepKind { Detection, Prep, Damping };

int cmd_sweep(const Context& ctx, SweepKind kind) {
  struct Plan {
    TrialConfig trial;
    SweepSpec spec;
  };
  const char* name = kind == SweepKind::Detection ? "detection" : kind == SweepKind::Prep ? "prep" : "damping";
  const Plan plan = configure([&] {
    const json doc = read_config(ctx.manifest);
    const json sect = section(doc, kind == SweepKind::Detection ? "sweep_detection"
                                   : kind == SweepKind::Prep    ? "sweep_prep"
                                                                : "sweep_damping");
    TrialConfig defaults;
    SweepSpec spec;
    spec.prep_curve = prep_curve_from_json(section(doc, "prep_curve"));
    spec.prep_curve.validate();
    spec.threads = resolve_threads(ctx.manifest, doc);
    switch (kind) {
      case SweepKind::Detection: {
        defaults.noise.detector = DetectorModel{0.1, 19.0, 0.0121, 2};
        std::vector<double> thresholds;
        for (int t = 0; t <= 25; ++t) thresholds.push_back(t);
        spec.primary = {SweepAxis::Threshold, values_or(sect, "thresholds_photons", thresholds)};
        spec.trials_per_point = resolve_trials(ctx.manifest, sect, "trials_per_point", 100);
        break;
      }
      case SweepKind::Prep: {
        std::vector<double> times;
        for (int k = 0; k <= 11; ++k) times.push_back(0.40 + 0.05 * k);
        times.push_back(0.99);
        spec.primary = {SweepAxis::PrepTime, values_or(sect, "prep_times_us", times)};
        spec.secondary = AxisGrid{SweepAxis::Samples, values_or(sect, "samples", {4, 8, 16, 32, 64})};
        spec.trials_per_point = resolve_trials(ctx.manifest, sect, "trials_per_point", 25);
        break;
      }
      case SweepKind::Damping:
        spec.primary = {SweepAxis::LambdaDb, values_or(sect, "intensities_db", {-100, -26, -23, -20})};
        spec.trials_per_point = resolve_trials(ctx.manifest, sect, "trials_per_point", 100);
        break;
    }
    Plan p{resolve_trial(ctx.manifest, doc, sect, defaults), spec};
    if (kind == SweepKind::Damping) p.spec.lambda_ref = resolve_lambda_ref(sect, p.trial);
    check_grid(p.trial, p.spec);
    return p;
  });

  OutputSet files(ctx.manifest.output_dir);
  const SweepResult result = sweep(plan.trial, plan.spec);
  const std::string table = std::string(name) + ".csv";
  files.add(table, format_table(result));
  files.add(metadata_path(table).string(), format_metadata(result));
  if (ctx.manifest.plot) {
    std::string svg;
    switch (kind) {
      case SweepKind::Detection:
        svg = plot_failure_curve(result, "Failure rate vs detection threshold", "threshold (photons)");
        break;
      case SweepKind::Prep: {
        const PrepCurve& c = plan.spec.prep_curve;
        std::optional<double> bound;
        if (kDeltaBound > c.floor && c.amplitude > 0.0 && c.rate_per_us > 0.0) {
          bound = -std::log((kDeltaBound - c.floor) / c.amplitude) / c.rate_per_us;
        }
        svg = plot_failure_grid(result, "Failure rate vs preparation time and samples",
                                "preparation time (us)", "samples per sequence", bound);
        break;
      }
      case SweepKind::Damping:
        svg = plot_failure_curve(result, "Failure rate vs phase-damping intensity", "intensity (dB)");
        break;
    }
    files.add(std::string(name) + ".svg", svg);
  }
  const auto written = files.commit();

  if (kind == SweepKind::Damping) ctx.out << "lambda_ref: " << fmt("%.6g", plan.spec.lambda_ref) << "\n";
  print_points(ctx.out, result);
  report_written(ctx.out, written);
  return kOk;
}

int cmd_histogram(const Context& ctx) {
  struct Plan {
    TrialConfig trial;
    SweepSpec spec;  // damping axis and lambda_ref only
    std::uint64_t trials;
    std::size_t bins;
    double width;  // half-range in units of the claimed bound
  };
  const Plan plan = configure([&] {
    const json doc = read_config(ctx.manifest);
    const json sect = section(doc, "histogram");
    SweepSpec spec;
    spec.primary = {SweepAxis::LambdaDb, values_or(sect, "intensities_db", {-100, -26, -23, -20})};
    spec.threads = resolve_threads(ctx.manifest, doc);
    Plan p{resolve_trial(ctx.manifest, doc, sect, TrialConfig{}), spec,
           resolve_trials(ctx.manifest, sect, "trials_per_panel", 100), value_or<std::size_t>(sect, "bins", 64),
           value_or<double>(sect, "half_range_in_bounds", 4.0)};
    p.spec.lambda_ref = resolve_lambda_ref(sect, p.trial);
    if (p.bins < 1) throw ConfigError("bins must be at least 1");
    if (!(p.width > 0.0)) throw ConfigError("half_range_in_bounds must be positive");
    check_grid(p.trial, p.spec);
    return p;
  });

  const double half = claimed_half_width(plan.trial.max_exponent);
  const double lo = plan.trial.theta_ref - plan.width * half;
  const double hi = plan.trial.theta_ref + plan.width * half;

  std::vector<HistogramPanel> panels;
  std::ostringstream csv;
  csv << "intensity_db,bin_low_rad,bin_high_rad,count\n";
  // Panel p uses trial indices p*trials.., the same as cell p of a sweep over
  // the same grid, so default histograms show the sweep-damping trials.
  std::uint64_t first_index = 0;
  for (double db : plan.spec.primary.values) {
    const TrialConfig c = materialize(plan.trial, SweepAxis::LambdaDb, db, plan.spec);
    const auto outcomes = run_trials(c, plan.trials, first_index, plan.spec.threads);
    first_index += plan.trials;
    std::vector<RpeResult> results;
    for (const auto& o : outcomes) results.push_back(o.result);
    const EstimateHistogram h = failure_histogram(results, c.theta_ref, c.max_exponent, plan.bins, lo, hi);
    const double step = (hi - lo) / static_cast<double>(plan.bins);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      char line[160];
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%llu\n", db, lo + step * static_cast<double>(b),
                    lo + step * static_cast<double>(b + 1), static_cast<unsigned long long>(h.counts[b]));
      csv << line;
    }
    ctx.out << "intensity_db=" << fmt("%g", db) << " failures=" << h.failures << "/" << h.total;
    if (h.failures_within_twice) ctx.out << " within_twice_bound=" << fmt("%.3f", *h.failures_within_twice);
    ctx.out << "\n";
    panels.push_back({fmt("%g dB", db), h});
  }

  OutputSet files(ctx.manifest.output_dir);
  files.add("histogram.csv", csv.str());
  if (ctx.manifest.plot) files.add("histogram.svg", plot_histograms(panels, "Final estimates by damping intensity"));
  report_written(ctx.out, files.commit());
  return kOk;
}

int cmd_oracle(const Context& ctx) {
  const oracle::Options options = configure([&] {
    const json doc = read_config(ctx.manifest);
    const json sect = section(doc, "oracle");
    oracle::Options o;
    o.seed = value_or<std::uint64_t>(sect, "seed", o.seed);
    if (ctx.manifest.seed) o.seed = *ctx.manifest.seed;
    o.tolerance_override = value_or<double>(sect, "tolerance", 0.0);
    if (ctx.manifest.tolerance) o.tolerance_override = *ctx.manifest.tolerance;
    if (!(o.tolerance_override >= 0.0)) throw ConfigError("tolerance must be positive");
    return o;
  });

  const auto reports = oracle::run_all(options);
  const oracle::Report* first_failure = nullptr;
  for (const auto& r : reports) {
    ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_deviation=" << fmt("%.3e", r.max_deviation)
            << " tolerance=" << fmt("%.1e", r.tolerance);
    if (!r.detail.empty()) ctx.out << " (" << r.detail << ")";
    ctx.out << "\n";
    if (!r.passed && !first_failure) first_failure = &r;
  }
  if (first_failure) {
    ctx.err << "error: oracle '" << first_failure->name << "' failed\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int execute(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
  const Context ctx{manifest, out, err};
  try {
    switch (manifest.command) {
      case Command::Calibrate: return cmd_calibrate(ctx);
      case Command::SweepDetection: return cmd_sweep(ctx, SweepKind::Detection);
      case Command::SweepPrep: return cmd_sweep(ctx, SweepKind::Prep);
      case Command::SweepDamping: return cmd_sweep(ctx, SweepKind::Damping);
      case Command::Histogram: return cmd_histogram(ctx);
      case Command::Oracle: return cmd_oracle(ctx);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kRuntimeError;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust phase estimation simulator"};
  app.require_subcommand(1, 1);

  RunManifest m;
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  unsigned threads = 0;
  double tolerance = 0.0;

  const std::pair<const char*, Command> commands[] = {
      {"calibrate", Command::Calibrate},         {"sweep-detection", Command::SweepDetection},
      {"sweep-prep", Command::SweepPrep},         {"sweep-damping", Command::SweepDamping},
      {"histogram", Command::Histogram},          {"oracle", Command::Oracle}};
  const char* descriptions[] = {"single calibration of the gate angle",
                                "failure rate vs detection threshold",
                                "failure rate vs preparation time and samples",
                                "failure rate vs phase-damping intensity",
                                "histograms of final estimates by damping intensity",
                                "brute-force cross-checks"};

  std::vector<CLI::Option*> seed_opts, trials_opts, threads_opts, tol_opts;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, descriptions[i]);
    const Command cmd = commands[i].second;
    sub->callback([&m, cmd] { m.command = cmd; });
    sub->add_option("--config", config, "JSON config document")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    seed_opts.push_back(sub->add_option("--seed", seed, "master seed, overrides the config"));
    trials_opts.push_back(sub->add_option("--trials", trials, "trials per point")->check(CLI::PositiveNumber));
    threads_opts.push_back(sub->add_option("--threads", threads, "worker threads (0 = all cores)"));
    tol_opts.push_back(sub->add_option("--tolerance", tolerance, "oracle tolerance override"));
    sub->add_flag("--plot", m.plot, "also write an SVG plot");
    sub->add_flag("--strict", m.strict, "treat indeterminate step angles as errors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    // A missing config file is a configuration error, like any other bad flag.
    return kConfigError;
  }

  auto any = [](const std::vector<CLI::Option*>& opts) {
    for (auto* o : opts) {
      if (o->count() > 0) return true;
    }
    return false;
  };
  if (!config.empty()) m.config_path = config;
  m.output_dir = out_dir;
  if (any(seed_opts)) m.seed = seed;
  if (any(trials_opts)) m.trials = trials;
  if (any(threads_opts)) m.threads = threads;
  if (any(tol_opts)) m.tolerance = tolerance;
  return execute(m, out, err);
}

}  // namespace rpe::cli
