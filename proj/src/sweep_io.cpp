#include "rpe/sweep_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace rpe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 9> kColumns = {
    "axis_name", "axis_value", "secondary_axis_value", "trials", "failures",
    "failure_rate", "ci_low", "ci_high", "predicted_delta"};

std::string fmt(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& text, const fs::path& path, std::size_t row, const char* column) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw SweepIoError(path.string() + ": row " + std::to_string(row) + ": bad " + column +
                       " value '" + text + "'");
  }
  return value;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SweepIoError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SweepIoError(path.string() + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw SweepIoError(path.string() + ": write failed");
}

}  // namespace

fs::path metadata_path(const fs::path& table) {
  fs::path p = table;
  p += ".meta.json";
  return p;
}

std::string format_table(const SweepResult& r) {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    out += kColumns[i];
    out += i + 1 < kColumns.size() ? ',' : '\n';
  }
  for (const SweepPoint& p : r.points) {
    out += p.axis_name + ',' + fmt(p.axis_value) + ',' +
           (p.secondary_axis_value ? fmt(*p.secondary_axis_value) : std::string()) + ',' +
           std::to_string(p.trials) + ',' + std::to_string(p.failures) + ',' + fmt(p.failure_rate) +
           ',' + fmt(p.ci_low) + ',' + fmt(p.ci_high) + ',' + fmt(p.predicted_delta) + '\n';
  }
  return out;
}

std::string format_metadata(const SweepResult& r) {
  json gens = json::array();
  for (const SweepPoint& p : r.points) gens.push_back(p.failures_by_generation);
  json meta = {{"schema", r.metadata.schema},
               {"code_version", r.metadata.code_version},
               {"seed", r.metadata.seed},
               {"secondary_axis_name", r.metadata.secondary_axis_name},
               {"config", r.metadata.config},
               {"failures_by_generation", gens}};
  return meta.dump(2) + '\n';
}

void persist(const SweepResult& result, const fs::path& table) {
  if (result.points.empty()) throw SweepIoError(table.string() + ": refusing to persist an empty sweep");
  write_file(table, format_table(result));
  write_file(metadata_path(table), format_metadata(result));
}

SweepResult load(const fs::path& table) {
  const fs::path meta_path = metadata_path(table);
  json meta;
  try {
    meta = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    throw SweepIoError(meta_path.string() + ": " + e.what());
  }

  SweepResult r;
  try {
    r.metadata.schema = meta.at("schema").get<std::string>();
    if (r.metadata.schema != kSweepSchema) {
      throw SweepIoError(meta_path.string() + ": schema '" + r.metadata.schema + "', expected '" +
                         kSweepSchema + "'");
    }
    r.metadata.code_version = meta.at("code_version").get<std::string>();
    r.metadata.seed = meta.at("seed").get<std::uint64_t>();
    r.metadata.secondary_axis_name = meta.at("secondary_axis_name").get<std::string>();
    r.metadata.config = meta.at("config");
  } catch (const json::exception& e) {
    throw SweepIoError(meta_path.string() + ": " + e.what());
  }

  std::istringstream in(read_file(table));
  std::string line;
  if (!std::getline(in, line)) throw SweepIoError(table.string() + ": missing header row");
  const auto header = split_csv(line);
  if (header.size() != kColumns.size() ||
      !std::equal(header.begin(), header.end(), kColumns.begin())) {
    throw SweepIoError(table.string() + ": header does not match " + kSweepSchema + " columns");
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kColumns.size()) {
      throw SweepIoError(table.string() + ": row " + std::to_string(row) + " has " +
                         std::to_string(f.size()) + " fields, expected " +
                         std::to_string(kColumns.size()));
    }
    SweepPoint p;
    p.axis_name = f[0];
    p.axis_value = parse_field<double>(f[1], table, row, kColumns[1]);
    if (!f[2].empty()) p.secondary_axis_value = parse_field<double>(f[2], table, row, kColumns[2]);
    p.trials = parse_field<std::uint64_t>(f[3], table, row, kColumns[3]);
    p.failures = parse_field<std::uint64_t>(f[4], table, row, kColumns[4]);
    p.failure_rate = parse_field<double>(f[5], table, row, kColumns[5]);
    p.ci_low = parse_field<double>(f[6], table, row, kColumns[6]);
    p.ci_high = parse_field<double>(f[7], table, row, kColumns[7]);
    p.predicted_delta = parse_field<double>(f[8], table, row, kColumns[8]);
    if (p.failures > p.trials) {
      throw SweepIoError(table.string() + ": row " + std::to_string(row) + ": failures exceed trials");
    }
    r.points.push_back(std::move(p));
    ++row;
  }
  if (r.points.empty()) throw SweepIoError(table.string() + ": no data rows");

  const json& gens = meta.contains("failures_by_generation") ? meta.at("failures_by_generation") : json();
  if (!gens.is_array() || gens.size() != r.points.size()) {
    throw SweepIoError(meta_path.string() + ": failures_by_generation does not match table rows");
  }
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    r.points[i].failures_by_generation = gens[i].get<std::vector<std::uint64_t>>();
  }
  return r;
}

}  // namespace rpe
