#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpe/sweep_io.hpp"

using namespace rpe;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rpe_io_" + std::to_string(std::rand()) + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static inline int counter = 0;
};

SweepResult small_sweep(bool two_axis) {
  TrialConfig base;
  base.noise.detector = DetectorModel{0.1, 19.0, 0.0121, 2};
  base.seed = 77;
  SweepSpec spec;
  spec.primary = {SweepAxis::Threshold, {2, 18, 21}};
  if (two_axis) spec.secondary = AxisGrid{SweepAxis::Samples, {8, 32}};
  spec.trials_per_point = 20;
  return sweep(base, spec);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_SUITE("sweep_io") {

TEST_CASE("round trip") {
  for (bool two : {false, true}) {
    TempDir dir;
    const SweepResult r = small_sweep(two);
    const fs::path table = dir.path / "t.csv";
    persist(r, table);
    CHECK(fs::exists(metadata_path(table)));
    const SweepResult back = load(table);
    CHECK(back == r);
    CHECK(format_table(back) == slurp(table));
  }
}

TEST_CASE("table layout") {
  const std::string t = format_table(small_sweep(false));
  CHECK(t.rfind("axis_name,axis_value,secondary_axis_value,trials,failures,failure_rate,ci_low,ci_high,"
                "predicted_delta\n",
                0) == 0);
  CHECK(t.find("threshold,2,,20,") != std::string::npos);
  const std::string meta = format_metadata(small_sweep(false));
  CHECK(meta.find("\"rpe-sweep-v1\"") != std::string::npos);
  CHECK(meta.find("\"seed\": 77") != std::string::npos);
}

TEST_CASE("empty sweeps are not persisted") {
  TempDir dir;
  CHECK_THROWS_AS(persist(SweepResult{}, dir.path / "t.csv"), SweepIoError);
  CHECK_FALSE(fs::exists(dir.path / "t.csv"));
}

TEST_CASE("missing failure column is a schema error") {
  TempDir dir;
  const fs::path table = dir.path / "t.csv";
  persist(small_sweep(false), table);
  std::stringstream in(slurp(table));
  std::string out, line;
  while (std::getline(in, line)) {
    // drop the fifth field
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (line.back() == ',') f.push_back("");
    f.erase(f.begin() + 4);
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += "\n";
  }
  spit(table, out);
  CHECK_THROWS_AS(load(table), SweepIoError);
}

TEST_CASE("schema mismatch and malformed files") {
  TempDir dir;
  const fs::path table = dir.path / "t.csv";
  persist(small_sweep(false), table);
  const std::string meta = slurp(metadata_path(table));

  std::string wrong = meta;
  wrong.replace(wrong.find("rpe-sweep-v1"), 12, "rpe-sweep-v9");
  spit(metadata_path(table), wrong);
  CHECK_THROWS_WITH_AS(load(table), doctest::Contains("rpe-sweep-v9"), SweepIoError);

  spit(metadata_path(table), meta);
  const std::string good = slurp(table);
  spit(table, good + "threshold,3,,10,11,1.1,0,1,0\n");
  CHECK_THROWS_AS(load(table), SweepIoError);

  spit(table, good);
  fs::remove(metadata_path(table));
  const std::string meta_name = metadata_path(table).string();
  CHECK_THROWS_WITH_AS(load(table), doctest::Contains(meta_name.c_str()), SweepIoError);
  CHECK_THROWS_AS(load(dir.path / "absent.csv"), SweepIoError);
}

}  // TEST_SUITE
