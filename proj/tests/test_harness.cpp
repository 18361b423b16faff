#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qrc/config.hpp"
#include "qrc/harness.hpp"

using namespace qrc;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qrc_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig tiny_stqm_config(const std::string& out_dir) {
  ExperimentConfig config = parse_config(
      "task = stqm\n"
      "n = 1\n"
      "m = 1\n"
      "tau = 0\n"
      "dt = 8.0\n"
      "preparation = 2\n"
      "training = 3\n"
      "test = 2\n"
      "de_max_generations = 2\n"
      "de_population = 8\n"
      "realizations = 2\n"
      "seed = 7\n");
  config.out_dir = out_dir;
  return config;
}

}  // namespace

TEST_CASE("key=value config parsing with defaults and comments") {
  const ExperimentConfig config = parse_config(
      "# a comment line\n"
      "task = stqm   # trailing comment\n"
      "n = 5\n"
      "tau = 1\n");
  CHECK(config.task == "stqm");
  CHECK(config.n == 5);
  CHECK(config.m == 1);
  CHECK(config.tau == 1);
  CHECK(config.omega0 == doctest::Approx(0.25));
  CHECK(config.g_max == doctest::Approx(0.2));
  CHECK(config.rho_limit == doctest::Approx(0.99));
  CHECK(config.preparation == 40);
  CHECK(config.training == 80);
  CHECK(config.test == 40);
  CHECK(config.dt < 0);
  CHECK(config.realizations == 10);
  CHECK(config.seed == 1);
}

TEST_CASE("json config parsing shares the key vocabulary") {
  const ExperimentConfig config = parse_config(
      R"({"task": "entropy", "triplets": 4, "taus": [0, 2], "seed": 42, "ridge_lambda": 1e-6})");
  CHECK(config.task == "entropy");
  CHECK(config.triplets == 4);
  CHECK(config.taus == std::vector<int>{0, 2});
  CHECK(config.seed == 42);
  CHECK(config.ridge_lambda == doctest::Approx(1e-6));
  CHECK(config.preparation == 500);
  CHECK(config.training == 2000);
  CHECK(config.test == 500);
  CHECK(config.n == 8);  // two reservoir nodes per triplet
}

TEST_CASE("config errors carry line numbers and key names") {
  CHECK_THROWS_WITH_AS(parse_config("task = stqm\nn = 3\nbogus_key = 1\n"),
                       doctest::Contains("bogus_key"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config("task = stqm\nn = not_a_number\n"), doctest::Contains("line 2"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config("task = stqm\nn\n"), doctest::Contains("line 2"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config("task = stqm\nn = -3\n"), doctest::Contains("'n'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config("task = juggling\nn = 3\n"), doctest::Contains("juggling"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config("n = 3\n"), doctest::Contains("task"), std::invalid_argument);
  CHECK_THROWS(parse_config("{\"task\": \"stqm\", \"n\": 3, \"bogus\": 1}"));
  CHECK_THROWS(parse_config("{\"task\" \"stqm\"}"));
}

TEST_CASE("canonical config hashing is stable and order independent") {
  const ExperimentConfig a = parse_config("task = stqm\nn = 4\ntau = 1\nseed = 3\n");
  const ExperimentConfig b = parse_config("seed = 3\ntau = 1\nn = 4\ntask = stqm\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(canonical_config(a) == canonical_config(b));

  ExperimentConfig c = a;
  c.seed = 4;
  CHECK(config_hash(c) != config_hash(a));

  // The realization count and output directory do not change the experiment.
  ExperimentConfig d = a;
  d.realizations = 99;
  d.out_dir = "/elsewhere";
  CHECK(config_hash(d) == config_hash(a));
}

TEST_CASE("task settings inherit config overrides") {
  const ExperimentConfig config =
      parse_config("task = qce\nn = 3\ndt = 12.5\ng_max = 0.3\nde_stall = 5\npreparation = 7\n");
  const TaskSettings settings = to_task_settings(config);
  CHECK(settings.g_max == doctest::Approx(0.3));
  CHECK(settings.phases.preparation == 7);
  CHECK(settings.phases.training == 80);
  CHECK(settings.de.stall_generations == 5);
  CHECK(settings.de.init_hi == doctest::Approx(0.3));
  REQUIRE(settings.dt_candidates.size() == 1);
  CHECK(settings.dt_candidates[0] == doctest::Approx(12.5));
  CHECK(settings.qce_dt == doctest::Approx(12.5));
}

TEST_CASE("box stats use linear quartile interpolation") {
  const BoxStats stats = box_stats({5.0, 1.0, 4.0, 2.0, 3.0});
  CHECK(stats.min == doctest::Approx(1.0));
  CHECK(stats.q1 == doctest::Approx(2.0));
  CHECK(stats.median == doctest::Approx(3.0));
  CHECK(stats.q3 == doctest::Approx(4.0));
  CHECK(stats.max == doctest::Approx(5.0));

  const BoxStats pair = box_stats({0.0, 1.0});
  CHECK(pair.q1 == doctest::Approx(0.25));
  CHECK(pair.median == doctest::Approx(0.5));
  CHECK(pair.q3 == doctest::Approx(0.75));

  const BoxStats single = box_stats({2.0});
  CHECK(single.min == doctest::Approx(2.0));
  CHECK(single.max == doctest::Approx(2.0));
  CHECK_THROWS(box_stats({}));
}

TEST_CASE("series normalization and dataset ingestion") {
  CHECK_THROWS(normalize_series({1.0}));
  CHECK_THROWS(normalize_series({2.0, 2.0, 2.0}));
  const std::vector<double> normalized = normalize_series({10.0, 30.0, 20.0});
  CHECK(normalized[0] == doctest::Approx(0.0));
  CHECK(normalized[1] == doctest::Approx(1.0));
  CHECK(normalized[2] == doctest::Approx(0.5));

  TempDir dir("ingest");
  const std::string good = (dir.path / "good.txt").string();
  std::ofstream(good) << "12\n37\n 25 \n";
  const std::vector<double> series = ingest_santa_fe(good);
  REQUIRE(series.size() == 3);
  CHECK(series[0] == doctest::Approx(0.0));
  CHECK(series[1] == doctest::Approx(1.0));
  CHECK(series[2] == doctest::Approx(0.52));

  const std::string text = (dir.path / "text.txt").string();
  std::ofstream(text) << "12\nabc\n";
  CHECK_THROWS_WITH_AS(ingest_santa_fe(text), doctest::Contains(":2"), std::runtime_error);

  const std::string blank = (dir.path / "blank.txt").string();
  std::ofstream(blank) << "12\n\n14\n";
  CHECK_THROWS_WITH_AS(ingest_santa_fe(blank), doctest::Contains(":2"), std::runtime_error);

  const std::string constant = (dir.path / "constant.txt").string();
  std::ofstream(constant) << "9\n9\n9\n";
  CHECK_THROWS(ingest_santa_fe(constant));

  CHECK_THROWS(ingest_santa_fe((dir.path / "missing.txt").string()));
}

TEST_CASE("synthetic laser series is deterministic, quantized and collapsing") {
  const std::vector<double> a = synthetic_laser_series(600, 5);
  const std::vector<double> b = synthetic_laser_series(600, 5);
  CHECK(a == b);
  const std::vector<double> c = synthetic_laser_series(600, 6);
  CHECK(a != c);

  double lo = 1e9;
  double hi = -1e9;
  for (const double v : a) {
    CHECK(v == doctest::Approx(std::round(v)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 255.0);
  CHECK(hi - lo > 50.0);  // pulsation spread, not a flat line

  // Collapses: large drops between consecutive envelope peaks should occur.
  int big_drops = 0;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i - 1] - a[i] > 60.0) ++big_drops;
  CHECK(big_drops > 3);
}

TEST_CASE("csv row round trip preserves every field") {
  ResultRow row;
  row.config_hash = 0xabcdef0123456789ULL;
  row.task = "stqm";
  row.realization = 3;
  row.seed = 1234567890123ULL;
  row.n = 5;
  row.m = 2;
  row.tau = 1;
  row.advance = 4;
  row.spatial = 2;
  row.temporal = 3;
  row.dt = 25.132741228718345;
  row.figure_of_merit = 0.9931;
  row.cost = 1e-7;
  row.generations = 42;

  TempDir dir("csv");
  const std::string path = (dir.path / "rows.csv").string();
  std::ofstream(path) << results_csv_header() << "\n" << to_csv_line(row) << "\n";
  const std::vector<ResultRow> rows = read_results_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].config_hash == row.config_hash);
  CHECK(rows[0].task == row.task);
  CHECK(rows[0].realization == row.realization);
  CHECK(rows[0].seed == row.seed);
  CHECK(rows[0].dt == row.dt);
  CHECK(rows[0].figure_of_merit == row.figure_of_merit);
  CHECK(rows[0].cost == row.cost);
  CHECK(rows[0].generations == row.generations);
}

TEST_CASE("run_experiment writes deterministic, resumable artifacts") {
  TempDir dir_a("run_a");
  const ExperimentConfig config_a = tiny_stqm_config(dir_a.path.string());
  const RunRecord first = run_experiment(config_a);
  CHECK(first.executed == 2);
  CHECK(first.skipped == 0);
  REQUIRE(first.rows.size() == 2);
  CHECK(first.rows[0].task == "stqm");
  CHECK(first.rows[0].seed != first.rows[1].seed);
  CHECK(fs::exists(first.results_path));
  CHECK(fs::exists(first.summary_path));
  CHECK(fs::exists(first.record_path));
  const std::string bytes_first = read_file(first.results_path);

  // Re-running computes nothing and leaves the results byte-identical.
  const RunRecord again = run_experiment(config_a);
  CHECK(again.executed == 0);
  CHECK(again.skipped == 2);
  CHECK(read_file(again.results_path) == bytes_first);

  // An independent fresh run reproduces the same bytes.
  TempDir dir_b("run_b");
  ExperimentConfig config_b = tiny_stqm_config(dir_b.path.string());
  const RunRecord fresh = run_experiment(config_b);
  CHECK(read_file(fresh.results_path) == bytes_first);

  // Raising the realization count reuses the finished ones.
  config_b.realizations = 4;
  const RunRecord extended = run_experiment(config_b);
  CHECK(extended.skipped == 2);
  CHECK(extended.executed == 2);
  CHECK(extended.rows.size() == 4);
  const std::string bytes_extended = read_file(extended.results_path);
  CHECK(bytes_extended.rfind(bytes_first, 0) == 0);  // strict append

  // A torn final line from an interrupted flush is dropped and recomputed.
  {
    std::ofstream torn(extended.results_path, std::ios::app);
    torn << "deadbeef,stqm,4,99";
  }
  const RunRecord repaired = run_experiment(config_b);
  CHECK(repaired.skipped == 4);
  CHECK(repaired.executed == 0);
  CHECK(read_file(repaired.results_path) == bytes_extended);

  // Summary has one line per parameter group.
  const std::string summary = read_file(extended.summary_path);
  CHECK(summary.rfind("task,n,m,tau", 0) == 0);
}

TEST_CASE("run_experiment matches itself under a worker pool") {
  TempDir serial_dir("serial");
  TempDir pooled_dir("pooled");
  ExperimentConfig serial = tiny_stqm_config(serial_dir.path.string());
  ExperimentConfig pooled = tiny_stqm_config(pooled_dir.path.string());
  serial.realizations = 3;
  pooled.realizations = 3;
  const RunRecord a = run_experiment(serial, 1);
  const RunRecord b = run_experiment(pooled, 3);
  CHECK(read_file(a.results_path) == read_file(b.results_path));
}

TEST_CASE("baseline figures are defined for the fidelity tasks") {
  const double qce = baseline_figure("qce", 11, 400);
  CHECK(qce > 0.05);
  CHECK(qce < 0.6);
  CHECK(baseline_figure("qce", 11, 400) == qce);
  const double prep = baseline_figure("state_preparation", 11, 400);
  CHECK(prep > 0.0);
  CHECK(prep <= 1.0);
  CHECK_THROWS(baseline_figure("entangler", 11, 100));
}
