#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrc/config.hpp"
#include "qrc/harness.hpp"
#include "qrc/version.hpp"

namespace {

int cmd_run(const std::string& config_path, bool has_seed, std::uint64_t seed, int realizations,
            const std::string& out_dir, int threads) {
  qrc::ExperimentConfig config = qrc::load_config(config_path);
  if (has_seed) config.seed = seed;
  if (realizations > 0) config.realizations = realizations;
  if (!out_dir.empty()) config.out_dir = out_dir;

  const qrc::RunRecord record = qrc::run_experiment(config, threads);
  std::printf("task %s: %d realization(s) computed, %d resumed, %.1f s\n", config.task.c_str(), record.executed,
              record.skipped, record.wall_seconds);
  std::printf("results: %s\n", record.results_path.c_str());
  std::printf("summary: %s\n", record.summary_path.c_str());
  std::printf("record:  %s\n", record.record_path.c_str());
  return 0;
}

int cmd_baseline(const std::string& task, std::uint64_t seed, int samples) {
  const double value = qrc::baseline_figure(task, seed, samples);
  std::printf("%s random-guess baseline (%d samples): %.6f\n", task.c_str(), samples, value);
  return 0;
}

int cmd_summarize(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<qrc::ResultRow> rows;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("results_", 0) != 0 || entry.path().extension() != ".csv") continue;
    ++files;
    for (qrc::ResultRow& row : qrc::read_results_csv(entry.path().string())) rows.push_back(std::move(row));
  }
  if (files == 0) {
    std::fprintf(stderr, "no results_*.csv files under '%s'\n", dir.c_str());
    return 1;
  }
  const std::string out = (fs::path(dir) / "summary_all.csv").string();
  qrc::write_summary_csv(rows, out);
  std::printf("%zu file(s), %zu row(s) -> %s\n", files, rows.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random oscillator networks for online quantum time-series processing"};
  app.set_version_flag("--version", std::string(qrc::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  bool has_seed = false;
  int realizations = 0;
  std::string out_dir;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (key = value lines, or JSON)")->required();
  run->add_option("--seed", seed, "Master seed override")->each([&has_seed](const std::string&) { has_seed = true; });
  run->add_option("--realizations", realizations, "Number of independent realizations");
  run->add_option("--out", out_dir, "Output directory override");
  run->add_option("--threads", threads, "Worker threads for realizations")->check(CLI::PositiveNumber);

  std::string baseline_task;
  std::uint64_t baseline_seed = 1;
  int baseline_samples = 10000;
  CLI::App* baseline = app.add_subcommand("baseline", "Print the random-guess baseline for a task");
  baseline->add_option("task", baseline_task, "Task name (stqm, qce, state_preparation)")->required();
  baseline->add_option("--seed", baseline_seed, "Sampling seed");
  baseline->add_option("--samples", baseline_samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);

  std::string record_dir;
  CLI::App* summarize = app.add_subcommand("summarize", "Aggregate box stats over a directory of results");
  summarize->add_option("dir", record_dir, "Directory containing results_*.csv files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, has_seed, seed, realizations, out_dir, threads);
    if (baseline->parsed()) return cmd_baseline(baseline_task, baseline_seed, baseline_samples);
    if (summarize->parsed()) return cmd_summarize(record_dir);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
