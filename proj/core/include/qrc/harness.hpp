#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrc/config.hpp"

namespace qrc {

/// Five-number summary with R-7 quartile interpolation.
struct BoxStats {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};

BoxStats box_stats(std::vector<double> values);

/// Min-max normalization to [0, 1]. Throws on fewer than two samples or a
/// constant series.
std::vector<double> normalize_series(std::vector<double> raw);

/// Reads one integer sample per line and normalizes to [0, 1]. Blank lines
/// are rejected; parse failures report the offending line number.
std::vector<double> ingest_santa_fe(const std::string& path);

/// Deterministic stand-in for the chaotic-laser recording: pulse trains with
/// a slowly growing envelope and irregular intensity collapses, quantized to
/// the 0..255 range of the original measurement. Returned unnormalized.
std::vector<double> synthetic_laser_series(int length, std::uint64_t seed);

/// One figure-of-merit record, mirroring a line of the results CSV.
struct ResultRow {
  std::uint64_t config_hash = 0;
  std::string task;
  int realization = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int m = 0;
  int tau = 0;
  int advance = 0;
  int spatial = 0;
  int temporal = 0;
  double dt = 0;
  double figure_of_merit = 0;
  double cost = 0;
  int generations = 0;
};

std::string results_csv_header();
std::string to_csv_line(const ResultRow& row);
std::vector<ResultRow> read_results_csv(const std::string& path);

/// Groups rows by every parameter column except dt and writes one summary
/// line per group with box stats over the figure of merit.
void write_summary_csv(const std::vector<ResultRow>& rows, const std::string& path);

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::string version;
  double wall_seconds = 0;
  int executed = 0;  // realizations computed by this invocation
  int skipped = 0;   // realizations already present in the CSV
  std::vector<ResultRow> rows;  // cumulative, including resumed rows
  std::string results_path;
  std::string summary_path;
  std::string record_path;
};

/// Runs all realizations of the configured experiment. Appends to
/// results_<hash>.csv under config.out_dir (resuming past completed
/// realizations), then rewrites summary_<hash>.csv and record_<hash>.json.
/// Rows are flushed in realization order as soon as they complete.
RunRecord run_experiment(const ExperimentConfig& config, int threads = 1);

/// Paths used by run_experiment for a given config.
std::string results_path(const ExperimentConfig& config);
std::string summary_path(const ExperimentConfig& config);
std::string record_path(const ExperimentConfig& config);

/// Mean figure of merit for unoptimized random guessing on the given task.
double baseline_figure(const std::string& task, std::uint64_t seed, int samples);

}  // namespace qrc
