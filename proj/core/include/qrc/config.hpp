#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrc/tasks.hpp"

namespace qrc {

/// Declarative experiment description. Fields left at their sentinel values
/// are resolved to task-dependent defaults by finalize_config.
struct ExperimentConfig {
  std::string task;
  int n = -1;
  int m = 1;
  int tau = 0;
  int advance = 0;
  int spatial = 1;
  int temporal = 1;
  int channel_nodes = 2;
  int triplets = 10;
  std::vector<int> taus;  // entropy delays; empty -> 0..5

  double dt = -1.0;  // fixed interaction time; negative -> scan
  int realizations = 10;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string dataset;  // Santa Fe file; empty -> env dir or synthetic

  double omega0 = 0.25;
  double g_max = 0.2;
  double rho_limit = 0.99;
  double channel_rho_limit = 0.95;
  double ridge_lambda = 1e-8;
  int preparation = -1;  // -1 -> 40 (500 for entropy)
  int training = -1;     // -1 -> 80 (2000 for entropy)
  int test = -1;         // -1 -> 40 (500 for entropy)

  int de_population = 0;  // 0 -> 30 * N * M_eff
  int de_max_generations = 300;
  double de_f_tol = 1e-6;
  double de_x_tol = 1e-4;
  int de_stall = 12;
};

/// Parses `key = value` lines (# comments) or, when the text starts with
/// '{', a JSON object with the same keys. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);

/// parse_config over the contents of a file.
ExperimentConfig load_config(const std::string& path);

/// Resolves sentinel fields to task defaults and validates the result.
void finalize_config(ExperimentConfig& config);

/// Canonical sorted key=value rendering of a finalized config.
std::string canonical_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical rendering.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Task-layer settings bundle for the configured experiment.
TaskSettings to_task_settings(const ExperimentConfig& config);

}  // namespace qrc
