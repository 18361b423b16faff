#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qrc/de.hpp"
#include "qrc/engine.hpp"
#include "qrc/gaussian.hpp"
#include "qrc/network.hpp"

namespace qrc {

/// Shared experiment knobs with the documented defaults.
struct TaskSettings {
  double omega0 = 0.25;
  double g_max = 0.2;
  double rho_limit = 0.99;
  double channel_rho_limit = 0.95;
  PhasePlan phases;
  DEConfig de;
  Interval n_th_range{0.0, 10.0};
  Interval r_range{0.0, 1.0};
  std::vector<double> dt_candidates;  // empty -> {2,4,6,8} * pi / omega0
  double qce_dt = -1.0;               // negative -> 1.5 * pi / omega0
  double ridge_lambda = 1e-8;
};

struct TaskResult {
  std::string task;
  int n = 0;
  int m = 0;
  int tau = 0;
  int advance = 0;
  int spatial = 1;
  int temporal = 1;
  double dt = 0.0;
  double figure_of_merit = 0.0;
  double cost_at_convergence = 0.0;
  int generations = 0;
  CouplingVector coupling;
};

/// Interaction-time grid scanned by the delay tasks.
std::vector<double> dt_scan(const TaskSettings& settings);

/// Joint propagator blocks for a reservoir driven through the given
/// couplings at interaction time dt.
PropagatorBlocks make_blocks(const NetworkSpec& reservoir,
                             const CouplingVector& coupling, double omega0,
                             double dt);

/// Memory-task training cost. Delay zero rewards D close to the identity
/// while penalizing vanishing couplings; positive delays reward
/// C A^(tau-1) B close to the identity with suppressed direct feedthrough.
double stqm_cost(const PropagatorBlocks& blocks, int tau,
                 const CouplingVector& coupling);

/// Trains the reservoir-input couplings for the delay-tau memory task over
/// the interaction-time grid, then scores mean test-phase fidelity between
/// the output at step m and the input at step m - tau.
TaskResult train_stqm(const NetworkSpec& reservoir, int m, int tau,
                      const TaskSettings& settings, Rng& rng);

/// Effective propagator of channel followed by reservoir, treated as one
/// enlarged reservoir over (channel modes; reservoir modes).
PropagatorBlocks compose_channel(const PropagatorBlocks& channel,
                                 const PropagatorBlocks& reservoir);

/// Channel equalization: trains the reservoir to invert a random fading
/// channel, with `spatial` parallel copies of each input and `temporal`
/// consecutive injections per logical step. Figure of merit is the mean
/// test-phase fidelity of the first recovered output mode.
TaskResult run_qce(const NetworkSpec& reservoir, int channel_nodes,
                   int spatial, int temporal, const TaskSettings& settings,
                   Rng& rng);

/// Entangler: vacuum inputs; trains couplings to maximize the mean
/// logarithmic negativity between outputs k and k - tau.
TaskResult run_entangler(const NetworkSpec& reservoir, int tau,
                         const TaskSettings& settings, Rng& rng);

/// Predictive state preparation: thermal inputs following the series,
/// squeezed-vacuum targets advanced by `advance` steps.
TaskResult run_state_preparation(const NetworkSpec& reservoir, int advance,
                                 const std::vector<double>& series,
                                 const TaskSettings& settings, Rng& rng);

/// Disjoint triplet topology for entropy detection: `triplets` groups of two
/// reservoir nodes and one input mode, fully connected within a group.
struct TripletTopology {
  NetworkSpec reservoir;
  CouplingVector coupling;
};
TripletTopology random_triplet_topology(int triplets, double g_max,
                                        double omega0, Rng& rng);

/// Quadratic feature map: products of distinct pairs of the first row of the
/// reservoir covariance, plus a trailing bias feature.
Vec entropy_feature_map(const Mat& reservoir_cov);

/// Ridge least-squares readout and its quality measure.
Vec train_linear_readout(const Mat& features, const Vec& targets,
                         double ridge_lambda = 1e-8);
double nmse(const Vec& predicted, const Vec& actual);

struct EntropyResult {
  int tau = 0;
  double dt = 0.0;
  double nmse_entropy = 0.0;
  double nmse_determinant = 0.0;
};

/// Von Neumann entropy detection with an untrained Hamiltonian and a trained
/// quadratic readout, one result per requested delay.
std::vector<EntropyResult> run_entropy_detection(const std::vector<int>& taus,
                                                 const TaskSettings& settings,
                                                 Rng& rng, int triplets = 10);

/// Monte Carlo mean fidelity between independent draws from two state
/// distributions; the random-guessing reference line.
using StateSampler = std::function<GaussianState(Rng&)>;
double random_guess_baseline(const StateSampler& sample_a,
                             const StateSampler& sample_b, int samples,
                             Rng& rng);

/// Baseline for the task input distribution (two independent draws).
double task_random_guess_baseline(const TaskSettings& settings, int samples,
                                  Rng& rng);

}  // namespace qrc
