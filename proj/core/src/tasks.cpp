#include "qrc/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qrc/rng.hpp"

namespace qrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Phase { kTraining, kTest };

bool in_phase(const PhasePlan& plan, Phase phase, int step) {
  // step is 1-based
  if (phase == Phase::kTraining)
    return step > plan.preparation && step <= plan.preparation + plan.training;
  return step > plan.preparation + plan.training;
}

/// Exact reservoir-covariance recursion for mutually independent inputs:
/// advances sigma_r one step and returns the emitted output covariance.
Mat push_covariance(const PropagatorBlocks& blocks, Mat& sigma_r,
                    const Mat& input_cov) {
  Mat out = blocks.c * sigma_r * blocks.c.transpose() +
            blocks.d * input_cov * blocks.d.transpose();
  sigma_r = blocks.a * sigma_r * blocks.a.transpose() +
            blocks.b * input_cov * blocks.b.transpose();
  sigma_r = (0.5 * (sigma_r + sigma_r.transpose())).eval();
  return out;
}

/// Covariance of `copies` uncorrelated modes sharing one 2x2 covariance,
/// in (q..q, p..p) ordering.
Mat replicate_cov(const Eigen::Matrix2d& single, int copies) {
  Mat out = Mat::Zero(2 * copies, 2 * copies);
  const Mat eye = Mat::Identity(copies, copies);
  out.topLeftCorner(copies, copies) = single(0, 0) * eye;
  out.topRightCorner(copies, copies) = single(0, 1) * eye;
  out.bottomLeftCorner(copies, copies) = single(1, 0) * eye;
  out.bottomRightCorner(copies, copies) = single(1, 1) * eye;
  return out;
}

Eigen::Matrix2d first_mode_cov(const Mat& cov, int modes) {
  Eigen::Matrix2d out;
  out << cov(0, 0), cov(0, modes), cov(modes, 0), cov(modes, modes);
  return out;
}

double resolved_qce_dt(const TaskSettings& settings) {
  return settings.qce_dt > 0.0 ? settings.qce_dt
                               : 1.5 * M_PI / settings.omega0;
}

/// Interaction strengths live in [0, g_max]; points outside are infeasible.
/// Without the upper bound the memory cost's 1/max(g) term rewards unbounded
/// coupling growth, which lowers the cost while ruining the trained map.
bool in_coupling_box(const CouplingVector& g, double g_max) {
  return g.strengths.minCoeff() >= 0.0 && g.strengths.maxCoeff() <= g_max;
}

/// The spectral-radius limit guards the starting points only. Evolved
/// candidates may cross it and are left to lose on merit where stability
/// actually matters; revival-type optima of the delay-zero memory task sit
/// exactly at the limit and a hard cut would wall them off.
///
/// Far past the limit the covariance recursion overflows before the cost can
/// rank the trial, so evolution still rejects candidates beyond this cap.
constexpr double kEvaluableRho = 1.1;

Candidate train_coupling(const CostFn& cost, const FeasibleFn& starts_stable,
                         const FeasibleFn& evaluable, int n, int m_eff,
                         const DEConfig& config, Rng& rng, int* generations) {
  OptimizeResult opt =
      optimize_population(init_population(n, m_eff, starts_stable, config, rng),
                          cost, evaluable, config, rng);
  if (generations) *generations = opt.generations;
  return std::move(opt.best);
}

}  // namespace

std::vector<double> dt_scan(const TaskSettings& settings) {
  if (!settings.dt_candidates.empty()) return settings.dt_candidates;
  std::vector<double> scan;
  for (int k = 1; k <= 4; ++k) scan.push_back(2.0 * M_PI * k / settings.omega0);
  return scan;
}

PropagatorBlocks make_blocks(const NetworkSpec& reservoir,
                             const CouplingVector& coupling, double omega0,
                             double dt) {
  const NetworkSpec joint = assemble_joint(reservoir, coupling, omega0);
  return partition_blocks(propagator(potential_matrix(joint), dt),
                          reservoir.num_nodes(), coupling.input_modes());
}

double stqm_cost(const PropagatorBlocks& blocks, int tau,
                 const CouplingVector& coupling) {
  if (tau < 0) throw std::invalid_argument("delay must be non-negative");
  const int dim = 2 * blocks.input_modes;
  const Mat eye = Mat::Identity(dim, dim);
  if (tau == 0) {
    const double strongest = coupling.strengths.maxCoeff();
    return (blocks.d - eye).norm() + 1.0 / strongest;
  }
  Mat path = blocks.c;
  for (int j = 0; j < tau - 1; ++j) path = path * blocks.a;
  return 0.5 * blocks.d.norm() + 5.0 * (path * blocks.b - eye).norm();
}

TaskResult train_stqm(const NetworkSpec& reservoir, int m, int tau,
                      const TaskSettings& settings, Rng& rng) {
  if (m < 1) throw std::invalid_argument("need at least one input mode");
  if (tau < 0) throw std::invalid_argument("delay must be non-negative");
  const int n = reservoir.num_nodes();

  double best_cost = kInf;
  double best_dt = 0.0;
  int best_generations = 0;
  CouplingVector best_coupling;
  for (const double dt : dt_scan(settings)) {
    const auto rho_for = [&](const CouplingVector& g) {
      return make_blocks(reservoir, g, settings.omega0, dt).rho_a;
    };
    const auto starts_stable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) &&
             rho_for(g) <= settings.rho_limit;
    };
    const auto evaluable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) && rho_for(g) <= kEvaluableRho;
    };
    const auto cost = [&](const CouplingVector& g) {
      return stqm_cost(make_blocks(reservoir, g, settings.omega0, dt), tau, g);
    };
    int generations = 0;
    const Candidate trained = train_coupling(cost, starts_stable, evaluable, n,
                                             m, settings.de, rng, &generations);
    if (trained.fitness < best_cost) {
      best_cost = trained.fitness;
      best_dt = dt;
      best_coupling = trained.coupling;
      best_generations = generations;
    }
  }

  const PropagatorBlocks blocks =
      make_blocks(reservoir, best_coupling, settings.omega0, best_dt);
  std::vector<GaussianState> inputs;
  inputs.reserve(settings.phases.total());
  for (int k = 0; k < settings.phases.total(); ++k)
    inputs.push_back(random_zero_mean_state(m, settings.n_th_range,
                                            settings.r_range, settings.omega0,
                                            rng));
  EngineState engine = initialize(reservoir, /*window_capacity=*/1);
  const SequenceOutputs outputs =
      run_sequence(engine, inputs, blocks, settings.phases);
  double sum = 0.0;
  const int offset = settings.phases.preparation + settings.phases.training;
  for (int i = 0; i < settings.phases.test; ++i) {
    const int step = offset + i + 1;
    sum += fidelity(outputs.test[i], inputs[step - tau - 1]);
  }

  TaskResult result;
  result.task = "stqm";
  result.n = n;
  result.m = m;
  result.tau = tau;
  result.dt = best_dt;
  result.figure_of_merit = sum / settings.phases.test;
  result.cost_at_convergence = best_cost;
  result.generations = best_generations;
  result.coupling = best_coupling;
  return result;
}

PropagatorBlocks compose_channel(const PropagatorBlocks& channel,
                                 const PropagatorBlocks& reservoir) {
  const int m = reservoir.input_modes;
  if (channel.input_modes != m)
    throw std::invalid_argument("channel width must match reservoir inputs");
  const int nc = channel.reservoir_modes;
  const int nr = reservoir.reservoir_modes;
  const int k = nc + nr + m;

  // Stacked layout (q_Ch p_Ch | q_R p_R | q_S p_S): channel acts first, the
  // reservoir then consumes the channel's output in place of the raw input.
  Mat stacked = Mat::Zero(2 * k, 2 * k);
  stacked.block(0, 0, 2 * nc, 2 * nc) = channel.a;
  stacked.block(0, 2 * (nc + nr), 2 * nc, 2 * m) = channel.b;
  stacked.block(2 * nc, 0, 2 * nr, 2 * nc) = reservoir.b * channel.c;
  stacked.block(2 * nc, 2 * nc, 2 * nr, 2 * nr) = reservoir.a;
  stacked.block(2 * nc, 2 * (nc + nr), 2 * nr, 2 * m) =
      reservoir.b * channel.d;
  stacked.block(2 * (nc + nr), 0, 2 * m, 2 * nc) = reservoir.d * channel.c;
  stacked.block(2 * (nc + nr), 2 * nc, 2 * m, 2 * nr) = reservoir.c;
  stacked.block(2 * (nc + nr), 2 * (nc + nr), 2 * m, 2 * m) =
      reservoir.d * channel.d;

  const auto global_index = [&](int idx) {
    if (idx < 2 * nc)
      return idx < nc ? idx : k + (idx - nc);
    if (idx < 2 * (nc + nr)) {
      const int local = idx - 2 * nc;
      return local < nr ? nc + local : k + nc + (local - nr);
    }
    const int local = idx - 2 * (nc + nr);
    return local < m ? nc + nr + local : k + nc + nr + (local - m);
  };
  Mat s_global(2 * k, 2 * k);
  for (int r = 0; r < 2 * k; ++r)
    for (int c = 0; c < 2 * k; ++c)
      s_global(global_index(r), global_index(c)) = stacked(r, c);
  return partition_blocks(s_global, nc + nr, m);
}

TaskResult run_qce(const NetworkSpec& reservoir, int channel_nodes,
                   int spatial, int temporal, const TaskSettings& settings,
                   Rng& rng) {
  if (spatial < 1 || temporal < 1)
    throw std::invalid_argument("multiplexing factors must be >= 1");
  const int n = reservoir.num_nodes();
  const int m_eff = spatial;
  const double dt = resolved_qce_dt(settings);

  const ChannelDraw channel =
      random_channel(channel_nodes, m_eff, settings.channel_rho_limit, dt,
                     settings.g_max, settings.omega0, rng);

  const int logical = settings.phases.total();
  std::vector<Eigen::Matrix2d> input_covs;
  input_covs.reserve(logical);
  for (int k = 0; k < logical; ++k)
    input_covs.push_back(random_zero_mean_state(1, settings.n_th_range,
                                                settings.r_range,
                                                settings.omega0, rng)
                             .covariance);

  const Mat initial_cov =
      tensor(network_ground_state(channel.spec), network_ground_state(reservoir))
          .covariance;

  const auto composed_for = [&](const CouplingVector& g) {
    return compose_channel(channel.blocks,
                           make_blocks(reservoir, g, settings.omega0, dt));
  };
  const auto phase_mean_fidelity = [&](const PropagatorBlocks& effective,
                                       Phase phase) {
    Mat sigma = initial_cov;
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < logical; ++k) {
      const Mat injected = replicate_cov(input_covs[k], m_eff);
      Mat out;
      for (int t = 0; t < temporal; ++t)
        out = push_covariance(effective, sigma, injected);
      if (in_phase(settings.phases, phase, k + 1)) {
        sum += fidelity_single_mode(first_mode_cov(out, m_eff), input_covs[k]);
        ++count;
      }
    }
    return count > 0 ? sum / count : 0.0;
  };

  const auto starts_stable = [&](const CouplingVector& g) {
    return in_coupling_box(g, settings.g_max) &&
           composed_for(g).rho_a <= settings.rho_limit;
  };
  const auto evaluable = [&](const CouplingVector& g) {
    return in_coupling_box(g, settings.g_max) &&
           composed_for(g).rho_a <= kEvaluableRho;
  };
  const auto cost = [&](const CouplingVector& g) {
    return -phase_mean_fidelity(composed_for(g), Phase::kTraining);
  };
  int generations = 0;
  const Candidate trained = train_coupling(cost, starts_stable, evaluable, n,
                                           m_eff, settings.de, rng,
                                           &generations);

  TaskResult result;
  result.task = "qce";
  result.n = n;
  result.m = 1;
  result.spatial = spatial;
  result.temporal = temporal;
  result.dt = dt;
  result.figure_of_merit =
      phase_mean_fidelity(composed_for(trained.coupling), Phase::kTest);
  result.cost_at_convergence = trained.fitness;
  result.generations = generations;
  result.coupling = trained.coupling;
  return result;
}

TaskResult run_entangler(const NetworkSpec& reservoir, int tau,
                         const TaskSettings& settings, Rng& rng) {
  if (tau < 1) throw std::invalid_argument("delay must be at least 1");
  const int n = reservoir.num_nodes();
  const GaussianState vacuum = vacuum_state(1, settings.omega0);
  const PhasePlan& plan = settings.phases;

  const auto mean_negativity = [&](const PropagatorBlocks& blocks,
                                   Phase phase) {
    const int last = phase == Phase::kTraining
                         ? plan.preparation + plan.training
                         : plan.total();
    EngineState engine = initialize(reservoir, tau + 1);
    double sum = 0.0;
    int count = 0;
    for (int step_index = 1; step_index <= last; ++step_index) {
      step(engine, vacuum, blocks);
      if (in_phase(plan, phase, step_index) && step_index - tau >= 1) {
        const GaussianState pair =
            joint_delayed_output(engine, step_index, tau);
        sum += log_negativity_two_mode(pair.covariance);
        ++count;
      }
    }
    return count > 0 ? sum / count : 0.0;
  };

  double best_fitness = kInf;
  double best_dt = 0.0;
  int best_generations = 0;
  CouplingVector best_coupling;
  for (const double dt : dt_scan(settings)) {
    const auto rho_for = [&](const CouplingVector& g) {
      return make_blocks(reservoir, g, settings.omega0, dt).rho_a;
    };
    const auto starts_stable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) &&
             rho_for(g) <= settings.rho_limit;
    };
    const auto evaluable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) && rho_for(g) <= kEvaluableRho;
    };
    const auto cost = [&](const CouplingVector& g) {
      return -mean_negativity(make_blocks(reservoir, g, settings.omega0, dt),
                              Phase::kTraining);
    };
    int generations = 0;
    const Candidate trained = train_coupling(cost, starts_stable, evaluable, n,
                                             1, settings.de, rng, &generations);
    if (trained.fitness < best_fitness) {
      best_fitness = trained.fitness;
      best_dt = dt;
      best_coupling = trained.coupling;
      best_generations = generations;
    }
  }

  TaskResult result;
  result.task = "entangler";
  result.n = n;
  result.m = 1;
  result.tau = tau;
  result.dt = best_dt;
  result.figure_of_merit = mean_negativity(
      make_blocks(reservoir, best_coupling, settings.omega0, best_dt),
      Phase::kTest);
  result.cost_at_convergence = best_fitness;
  result.generations = best_generations;
  result.coupling = best_coupling;
  return result;
}

TaskResult run_state_preparation(const NetworkSpec& reservoir, int advance,
                                 const std::vector<double>& series,
                                 const TaskSettings& settings, Rng& rng) {
  if (advance < 0) throw std::invalid_argument("advance must be non-negative");
  const int total = settings.phases.total();
  if (static_cast<int>(series.size()) < total + advance)
    throw std::invalid_argument("series too short for the phase plan");
  const int n = reservoir.num_nodes();

  std::vector<Eigen::Matrix2d> input_covs(total), target_covs(total);
  for (int k = 0; k < total; ++k) {
    input_covs[k] =
        make_single_mode_state(series[k], 0.0, 0.0, settings.omega0).covariance;
    target_covs[k] = make_single_mode_state(0.0, series[k + advance], 0.0,
                                            settings.omega0)
                         .covariance;
  }
  const Mat initial_cov = network_ground_state(reservoir).covariance;

  const auto phase_mean_fidelity = [&](const PropagatorBlocks& blocks,
                                       Phase phase) {
    Mat sigma = initial_cov;
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < total; ++k) {
      const Mat out = push_covariance(blocks, sigma, input_covs[k]);
      if (in_phase(settings.phases, phase, k + 1)) {
        sum += fidelity_single_mode(first_mode_cov(out, 1), target_covs[k]);
        ++count;
      }
    }
    return count > 0 ? sum / count : 0.0;
  };

  double best_fitness = kInf;
  double best_dt = 0.0;
  int best_generations = 0;
  CouplingVector best_coupling;
  for (const double dt : dt_scan(settings)) {
    const auto rho_for = [&](const CouplingVector& g) {
      return make_blocks(reservoir, g, settings.omega0, dt).rho_a;
    };
    const auto starts_stable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) &&
             rho_for(g) <= settings.rho_limit;
    };
    const auto evaluable = [&](const CouplingVector& g) {
      return in_coupling_box(g, settings.g_max) && rho_for(g) <= kEvaluableRho;
    };
    const auto cost = [&](const CouplingVector& g) {
      return -phase_mean_fidelity(
          make_blocks(reservoir, g, settings.omega0, dt), Phase::kTraining);
    };
    int generations = 0;
    const Candidate trained = train_coupling(cost, starts_stable, evaluable, n,
                                             1, settings.de, rng, &generations);
    if (trained.fitness < best_fitness) {
      best_fitness = trained.fitness;
      best_dt = dt;
      best_coupling = trained.coupling;
      best_generations = generations;
    }
  }

  TaskResult result;
  result.task = "state_preparation";
  result.n = n;
  result.m = 1;
  result.advance = advance;
  result.dt = best_dt;
  result.figure_of_merit = phase_mean_fidelity(
      make_blocks(reservoir, best_coupling, settings.omega0, best_dt),
      Phase::kTest);
  result.cost_at_convergence = best_fitness;
  result.generations = best_generations;
  result.coupling = best_coupling;
  return result;
}

TripletTopology random_triplet_topology(int triplets, double g_max,
                                        double omega0, Rng& rng) {
  if (triplets < 1) throw std::invalid_argument("need at least one triplet");
  const int n = 2 * triplets;
  Mat couplings = Mat::Zero(n, n);
  Mat strengths = Mat::Zero(n, triplets);
  for (int t = 0; t < triplets; ++t) {
    const int a = 2 * t;
    const int b = 2 * t + 1;
    couplings(a, b) = couplings(b, a) = rng.uniform(0.0, g_max);
    strengths(a, t) = rng.uniform(0.0, g_max);
    strengths(b, t) = rng.uniform(0.0, g_max);
  }
  return TripletTopology{
      NetworkSpec{Vec::Constant(n, omega0), std::move(couplings)},
      CouplingVector{std::move(strengths)}};
}

Vec entropy_feature_map(const Mat& reservoir_cov) {
  const int dim = static_cast<int>(reservoir_cov.cols());
  const Vec row = reservoir_cov.row(0).transpose();
  Vec features(dim * (dim - 1) / 2 + 1);
  int idx = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) features(idx++) = row(i) * row(j);
  features(idx) = 1.0;
  return features;
}

Vec train_linear_readout(const Mat& features, const Vec& targets,
                         double ridge_lambda) {
  if (features.rows() != targets.size())
    throw std::invalid_argument("feature/target row mismatch");
  if (ridge_lambda <= 0.0 && features.rows() < features.cols())
    throw std::invalid_argument("underdetermined without regularization");
  const Mat gram = features.transpose() * features +
                   ridge_lambda * Mat::Identity(features.cols(), features.cols());
  return Eigen::LDLT<Mat>(gram).solve(features.transpose() * targets);
}

double nmse(const Vec& predicted, const Vec& actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("prediction/target length mismatch");
  const double variance =
      (actual.array() - actual.mean()).square().mean();
  if (variance <= 0.0)
    throw std::domain_error("target variance is zero; NMSE undefined");
  return (predicted - actual).array().square().mean() / variance;
}

std::vector<EntropyResult> run_entropy_detection(const std::vector<int>& taus,
                                                 const TaskSettings& settings,
                                                 Rng& rng, int triplets) {
  if (taus.empty()) throw std::invalid_argument("need at least one delay");
  const PhasePlan& plan = settings.phases;
  for (int tau : taus)
    if (tau < 0 || tau >= plan.preparation)
      throw std::invalid_argument("delays must fit inside the preparation");

  const TripletTopology topo =
      random_triplet_topology(triplets, settings.g_max, settings.omega0, rng);
  const int total = plan.total();

  std::vector<Eigen::Matrix2d> input_covs(total);
  Vec dets(total);
  for (int k = 0; k < total; ++k) {
    input_covs[k] = random_zero_mean_state(1, settings.n_th_range,
                                           settings.r_range, settings.omega0,
                                           rng)
                        .covariance;
    dets(k) = input_covs[k].determinant();
  }
  Vec entropies(total);
  for (int k = 0; k < total; ++k)
    entropies(k) = entropy_from_covariance(dets(k)).second;

  const Mat initial_cov = network_ground_state(topo.reservoir).covariance;
  const int feature_count =
      static_cast<int>(entropy_feature_map(initial_cov).size());

  std::vector<EntropyResult> best(taus.size());
  std::vector<double> best_train(taus.size(), kInf);

  for (const double dt : dt_scan(settings)) {
    const PropagatorBlocks blocks =
        make_blocks(topo.reservoir, topo.coupling, settings.omega0, dt);
    if (blocks.rho_a >= settings.rho_limit) continue;

    Mat train_features(plan.training, feature_count);
    Mat test_features(plan.test, feature_count);
    Mat sigma = initial_cov;
    for (int k = 0; k < total; ++k) {
      push_covariance(blocks, sigma, replicate_cov(input_covs[k], triplets));
      const int step = k + 1;
      if (in_phase(plan, Phase::kTraining, step))
        train_features.row(step - plan.preparation - 1) =
            entropy_feature_map(sigma).transpose();
      else if (in_phase(plan, Phase::kTest, step))
        test_features.row(step - plan.preparation - plan.training - 1) =
            entropy_feature_map(sigma).transpose();
    }

    const Mat gram =
        train_features.transpose() * train_features +
        settings.ridge_lambda * Mat::Identity(feature_count, feature_count);
    const Eigen::LDLT<Mat> solver(gram);

    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      const int tau = taus[ti];
      Vec train_targets(plan.training), test_targets(plan.test);
      Vec test_entropy(plan.test);
      for (int i = 0; i < plan.training; ++i)
        train_targets(i) = dets(plan.preparation + i - tau);
      for (int i = 0; i < plan.test; ++i) {
        const int k = plan.preparation + plan.training + i - tau;
        test_targets(i) = dets(k);
        test_entropy(i) = entropies(k);
      }
      const Vec weights =
          solver.solve(train_features.transpose() * train_targets);
      const Vec train_pred = train_features * weights;
      const double train_nmse = nmse(train_pred, train_targets);
      if (train_nmse >= best_train[ti]) continue;

      const Vec test_pred = test_features * weights;
      Vec pred_entropy(plan.test);
      for (int i = 0; i < plan.test; ++i)
        pred_entropy(i) =
            entropy_from_covariance(std::max(test_pred(i), 0.25)).second;
      best_train[ti] = train_nmse;
      best[ti] = EntropyResult{taus[ti], dt, nmse(pred_entropy, test_entropy),
                               nmse(test_pred, test_targets)};
    }
  }

  for (std::size_t ti = 0; ti < taus.size(); ++ti)
    if (!(best_train[ti] < kInf))
      throw std::runtime_error("no interaction time met the stability limit");
  return best;
}

double random_guess_baseline(const StateSampler& sample_a,
                             const StateSampler& sample_b, int samples,
                             Rng& rng) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const GaussianState first = sample_a(rng);
    const GaussianState second = sample_b(rng);
    sum += fidelity(first, second);
  }
  return sum / samples;
}

double task_random_guess_baseline(const TaskSettings& settings, int samples,
                                  Rng& rng) {
  const StateSampler sampler = [&settings](Rng& r) {
    return random_zero_mean_state(1, settings.n_th_range, settings.r_range,
                                  settings.omega0, r);
  };
  return random_guess_baseline(sampler, sampler, samples, rng);
}

}  // namespace qrc
