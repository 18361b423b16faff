#include "qrc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace qrc {

namespace {

std::vector<int> slot_mode_indices(const EngineState& engine, int slot) {
  std::vector<int> modes(engine.slot_modes);
  std::iota(modes.begin(), modes.end(),
            engine.reservoir_modes + slot * engine.slot_modes);
  return modes;
}

}  // namespace

EngineState initialize(const NetworkSpec& reservoir,
                       const GaussianState& initial, int window_capacity) {
  if (window_capacity < 0)
    throw std::invalid_argument("window capacity must be non-negative");
  if (initial.num_modes() != reservoir.num_nodes())
    throw std::invalid_argument("initial state mode count mismatch");
  if (!is_physical(initial))
    throw std::invalid_argument("initial state is not physical");
  EngineState engine;
  engine.reservoir_modes = reservoir.num_nodes();
  engine.window_capacity = window_capacity;
  engine.joint = initial;
  return engine;
}

EngineState initialize(const NetworkSpec& reservoir, int window_capacity) {
  return initialize(reservoir, network_ground_state(reservoir),
                    window_capacity);
}

EngineState initialize(const GaussianState& initial, int window_capacity) {
  if (window_capacity < 0)
    throw std::invalid_argument("window capacity must be non-negative");
  if (!is_physical(initial))
    throw std::invalid_argument("initial state is not physical");
  EngineState engine;
  engine.reservoir_modes = initial.num_modes();
  engine.window_capacity = window_capacity;
  engine.joint = initial;
  return engine;
}

GaussianState step(EngineState& engine, const GaussianState& input,
                   const PropagatorBlocks& blocks) {
  const int n = engine.reservoir_modes;
  const int m = blocks.input_modes;
  if (blocks.reservoir_modes != n)
    throw std::invalid_argument("propagator reservoir size mismatch");
  if (input.num_modes() != m)
    throw std::invalid_argument("input mode count mismatch");
  if (!engine.window_steps.empty() && engine.slot_modes != m)
    throw std::invalid_argument("input mode count changed mid-run");
  engine.slot_modes = m;

  const int window = static_cast<int>(engine.window_steps.size());
  const int total = n + window * m + m;
  GaussianState joint = tensor(engine.joint, input);

  // Map (q_R, p_R, q_S, p_S) grouped coordinates into the enlarged joint,
  // where the inputs sit after the retained window slots.
  auto joint_index = [&](int grouped) {
    if (grouped < n) return grouped;
    if (grouped < 2 * n) return total + (grouped - n);
    const int local = grouped - 2 * n;
    if (local < m) return n + window * m + local;
    return total + n + window * m + (local - m);
  };
  Mat grouped_s(2 * (n + m), 2 * (n + m));
  grouped_s.topLeftCorner(2 * n, 2 * n) = blocks.a;
  grouped_s.topRightCorner(2 * n, 2 * m) = blocks.b;
  grouped_s.bottomLeftCorner(2 * m, 2 * n) = blocks.c;
  grouped_s.bottomRightCorner(2 * m, 2 * m) = blocks.d;
  Mat embedded = Mat::Identity(2 * total, 2 * total);
  for (int g = 0; g < 2 * (n + m); ++g) embedded.row(joint_index(g)).setZero();
  for (int g1 = 0; g1 < 2 * (n + m); ++g1)
    for (int g2 = 0; g2 < 2 * (n + m); ++g2)
      embedded(joint_index(g1), joint_index(g2)) = grouped_s(g1, g2);

  GaussianState evolved = apply_symplectic(joint, embedded);

  std::vector<int> new_slot(m);
  std::iota(new_slot.begin(), new_slot.end(), n + window * m);
  GaussianState output = reduce(evolved, new_slot);

  engine.step_index += 1;
  engine.window_steps.push_back(engine.step_index);
  if (static_cast<int>(engine.window_steps.size()) > engine.window_capacity) {
    std::vector<int> keep;
    keep.reserve(total - m);
    for (int i = 0; i < n; ++i) keep.push_back(i);
    for (int i = n + m; i < total; ++i) keep.push_back(i);
    evolved = keep.empty() ? evolved : reduce(evolved, keep);
    engine.window_steps.erase(engine.window_steps.begin());
  }
  engine.joint = std::move(evolved);
  return output;
}

SequenceOutputs run_sequence(EngineState& engine,
                             const std::vector<GaussianState>& inputs,
                             const PropagatorBlocks& blocks,
                             const PhasePlan& plan) {
  if (plan.preparation < 0 || plan.training < 0 || plan.test < 0)
    throw std::invalid_argument("phase lengths must be non-negative");
  if (static_cast<int>(inputs.size()) != plan.total())
    throw std::invalid_argument("input count does not match the phase plan");
  if (std::pow(blocks.rho_a, 2.0 * plan.preparation) >= 1e-3)
    std::cerr << "warning: preparation phase too short for rho(A) = "
              << blocks.rho_a << "\n";
  SequenceOutputs outputs;
  outputs.preparation.reserve(plan.preparation);
  outputs.training.reserve(plan.training);
  outputs.test.reserve(plan.test);
  for (int i = 0; i < plan.total(); ++i) {
    GaussianState out = step(engine, inputs[i], blocks);
    if (i < plan.preparation)
      outputs.preparation.push_back(std::move(out));
    else if (i < plan.preparation + plan.training)
      outputs.training.push_back(std::move(out));
    else
      outputs.test.push_back(std::move(out));
  }
  return outputs;
}

GaussianState reservoir_state(const EngineState& engine) {
  std::vector<int> modes(engine.reservoir_modes);
  std::iota(modes.begin(), modes.end(), 0);
  return reduce(engine.joint, modes);
}

GaussianState joint_delayed_output(const EngineState& engine, int k, int tau) {
  if (tau < 1) throw std::invalid_argument("delay must be at least 1");
  const auto& steps = engine.window_steps;
  const auto find_slot = [&](int wanted) {
    const auto it = std::find(steps.begin(), steps.end(), wanted);
    if (it == steps.end())
      throw std::runtime_error("output slot no longer in window");
    return static_cast<int>(it - steps.begin());
  };
  const std::vector<int> early = slot_mode_indices(engine, find_slot(k - tau));
  std::vector<int> modes = early;
  const std::vector<int> late = slot_mode_indices(engine, find_slot(k));
  modes.insert(modes.end(), late.begin(), late.end());
  return reduce(engine.joint, modes);
}

Mat closed_form_covariance(const PropagatorBlocks& blocks,
                           const std::vector<Mat>& input_covs,
                           const Mat& initial_cov, int m) {
  if (m < 1) throw std::invalid_argument("step count must be positive");
  if (static_cast<int>(input_covs.size()) < m)
    throw std::invalid_argument("need one input covariance per step");
  std::vector<Mat> powers;
  powers.reserve(m + 1);
  powers.push_back(Mat::Identity(blocks.a.rows(), blocks.a.cols()));
  for (int j = 1; j <= m; ++j) powers.push_back(blocks.a * powers.back());
  Mat sigma = powers[m] * initial_cov * powers[m].transpose();
  for (int k = 1; k <= m; ++k) {
    const Mat driven = blocks.b * input_covs[k - 1] * blocks.b.transpose();
    sigma += powers[m - k] * driven * powers[m - k].transpose();
  }
  return sigma;
}

GaussianState closed_form_output(const PropagatorBlocks& blocks,
                                 const std::vector<GaussianState>& inputs,
                                 const GaussianState& initial, int m) {
  if (m < 1) throw std::invalid_argument("step count must be positive");
  if (static_cast<int>(inputs.size()) < m)
    throw std::invalid_argument("need one input per step");
  std::vector<Mat> powers;
  powers.reserve(m);
  powers.push_back(Mat::Identity(blocks.a.rows(), blocks.a.cols()));
  for (int j = 1; j < m; ++j) powers.push_back(blocks.a * powers.back());

  // x_R in grouped (q_R, p_R) coordinates; initial comes in global ordering
  // over the reservoir modes only, which coincides with the grouping.
  const Mat lead = blocks.c * powers[m - 1];
  Vec mean = lead * initial.mean + blocks.d * inputs[m - 1].mean;
  Mat cov = lead * initial.covariance * lead.transpose() +
            blocks.d * inputs[m - 1].covariance * blocks.d.transpose();
  for (int k = 1; k <= m - 1; ++k) {
    const Mat path = blocks.c * powers[m - k - 1] * blocks.b;
    mean += path * inputs[k - 1].mean;
    cov += path * inputs[k - 1].covariance * path.transpose();
  }
  return GaussianState(std::move(mean), std::move(cov),
                       inputs[m - 1].frequencies);
}

}  // namespace qrc
