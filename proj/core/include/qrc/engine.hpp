#pragma once

#include <vector>

#include "qrc/gaussian.hpp"
#include "qrc/network.hpp"

namespace qrc {

/// Joint Gaussian state of the reservoir plus a sliding window of emitted
/// output slots. Mode layout: [N reservoir modes][window slots oldest first,
/// slot_modes each]. Retained slots idle under the identity between steps.
struct EngineState {
  int reservoir_modes = 0;
  int slot_modes = 0;
  int window_capacity = 0;
  std::vector<int> window_steps;  // step index of each retained slot
  GaussianState joint;
  int step_index = 0;
};

struct PhasePlan {
  int preparation = 40;
  int training = 80;
  int test = 40;

  int total() const { return preparation + training + test; }
};

struct SequenceOutputs {
  std::vector<GaussianState> preparation;
  std::vector<GaussianState> training;
  std::vector<GaussianState> test;
};

/// Engine starting from the ground state of the reservoir Hamiltonian.
EngineState initialize(const NetworkSpec& reservoir, int window_capacity);

/// Engine starting from an arbitrary physical N-mode state.
EngineState initialize(const NetworkSpec& reservoir,
                       const GaussianState& initial, int window_capacity);

/// Engine over a bare initial state, for effective propagators that do not
/// come from a single network Hamiltonian.
EngineState initialize(const GaussianState& initial, int window_capacity);

/// Injects one input: appends its modes, applies the joint propagator to
/// (reservoir + input) while the window idles, relabels the transformed
/// input modes as the newest output slot (evicting the oldest beyond
/// capacity) and returns the reduced state of that slot.
GaussianState step(EngineState& engine, const GaussianState& input,
                   const PropagatorBlocks& blocks);

/// Steps through all inputs and buckets the outputs by phase.
SequenceOutputs run_sequence(EngineState& engine,
                             const std::vector<GaussianState>& inputs,
                             const PropagatorBlocks& blocks,
                             const PhasePlan& plan);

/// Reduced state of the reservoir modes.
GaussianState reservoir_state(const EngineState& engine);

/// Reduced two-mode-group state of the output slots from steps k - tau and k
/// (in that order). Errors if either slot left the window.
GaussianState joint_delayed_output(const EngineState& engine, int k, int tau);

/// Reservoir covariance after m steps from the expansion
/// sigma_m = A^m sigma_0 A^m' + sum_k A^(m-k) B sigma_k B' A^(m-k)',
/// with input_covs[k-1] the covariance injected at step k.
Mat closed_form_covariance(const PropagatorBlocks& blocks,
                           const std::vector<Mat>& input_covs,
                           const Mat& initial_cov, int m);

/// Output state after m steps from the expansion
/// x_m = C A^(m-1) x_0 + D u_m + C sum_k A^(m-k-1) B u_k,
/// assuming mutually independent inputs.
GaussianState closed_form_output(const PropagatorBlocks& blocks,
                                 const std::vector<GaussianState>& inputs,
                                 const GaussianState& initial, int m);

}  // namespace qrc
