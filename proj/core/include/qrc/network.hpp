#pragma once

#include <nlohmann/json_fwd.hpp>

#include "qrc/gaussian.hpp"

namespace qrc {

class Rng;

/// Weighted complete or sparse oscillator graph: per-node frequencies plus a
/// symmetric non-negative coupling matrix with zero diagonal. The quadratic
/// Hamiltonian is H = (p'p + q'Vq)/2 with V = diag(w^2) + Laplacian.
struct NetworkSpec {
  Vec frequencies;
  Mat couplings;

  int num_nodes() const { return static_cast<int>(frequencies.size()); }
};

/// Trainable reservoir-input interaction strengths, one row per reservoir
/// node and one column per (possibly multiplexed) input mode.
struct CouplingVector {
  Mat strengths;

  int reservoir_nodes() const { return static_cast<int>(strengths.rows()); }
  int input_modes() const { return static_cast<int>(strengths.cols()); }
};

/// One-step symplectic propagator together with its reservoir/input block
/// partition and the cached spectral radius of the reservoir block.
struct PropagatorBlocks {
  Mat s;  // 2(N+M) x 2(N+M), global (q..q, p..p) ordering
  Mat a;  // 2N x 2N, acts on the reservoir
  Mat b;  // 2N x 2M
  Mat c;  // 2M x 2N
  Mat d;  // 2M x 2M, acts on the inputs
  double rho_a = 0.0;
  int reservoir_modes = 0;
  int input_modes = 0;
};

struct ChannelDraw {
  NetworkSpec spec;
  CouplingVector coupling;
  PropagatorBlocks blocks;
};

double spectral_radius(const Mat& m);

/// V = diag(w^2) + L with L_ij = delta_ij sum_k g_ik - (1 - delta_ij) g_ij.
/// Errors unless V is positive definite.
Mat potential_matrix(const NetworkSpec& spec);

/// Joint (N + M)-node network: reservoir couplings kept, reservoir-input
/// couplings taken from the coupling vector, no input-input couplings.
NetworkSpec assemble_joint(const NetworkSpec& reservoir,
                           const CouplingVector& coupling, double input_omega);

/// S = exp(dt [[0, I], [-V, 0]]), computed from the normal modes of V so the
/// result is symplectic to machine precision.
Mat propagator(const Mat& v, double dt);

/// Permutes the joint propagator into (reservoir; input) grouping and slices
/// the A/B/C/D blocks of the one-step map.
PropagatorBlocks partition_blocks(const Mat& s, int reservoir_modes,
                                  int input_modes);

/// Complete graph on n nodes, couplings i.i.d. uniform in [0, g_max].
NetworkSpec random_reservoir(int n, double g_max, double omega0, Rng& rng);

/// Rejection-samples a random channel (internal plus channel-input couplings)
/// until the spectral radius of its reservoir block at the given interaction
/// time is at most rho_limit.
ChannelDraw random_channel(int channel_nodes, int input_modes,
                           double rho_limit, double dt, double g_max,
                           double omega0, Rng& rng, int max_attempts = 10000);

/// Ground state of the network Hamiltonian from the normal modes of V.
GaussianState network_ground_state(const NetworkSpec& spec);

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);
void to_json(nlohmann::json& j, const CouplingVector& coupling);
void from_json(const nlohmann::json& j, CouplingVector& coupling);

}  // namespace qrc
