#include "qrc/network.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <vector>

#include "eig_util.hpp"
#include "qrc/rng.hpp"

namespace qrc {

namespace {

void validate_spec(const NetworkSpec& spec) {
  const int k = spec.num_nodes();
  if (k < 1) throw std::invalid_argument("network needs at least one node");
  if ((spec.frequencies.array() <= 0.0).any())
    throw std::invalid_argument("frequencies must be positive");
  if (spec.couplings.rows() != k || spec.couplings.cols() != k)
    throw std::invalid_argument("coupling matrix size mismatch");
  if ((spec.couplings - spec.couplings.transpose()).cwiseAbs().maxCoeff() >
      1e-12)
    throw std::invalid_argument("coupling matrix must be symmetric");
  if (spec.couplings.diagonal().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("coupling matrix must have zero diagonal");
  if (spec.couplings.minCoeff() < 0.0)
    throw std::invalid_argument("couplings must be non-negative");
}

Eigen::SelfAdjointEigenSolver<Mat> decompose_potential(const Mat& v) {
  Eigen::SelfAdjointEigenSolver<Mat> es(v);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("potential matrix is not positive definite");
  return es;
}

}  // namespace

double spectral_radius(const Mat& m) {
  return detail::robust_eigenvalues(m).cwiseAbs().maxCoeff();
}

Mat potential_matrix(const NetworkSpec& spec) {
  validate_spec(spec);
  const int k = spec.num_nodes();
  Mat v = -spec.couplings;
  v.diagonal() = spec.frequencies.array().square() +
                 spec.couplings.rowwise().sum().array();
  decompose_potential(v);
  return v;
}

NetworkSpec assemble_joint(const NetworkSpec& reservoir,
                           const CouplingVector& coupling,
                           double input_omega) {
  const int n = reservoir.num_nodes();
  const int m = coupling.input_modes();
  if (coupling.reservoir_nodes() != n)
    throw std::invalid_argument("coupling rows must match reservoir size");
  if (input_omega <= 0.0)
    throw std::invalid_argument("input frequency must be positive");
  const int k = n + m;
  Vec freqs(k);
  freqs.head(n) = reservoir.frequencies;
  freqs.tail(m).setConstant(input_omega);
  Mat g = Mat::Zero(k, k);
  g.topLeftCorner(n, n) = reservoir.couplings;
  g.topRightCorner(n, m) = coupling.strengths;
  g.bottomLeftCorner(m, n) = coupling.strengths.transpose();
  return NetworkSpec{std::move(freqs), std::move(g)};
}

Mat propagator(const Mat& v, double dt) {
  if (v.rows() != v.cols()) throw std::invalid_argument("V must be square");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  const auto es = decompose_potential(v);
  const int k = static_cast<int>(v.rows());
  const Vec omega = es.eigenvalues().cwiseSqrt();
  const Vec phase = omega * dt;
  const Vec cosv = phase.array().cos();
  const Vec sinv = phase.array().sin();
  const Mat& q = es.eigenvectors();
  Mat s(2 * k, 2 * k);
  s.topLeftCorner(k, k) = q * cosv.asDiagonal() * q.transpose();
  s.topRightCorner(k, k) =
      q * (sinv.array() / omega.array()).matrix().asDiagonal() * q.transpose();
  s.bottomLeftCorner(k, k) =
      -q * (sinv.array() * omega.array()).matrix().asDiagonal() * q.transpose();
  s.bottomRightCorner(k, k) = s.topLeftCorner(k, k);
  return s;
}

PropagatorBlocks partition_blocks(const Mat& s, int reservoir_modes,
                                  int input_modes) {
  const int n = reservoir_modes;
  const int m = input_modes;
  const int k = n + m;
  if (s.rows() != 2 * k || s.cols() != 2 * k)
    throw std::invalid_argument("propagator size mismatch");
  // global (q_1..q_k, p_1..p_k) -> grouped (q_R, p_R, q_S, p_S)
  std::vector<int> perm(2 * k);
  for (int i = 0; i < n; ++i) {
    perm[i] = i;
    perm[n + i] = k + i;
  }
  for (int i = 0; i < m; ++i) {
    perm[2 * n + i] = n + i;
    perm[2 * n + m + i] = k + n + i;
  }
  Mat grouped(2 * k, 2 * k);
  for (int r = 0; r < 2 * k; ++r)
    for (int c = 0; c < 2 * k; ++c) grouped(r, c) = s(perm[r], perm[c]);
  PropagatorBlocks blocks;
  blocks.s = s;
  blocks.a = grouped.topLeftCorner(2 * n, 2 * n);
  blocks.b = grouped.topRightCorner(2 * n, 2 * m);
  blocks.c = grouped.bottomLeftCorner(2 * m, 2 * n);
  blocks.d = grouped.bottomRightCorner(2 * m, 2 * m);
  blocks.rho_a = spectral_radius(blocks.a);
  blocks.reservoir_modes = n;
  blocks.input_modes = m;
  return blocks;
}

NetworkSpec random_reservoir(int n, double g_max, double omega0, Rng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  if (g_max < 0.0 || omega0 <= 0.0)
    throw std::invalid_argument("invalid g_max or omega0");
  Mat g = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g(i, j) = g(j, i) = rng.uniform(0.0, g_max);
  return NetworkSpec{Vec::Constant(n, omega0), std::move(g)};
}

ChannelDraw random_channel(int channel_nodes, int input_modes,
                           double rho_limit, double dt, double g_max,
                           double omega0, Rng& rng, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    NetworkSpec internal = random_reservoir(channel_nodes, g_max, omega0, rng);
    Mat strengths(channel_nodes, input_modes);
    for (int i = 0; i < channel_nodes; ++i)
      for (int j = 0; j < input_modes; ++j)
        strengths(i, j) = rng.uniform(0.0, g_max);
    CouplingVector coupling{std::move(strengths)};
    const NetworkSpec joint = assemble_joint(internal, coupling, omega0);
    PropagatorBlocks blocks = partition_blocks(
        propagator(potential_matrix(joint), dt), channel_nodes, input_modes);
    if (blocks.rho_a <= rho_limit)
      return ChannelDraw{std::move(internal), std::move(coupling),
                         std::move(blocks)};
  }
  throw std::runtime_error("channel sampling budget exhausted");
}

GaussianState network_ground_state(const NetworkSpec& spec) {
  const Mat v = potential_matrix(spec);
  const auto es = decompose_potential(v);
  const int k = spec.num_nodes();
  const Vec omega = es.eigenvalues().cwiseSqrt();
  const Mat& q = es.eigenvectors();
  Mat cov = Mat::Zero(2 * k, 2 * k);
  cov.topLeftCorner(k, k) =
      q * (0.5 * omega.cwiseInverse()).asDiagonal() * q.transpose();
  cov.bottomRightCorner(k, k) = q * (0.5 * omega).asDiagonal() * q.transpose();
  return GaussianState(Vec::Zero(2 * k), std::move(cov), spec.frequencies);
}

void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  const int k = spec.num_nodes();
  std::vector<double> upper;
  upper.reserve(k * (k - 1) / 2);
  for (int i = 0; i < k; ++i)
    for (int c = i + 1; c < k; ++c) upper.push_back(spec.couplings(i, c));
  j = nlohmann::json{{"frequencies", std::vector<double>(spec.frequencies.begin(),
                                                         spec.frequencies.end())},
                     {"couplings_upper", upper}};
}

void from_json(const nlohmann::json& j, NetworkSpec& spec) {
  const auto freqs = j.at("frequencies").get<std::vector<double>>();
  const auto upper = j.at("couplings_upper").get<std::vector<double>>();
  const int k = static_cast<int>(freqs.size());
  if (static_cast<int>(upper.size()) != k * (k - 1) / 2)
    throw std::invalid_argument("coupling list length mismatch");
  Mat g = Mat::Zero(k, k);
  std::size_t idx = 0;
  for (int i = 0; i < k; ++i)
    for (int c = i + 1; c < k; ++c) g(i, c) = g(c, i) = upper[idx++];
  spec = NetworkSpec{Eigen::Map<const Vec>(freqs.data(), k), std::move(g)};
}

void to_json(nlohmann::json& j, const CouplingVector& coupling) {
  std::vector<double> flat;
  flat.reserve(coupling.strengths.size());
  for (int r = 0; r < coupling.strengths.rows(); ++r)
    for (int c = 0; c < coupling.strengths.cols(); ++c)
      flat.push_back(coupling.strengths(r, c));
  j = nlohmann::json{{"reservoir_nodes", coupling.reservoir_nodes()},
                     {"input_modes", coupling.input_modes()},
                     {"strengths", flat}};
}

void from_json(const nlohmann::json& j, CouplingVector& coupling) {
  const int rows = j.at("reservoir_nodes").get<int>();
  const int cols = j.at("input_modes").get<int>();
  const auto flat = j.at("strengths").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != rows * cols)
    throw std::invalid_argument("strengths length mismatch");
  Mat strengths(rows, cols);
  std::size_t idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) strengths(r, c) = flat[idx++];
  coupling = CouplingVector{std::move(strengths)};
}

}  // namespace qrc
