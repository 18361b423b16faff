#include "qrc/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "eig_util.hpp"
#include "qrc/rng.hpp"

namespace qrc {

namespace {

using Cplx = std::complex<double>;

Mat matrix_sqrt_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Moduli of the eigenvalues of i*Omega*cov, one per mode, sorted ascending.
/// Works for any symmetric PSD matrix, including partial transposes.
Vec abs_symplectic_spectrum(const Mat& cov) {
  const int k = static_cast<int>(cov.rows()) / 2;
  const Mat root = matrix_sqrt_psd(cov);
  const Mat anti = root * symplectic_form(k) * root;
  Eigen::MatrixXcd herm = Cplx(0.0, 1.0) * anti.cast<Cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  Vec out(k);
  for (int i = 0; i < k; ++i) out(i) = es.eigenvalues()(k + i);
  return out;
}

void check_interval(const Interval& iv, const char* name) {
  if (iv.lo > iv.hi || iv.lo < 0.0)
    throw std::invalid_argument(std::string(name) +
                                " interval must satisfy 0 <= lo <= hi");
}

}  // namespace

GaussianState::GaussianState(Vec mean_in, Mat cov_in, Vec freq_in)
    : mean(std::move(mean_in)),
      covariance(std::move(cov_in)),
      frequencies(std::move(freq_in)) {
  const auto k = frequencies.size();
  if (k < 1) throw std::invalid_argument("state needs at least one mode");
  if (mean.size() != 2 * k || covariance.rows() != 2 * k ||
      covariance.cols() != 2 * k)
    throw std::invalid_argument("mean/covariance size mismatch");
  // Roundoff asymmetry scales with the matrix magnitude, so the gate must too.
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("covariance is not symmetric");
  covariance = ((covariance + covariance.transpose()) / 2.0).eval();
}

Mat symplectic_form(int num_modes) {
  Mat omega = Mat::Zero(2 * num_modes, 2 * num_modes);
  omega.topRightCorner(num_modes, num_modes).setIdentity();
  omega.bottomLeftCorner(num_modes, num_modes) =
      -Mat::Identity(num_modes, num_modes);
  return omega;
}

Mat physical_scaling(const Vec& frequencies) {
  const auto k = frequencies.size();
  if ((frequencies.array() <= 0.0).any())
    throw std::invalid_argument("frequencies must be positive");
  Vec d(2 * k);
  d.head(k) = frequencies.cwiseSqrt().cwiseInverse();
  d.tail(k) = frequencies.cwiseSqrt();
  return d.asDiagonal();
}

bool is_symplectic(const Mat& s, double tol) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0) return false;
  const Mat omega = symplectic_form(static_cast<int>(s.rows()) / 2);
  return (s * omega * s.transpose() - omega).norm() <= tol;
}

GaussianState vacuum_state(const Vec& frequencies) {
  const auto k = frequencies.size();
  Vec d(2 * k);
  d.head(k) = (2.0 * frequencies).cwiseInverse();
  d.tail(k) = frequencies / 2.0;
  return GaussianState(Vec::Zero(2 * k), Mat(d.asDiagonal()), frequencies);
}

GaussianState vacuum_state(int num_modes, double frequency) {
  return vacuum_state(Vec::Constant(num_modes, frequency));
}

GaussianState make_single_mode_state(double n_th, double r, double phi,
                                     double omega) {
  if (n_th < 0.0) throw std::invalid_argument("n_th must be non-negative");
  if (omega <= 0.0) throw std::invalid_argument("omega must be positive");
  const double pre = (2.0 * n_th + 1.0) / 2.0;
  const double ch = std::cosh(2.0 * r);
  const double sh = std::sinh(2.0 * r);
  Mat cov(2, 2);
  cov << pre * (ch + std::cos(phi) * sh) / omega, pre * std::sin(phi) * sh,
      pre * std::sin(phi) * sh, pre * (ch - std::cos(phi) * sh) * omega;
  return GaussianState(Vec::Zero(2), cov, Vec::Constant(1, omega));
}

GaussianState two_mode_squeezed_state(double r, double omega) {
  const double c = std::cosh(2.0 * r) / 2.0;
  const double s = std::sinh(2.0 * r) / 2.0;
  Mat cov(4, 4);
  cov << c, s, 0, 0,  //
      s, c, 0, 0,     //
      0, 0, c, -s,    //
      0, 0, -s, c;
  const Vec freqs = Vec::Constant(2, omega);
  const Mat scale = physical_scaling(freqs);
  return GaussianState(Vec::Zero(4), scale * cov * scale, freqs);
}

Mat random_orthosymplectic(int num_modes, Rng& rng) {
  if (num_modes < 1) throw std::invalid_argument("need at least one mode");
  const int m = num_modes;
  Eigen::MatrixXcd ginibre(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ginibre(i, j) = Cplx(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(ginibre);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    const Cplx rjj = r(j, j);
    const double mag = std::abs(rjj);
    q.col(j) *= (mag > 0.0) ? rjj / mag : Cplx(1.0, 0.0);
  }
  Mat o(2 * m, 2 * m);
  o.topLeftCorner(m, m) = q.real();
  o.topRightCorner(m, m) = q.imag();
  o.bottomLeftCorner(m, m) = -q.imag();
  o.bottomRightCorner(m, m) = q.real();
  return o;
}

GaussianState random_zero_mean_state(int num_modes,
                                     const Interval& n_th_range,
                                     const Interval& r_range, double omega,
                                     Rng& rng) {
  if (num_modes < 1) throw std::invalid_argument("need at least one mode");
  check_interval(n_th_range, "n_th");
  check_interval(r_range, "r");
  const int m = num_modes;
  Vec n_th(m), r(m);
  for (int i = 0; i < m; ++i) n_th(i) = rng.uniform(n_th_range.lo, n_th_range.hi);
  for (int i = 0; i < m; ++i) r(i) = rng.uniform(r_range.lo, r_range.hi);

  Vec thermal(2 * m), squeeze(2 * m);
  thermal.head(m) = n_th.array() + 0.5;
  thermal.tail(m) = thermal.head(m);
  squeeze.head(m) = (-r).array().exp();
  squeeze.tail(m) = r.array().exp();

  const Mat o1 = random_orthosymplectic(m, rng);
  const Mat o2 = random_orthosymplectic(m, rng);
  const Mat rotated = o1 * thermal.asDiagonal() * o1.transpose();
  const Mat squeezed = squeeze.asDiagonal() * rotated * squeeze.asDiagonal();
  const Mat dimless = o2 * squeezed * o2.transpose();

  const Vec freqs = Vec::Constant(m, omega);
  const Mat scale = physical_scaling(freqs);
  return GaussianState(Vec::Zero(2 * m), scale * dimless * scale, freqs);
}

GaussianState tensor(const std::vector<GaussianState>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor of zero states");
  int total = 0;
  for (const auto& part : parts) total += part.num_modes();
  Vec mean = Vec::Zero(2 * total);
  Mat cov = Mat::Zero(2 * total, 2 * total);
  Vec freqs(total);
  int offset = 0;
  for (const auto& part : parts) {
    const int k = part.num_modes();
    mean.segment(offset, k) = part.mean.head(k);
    mean.segment(total + offset, k) = part.mean.tail(k);
    freqs.segment(offset, k) = part.frequencies;
    cov.block(offset, offset, k, k) = part.covariance.topLeftCorner(k, k);
    cov.block(offset, total + offset, k, k) =
        part.covariance.topRightCorner(k, k);
    cov.block(total + offset, offset, k, k) =
        part.covariance.bottomLeftCorner(k, k);
    cov.block(total + offset, total + offset, k, k) =
        part.covariance.bottomRightCorner(k, k);
    offset += k;
  }
  return GaussianState(std::move(mean), std::move(cov), std::move(freqs));
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  return tensor(std::vector<GaussianState>{a, b});
}

GaussianState reduce(const GaussianState& state, const std::vector<int>& modes) {
  const int k = state.num_modes();
  if (modes.empty()) throw std::invalid_argument("keep at least one mode");
  std::set<int> seen;
  for (int m : modes) {
    if (m < 0 || m >= k) throw std::out_of_range("mode index out of range");
    if (!seen.insert(m).second)
      throw std::invalid_argument("duplicate mode index");
  }
  const int kept = static_cast<int>(modes.size());
  std::vector<int> idx(2 * kept);
  for (int j = 0; j < kept; ++j) {
    idx[j] = modes[j];
    idx[kept + j] = k + modes[j];
  }
  Vec mean(2 * kept);
  Mat cov(2 * kept, 2 * kept);
  Vec freqs(kept);
  for (int j = 0; j < kept; ++j) freqs(j) = state.frequencies(modes[j]);
  for (int a = 0; a < 2 * kept; ++a) {
    mean(a) = state.mean(idx[a]);
    for (int b = 0; b < 2 * kept; ++b) cov(a, b) = state.covariance(idx[a], idx[b]);
  }
  return GaussianState(std::move(mean), std::move(cov), std::move(freqs));
}

GaussianState apply_symplectic(const GaussianState& state, const Mat& s) {
  const auto dim = state.mean.size();
  if (s.rows() != dim || s.cols() != dim)
    throw std::invalid_argument("symplectic dimension mismatch");
  return GaussianState(s * state.mean, s * state.covariance * s.transpose(),
                       state.frequencies);
}

Vec symplectic_eigenvalues(const Mat& cov) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0)
    throw std::invalid_argument("covariance must be square of even dimension");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("covariance is not symmetric");
  Vec nu = abs_symplectic_spectrum(cov);
  if ((nu.array() < 0.5 - 1e-9).any())
    throw std::domain_error("covariance violates the uncertainty bound");
  return nu;
}

bool is_physical(const Mat& cov, double tol) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0) return false;
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) return false;
  const int k = static_cast<int>(cov.rows()) / 2;
  Eigen::MatrixXcd herm =
      cov.cast<Cplx>() + Cplx(0.0, 0.5) * symplectic_form(k).cast<Cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_physical(const GaussianState& state, double tol) {
  return is_physical(state.covariance, tol);
}

double fidelity_single_mode(const Eigen::Matrix2d& cov_a,
                            const Eigen::Matrix2d& cov_b) {
  const double total = (cov_a + cov_b).determinant();
  const double excess =
      std::max(0.0, 4.0 * (cov_a.determinant() - 0.25) *
                        (cov_b.determinant() - 0.25));
  const double denom = std::sqrt(total + excess) - std::sqrt(excess);
  if (!(denom > 0.0)) return 0.0;
  return std::min(1.0, 1.0 / denom);
}

double fidelity(const GaussianState& a, const GaussianState& b) {
  const int k = a.num_modes();
  if (k != b.num_modes())
    throw std::invalid_argument("fidelity needs equal mode counts");
  const Mat sum = a.covariance + b.covariance;
  Eigen::LDLT<Mat> ldlt(sum);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("covariance sum is not invertible");
  const Vec dmean = a.mean - b.mean;
  const double gauss = std::exp(-0.5 * dmean.dot(ldlt.solve(dmean)));

  if (k == 1)
    return fidelity_single_mode(a.covariance, b.covariance) * gauss;

  const Mat omega = symplectic_form(k);
  const Mat w = omega.transpose() *
                ldlt.solve(omega / 4.0 + b.covariance * omega * a.covariance);
  const Eigen::VectorXcd lams = detail::robust_eigenvalues(w * omega);
  Cplx factor(1.0, 0.0);
  for (int i = 0; i < 2 * k; ++i) {
    const Cplx lam = lams(i);
    factor *= 1.0 + std::sqrt(1.0 + 1.0 / (4.0 * lam * lam));
  }
  const double numerator = (2.0 * w).determinant() * factor.real();
  const double ratio = numerator / sum.determinant();
  if (!(ratio > 0.0)) return 0.0;
  return std::min(1.0, std::sqrt(ratio) * gauss);
}

double log_negativity(const GaussianState& state,
                      const std::vector<int>& partition) {
  const int k = state.num_modes();
  std::set<int> side(partition.begin(), partition.end());
  for (int m : side)
    if (m < 0 || m >= k) throw std::out_of_range("partition index out of range");
  Vec sign = Vec::Ones(2 * k);
  for (int m : side) sign(k + m) = -1.0;
  const Mat transposed =
      sign.asDiagonal() * state.covariance * sign.asDiagonal();
  const Vec nu = abs_symplectic_spectrum(transposed);
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    total += std::max(0.0, -std::log(2.0 * nu(i)));
  return total;
}

double log_negativity_two_mode(const Eigen::Matrix4d& cov) {
  Eigen::Matrix2d a, b, c;
  a << cov(0, 0), cov(0, 2), cov(2, 0), cov(2, 2);
  b << cov(1, 1), cov(1, 3), cov(3, 1), cov(3, 3);
  c << cov(0, 1), cov(0, 3), cov(2, 1), cov(2, 3);
  const double seralian =
      a.determinant() + b.determinant() - 2.0 * c.determinant();
  const double disc =
      std::max(0.0, seralian * seralian - 4.0 * cov.determinant());
  const double nu_sq = (seralian - std::sqrt(disc)) / 2.0;
  if (!(nu_sq > 0.0)) return 0.0;
  return std::max(0.0, -0.5 * std::log(4.0 * nu_sq));
}

std::pair<double, double> entropy_from_covariance(double det) {
  if (det < 0.25 - 1e-9)
    throw std::domain_error("determinant below the vacuum floor 1/4");
  const double n_th = std::sqrt(std::max(det, 0.25)) - 0.5;
  const double entropy =
      n_th > 0.0
          ? n_th * std::log((n_th + 1.0) / n_th) + std::log(n_th + 1.0)
          : 0.0;
  return {n_th, entropy};
}

void to_json(nlohmann::json& j, const GaussianState& state) {
  const int dim = static_cast<int>(state.mean.size());
  std::vector<std::vector<double>> cov(dim, std::vector<double>(dim));
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) cov[r][c] = state.covariance(r, c);
  j = nlohmann::json{
      {"num_modes", state.num_modes()},
      {"mean", std::vector<double>(state.mean.begin(), state.mean.end())},
      {"covariance", cov},
      {"frequencies", std::vector<double>(state.frequencies.begin(),
                                          state.frequencies.end())}};
}

void from_json(const nlohmann::json& j, GaussianState& state) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto freqs = j.at("frequencies").get<std::vector<double>>();
  const auto cov = j.at("covariance").get<std::vector<std::vector<double>>>();
  const int dim = static_cast<int>(mean.size());
  Mat cov_mat(dim, dim);
  if (static_cast<int>(cov.size()) != dim)
    throw std::invalid_argument("covariance row count mismatch");
  for (int r = 0; r < dim; ++r) {
    if (static_cast<int>(cov[r].size()) != dim)
      throw std::invalid_argument("covariance column count mismatch");
    for (int c = 0; c < dim; ++c) cov_mat(r, c) = cov[r][c];
  }
  state = GaussianState(Eigen::Map<const Vec>(mean.data(), dim), cov_mat,
                        Eigen::Map<const Vec>(freqs.data(), freqs.size()));
}

}  // namespace qrc
