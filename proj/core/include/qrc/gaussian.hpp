#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <utility>
#include <vector>

namespace qrc {

class Rng;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Closed interval for sampling parameters.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Multimode Gaussian state in canonical quadratures with the global ordering
/// (q_1..q_K, p_1..p_K), hbar = 1, unit mass. Covariances are stored in
/// frequency-scaled (physical) form: the vacuum of a mode with angular
/// frequency w has diag(1/(2w), w/2).
struct GaussianState {
  Vec mean;
  Mat covariance;
  Vec frequencies;

  GaussianState() = default;
  GaussianState(Vec mean_in, Mat cov_in, Vec freq_in);

  int num_modes() const { return static_cast<int>(frequencies.size()); }
};

/// Canonical symplectic form Omega = [[0, I], [-I, 0]] for K modes.
Mat symplectic_form(int num_modes);

/// Per-mode diagonal scaling taking dimensionless quadratures (vacuum = I/2)
/// to physical ones: 1/sqrt(w) on each q, sqrt(w) on each p.
Mat physical_scaling(const Vec& frequencies);

bool is_symplectic(const Mat& s, double tol = 1e-9);

/// Vacuum of K modes at the given frequencies.
GaussianState vacuum_state(const Vec& frequencies);
GaussianState vacuum_state(int num_modes, double frequency);

/// Squeezed thermal single-mode state with covariance
///   (2 n_th + 1)/2 * [[(cosh 2r + cos(phi) sinh 2r)/w, sin(phi) sinh 2r],
///                     [sin(phi) sinh 2r, (cosh 2r - cos(phi) sinh 2r) w]].
GaussianState make_single_mode_state(double n_th, double r, double phi,
                                     double omega);

/// Two-mode squeezed vacuum with squeezing parameter r, both modes at omega.
GaussianState two_mode_squeezed_state(double r, double omega = 1.0);

/// 2M x 2M orthogonal symplectic [[Re U, Im U], [-Im U, Re U]] from a
/// Haar-random M x M unitary U (Ginibre + QR with phase fix).
Mat random_orthosymplectic(int num_modes, Rng& rng);

/// Zero-mean M-mode state: product of thermal states, random basis change,
/// position squeezing of every mode, second random basis change; finally
/// rescaled to physical quadratures at the given frequency.
GaussianState random_zero_mean_state(int num_modes, const Interval& n_th_range,
                                     const Interval& r_range, double omega,
                                     Rng& rng);

GaussianState tensor(const GaussianState& a, const GaussianState& b);
GaussianState tensor(const std::vector<GaussianState>& parts);

/// Gaussian partial trace: keep the listed modes, in the listed order.
GaussianState reduce(const GaussianState& state, const std::vector<int>& modes);

GaussianState apply_symplectic(const GaussianState& state, const Mat& s);

/// Moduli of the eigenvalues of i*Omega*cov, deduplicated to K values and
/// sorted ascending. Errors if any value falls below the vacuum floor 1/2.
Vec symplectic_eigenvalues(const Mat& cov);

/// Physicality test: cov symmetric and all eigenvalues of cov + (i/2)*Omega
/// above -tol.
bool is_physical(const Mat& cov, double tol = 1e-9);
bool is_physical(const GaussianState& state, double tol = 1e-9);

/// Uhlmann fidelity in the squared convention, F(rho, rho) = 1, via the
/// closed form for Gaussian states with arbitrary means.
double fidelity(const GaussianState& a, const GaussianState& b);

/// Zero-mean single-mode fast path on raw 2x2 covariance blocks.
double fidelity_single_mode(const Eigen::Matrix2d& cov_a,
                            const Eigen::Matrix2d& cov_b);

/// Logarithmic negativity E_N = sum max(0, -ln 2*nu) over the symplectic
/// spectrum of the partial transpose (p -> -p on the listed modes).
double log_negativity(const GaussianState& state,
                      const std::vector<int>& partition);

/// Two-mode fast path for the 1|1 split on a raw 4x4 covariance.
double log_negativity_two_mode(const Eigen::Matrix4d& cov);

/// Thermal occupation and von Neumann entropy from a single-mode covariance
/// determinant: n_th = sqrt(det) - 1/2, S_V = n ln((n+1)/n) + ln(n+1).
std::pair<double, double> entropy_from_covariance(double det);

void to_json(nlohmann::json& j, const GaussianState& state);
void from_json(const nlohmann::json& j, GaussianState& state);

}  // namespace qrc
