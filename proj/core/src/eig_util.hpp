#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace qrc::detail {

/// Eigenvalues of a real square matrix via real Schur with a raised
/// iteration cap. The stock solver's default budget gives up on rare
/// near-degenerate matrices, e.g. propagator blocks at exact revivals.
inline Eigen::VectorXcd robust_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::RealSchur<Eigen::MatrixXd> schur;
  schur.setMaxIterations(400 * static_cast<int>(m.rows()));
  schur.compute(m, /*computeU=*/false);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  const Eigen::MatrixXd& t = schur.matrixT();
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXcd lam(n);
  int i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double p = 0.5 * (t(i, i) - t(i + 1, i + 1));
      const double z =
          std::sqrt(std::abs(p * p + t(i + 1, i) * t(i, i + 1)));
      lam(i) = std::complex<double>(t(i + 1, i + 1) + p, z);
      lam(i + 1) = std::complex<double>(t(i + 1, i + 1) + p, -z);
      i += 2;
    } else {
      lam(i) = std::complex<double>(t(i, i), 0.0);
      ++i;
    }
  }
  return lam;
}

}  // namespace qrc::detail
