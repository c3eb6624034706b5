#pragma once

#include <Eigen/Dense>

namespace plg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Tolerance for "variance is positive" checks before a division.
inline constexpr double kVarianceFloor = 1e-12;
/// Tolerance for symmetric/PSD validity checks on stored covariances.
inline constexpr double kPsdTolerance = 1e-10;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol);

/// Smallest eigenvalue >= -tol * (1 + largest eigenvalue). Symmetric input assumed.
bool is_psd(const Matrix& m, double tol);

/// Lower factor L with L L^T equal to m after flooring negative eigenvalues at zero.
Matrix psd_sqrt(const Matrix& m);

/// Integer power of a square matrix by repeated multiplication.
Matrix matrix_power(const Matrix& a, int k);

}  // namespace plg
