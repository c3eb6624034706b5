#include "plg/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace plg {

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            const double scale = 1.0 + std::max(std::abs(m(i, j)), std::abs(m(j, i)));
            if (std::abs(m(i, j) - m(j, i)) > tol * scale) return false;
        }
    }
    return true;
}

bool is_psd(const Matrix& m, double tol) {
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev.minCoeff() >= -tol * (1.0 + std::max(0.0, ev.maxCoeff()));
}

Matrix psd_sqrt(const Matrix& m) {
    const Eigen::Index p = m.rows();
    if (p == 0) return Matrix(0, 0);
    const Matrix s = symmetrized(m);
    // Cholesky on the common well-conditioned path keeps sampling cheap.
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() == Eigen::Success) {
        const Matrix l = llt.matrixL();
        if (l.allFinite()) return l;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

Matrix matrix_power(const Matrix& a, int k) {
    Matrix out = Matrix::Identity(a.rows(), a.cols());
    for (int i = 0; i < k; ++i) out = out * a;
    return out;
}

}  // namespace plg
