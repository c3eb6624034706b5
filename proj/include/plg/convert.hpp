#pragma once

#include <vector>

#include "plg/lds.hpp"
#include "plg/plg_model.hpp"

namespace plg {

/// Pieces of the closed-form LDS -> PLG map.
struct ConversionIntermediates {
    /// Row i (0-based) is H A^i.
    Matrix M;
    /// Column c is psi_vectors[c], c = 0 .. n-1.
    Matrix Psi;
    /// Psi_0 .. Psi_n; Psi_n is the process-noise covariance of the window with
    /// the observation just past it.
    std::vector<Vector> psi_vectors;
    /// S_0 .. S_n.
    std::vector<Matrix> S_list;
};

struct TrendSolution {
    Vector g;
    double residual_norm = 0.0;
    int rank = 0;
};

/// Observability-style matrix whose rows are H, HA, ..., HA^{n-1}.
Matrix build_M(const LdsParams& lds);

/// Throws AsymmetryDetected if Psi differs from its transpose by more than
/// 1e-8 relative.
ConversionIntermediates build_psi(const LdsParams& lds);

/// Minimum-norm least-squares g with g^T M = H A^n. Rank counts singular values
/// above 1e-10 of the largest. Throws NoSolution if the residual exceeds
/// 1e-6 (||H A^n|| + ||g|| ||M||).
TrendSolution solve_g(const LdsParams& lds);

/// Equivalent n-dimensional PLG. Throws NoSolution (from solve_g) or
/// NegativeSigma2 if sigma2 < -1e-8; values in [-1e-8, 0) are clamped to 0.
PlgParams lds_to_plg(const LdsParams& lds);

}  // namespace plg
