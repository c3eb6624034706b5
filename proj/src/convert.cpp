#include "plg/convert.hpp"

#include <algorithm>
#include <cmath>

#include "plg/errors.hpp"

namespace plg {

namespace {

// H A^k for k = 0 .. count-1.
std::vector<RowVector> observation_powers(const LdsParams& lds, int count) {
    std::vector<RowVector> out;
    out.reserve(static_cast<std::size_t>(count));
    RowVector row = lds.H;
    for (int k = 0; k < count; ++k) {
        out.push_back(row);
        row = row * lds.A;
    }
    return out;
}

}  // namespace

Matrix build_M(const LdsParams& lds) {
    lds.check_shapes();
    const auto rows = observation_powers(lds, lds.n);
    Matrix M(lds.n, lds.n);
    for (int i = 0; i < lds.n; ++i) M.row(i) = rows[static_cast<std::size_t>(i)];
    return M;
}

ConversionIntermediates build_psi(const LdsParams& lds) {
    lds.check_shapes();
    const int n = lds.n;
    const auto HA = observation_powers(lds, n + 2);

    ConversionIntermediates out;
    out.M = build_M(lds);
    for (int k = 0; k <= n; ++k) out.S_list.push_back(build_S(lds, k));

    const Vector Ht = lds.H.transpose();
    auto S_Ht = [&](int k) -> Vector { return out.S_list[static_cast<std::size_t>(k)] * Ht; };

    // (Psi_i)_j, 1-based j:  H A^{i-j+1} S_{j-1} H^T  for j <= i,
    //                        H A^{j-i-1} S_i H^T      for j >  i.
    for (int i = 0; i <= n; ++i) {
        Vector psi(n);
        for (int j = 1; j <= n; ++j) {
            if (j <= i)
                psi(j - 1) = HA[static_cast<std::size_t>(i - j + 1)].dot(S_Ht(j - 1));
            else
                psi(j - 1) = HA[static_cast<std::size_t>(j - i - 1)].dot(S_Ht(i));
        }
        out.psi_vectors.push_back(std::move(psi));
    }

    out.Psi.resize(n, n);
    for (int c = 0; c < n; ++c) out.Psi.col(c) = out.psi_vectors[static_cast<std::size_t>(c)];

    const double scale = 1.0 + out.Psi.cwiseAbs().maxCoeff();
    const double asym = (out.Psi - out.Psi.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * scale)
        throw AsymmetryDetected("build_psi: Psi is not symmetric (max deviation " +
                                std::to_string(asym) + ")");
    out.Psi = symmetrized(out.Psi);
    return out;
}

TrendSolution solve_g(const LdsParams& lds) {
    const Matrix M = build_M(lds);
    const RowVector target = lds.H * matrix_power(lds.A, lds.n);

    Eigen::JacobiSVD<Matrix> svd(M.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);

    TrendSolution out;
    out.g = svd.solve(target.transpose());
    out.rank = static_cast<int>(svd.rank());
    out.residual_norm = (out.g.transpose() * M - target).norm();
    // Backward-error scale: a tiny H A^n still leaves rounding of order |g||M|.
    if (out.residual_norm > 1e-6 * (target.norm() + out.g.norm() * M.norm()))
        throw NoSolution("solve_g: no g satisfies g^T M = H A^n (residual " +
                         std::to_string(out.residual_norm) + ", rank " +
                         std::to_string(out.rank) + ")");
    return out;
}

PlgParams lds_to_plg(const LdsParams& lds) {
    lds.check_shapes();
    const int n = lds.n;
    const auto HA = observation_powers(lds, n + 1);
    const ConversionIntermediates parts = build_psi(lds);
    const TrendSolution trend = solve_g(lds);

    PlgParams out;
    out.n = n;
    out.mu0.resize(n);
    out.Sigma0.resize(n, n);
    const Vector Ht = lds.H.transpose();
    for (int i = 1; i <= n; ++i) {
        const RowVector& hi = HA[static_cast<std::size_t>(i - 1)];
        out.mu0(i - 1) = hi.dot(lds.x1hat);
        for (int j = i; j <= n; ++j) {
            const RowVector& hj = HA[static_cast<std::size_t>(j - 1)];
            double v = hj.dot(lds.P1 * hi.transpose());
            if (i == j) v += lds.R;
            v += HA[static_cast<std::size_t>(j - i)].dot(
                parts.S_list[static_cast<std::size_t>(i - 1)] * Ht);
            out.Sigma0(i - 1, j - 1) = v;
            out.Sigma0(j - 1, i - 1) = v;
        }
    }

    out.g = trend.g;
    const Vector& psi_n = parts.psi_vectors[static_cast<std::size_t>(n)];
    out.C = psi_n - parts.Psi * out.g - lds.R * out.g;

    double sigma2 = lds.H.dot(parts.S_list[static_cast<std::size_t>(n)] * Ht) + lds.R -
                    out.g.dot(psi_n) - out.C.dot(out.g);
    if (sigma2 < -1e-8)
        throw NegativeSigma2("lds_to_plg: sigma2 = " + std::to_string(sigma2));
    out.sigma2 = std::max(sigma2, 0.0);
    return out;
}

}  // namespace plg
