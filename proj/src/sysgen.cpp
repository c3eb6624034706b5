#include "plg/sysgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "plg/errors.hpp"

namespace plg {

RMode parse_r_mode(std::string_view text) {
    if (text == "variance") return RMode::Variance;
    if (text == "literal") return RMode::Literal;
    throw std::invalid_argument("unknown r-mode '" + std::string(text) +
                                "' (expected literal|variance)");
}

std::string_view to_string(RMode mode) {
    return mode == RMode::Variance ? "variance" : "literal";
}

Matrix random_correlation(int n, Rng& rng) {
    if (n < 1) throw DimensionMismatch("random_correlation: n must be >= 1");
    Matrix dirs(n + 1, n);
    for (int c = 0; c < n; ++c) {
        Vector v(n + 1);
        double norm = 0.0;
        // A zero draw has probability zero, but would leave no direction to normalize.
        do {
            for (int r = 0; r <= n; ++r) v(r) = rng.normal();
            norm = v.norm();
        } while (norm == 0.0);
        dirs.col(c) = v / norm;
    }
    Matrix corr = symmetrized(dirs.transpose() * dirs);
    corr.diagonal().setOnes();
    return corr;
}

double spectral_radius(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Matrix random_scaled_covariance(int n, Rng& rng) {
    const Matrix corr = random_correlation(n, rng);
    Vector scale(n);
    for (int i = 0; i < n; ++i) scale(i) = std::exp2(rng.uniform(-1.0, 1.0));
    return symmetrized(scale.asDiagonal() * corr * scale.asDiagonal());
}

}  // namespace

GeneratedLds random_lds_detailed(const GenConfig& cfg) {
    const int n = cfg.n;
    if (n < 1) throw DimensionMismatch("random_lds: n must be >= 1");
    Rng rng(cfg.seed);
    auto uniform_fill = [&rng](Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
        return m;
    };

    GeneratedLds out;
    LdsParams& p = out.params;
    p.n = n;
    p.H = uniform_fill(1, n).row(0);

    constexpr int kMaxAttempts = 100;
    double rho = 0.0;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        p.A = uniform_fill(n, n);
        rho = spectral_radius(p.A);
        if (rho > 1e-12) break;
    }
    if (!(rho > 1e-12))
        throw NumericalError("random_lds: transition matrix stayed nilpotent after 100 draws");

    p.x1hat = uniform_fill(n, 1).col(0);
    out.lambda = rng.uniform(0.0, 1.0);
    p.A *= out.lambda / rho;

    p.Q = random_scaled_covariance(n, rng);
    p.P1 = random_scaled_covariance(n, rng);
    const double x = rng.uniform(-1.0, 1.0);
    p.R = cfg.r_mode == RMode::Variance ? std::exp2(2.0 * x) : std::exp2(x);
    return out;
}

LdsParams random_lds(const GenConfig& cfg) { return random_lds_detailed(cfg).params; }

}  // namespace plg
