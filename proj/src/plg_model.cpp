#include "plg/plg_model.hpp"

#include "plg/errors.hpp"

namespace plg {

void PlgParams::check_shapes() const {
    if (n < 1) throw DimensionMismatch("PlgParams: n must be >= 1");
    if (mu0.size() != n || g.size() != n || C.size() != n || Sigma0.rows() != n ||
        Sigma0.cols() != n)
        throw DimensionMismatch("PlgParams: parameter shapes do not match n");
}

bool PlgParams::valid() const {
    try {
        check_shapes();
    } catch (const DimensionMismatch&) {
        return false;
    }
    return sigma2 >= 0.0 && is_symmetric(Sigma0, kPsdTolerance) && is_psd(Sigma0, kPsdTolerance);
}

Matrix build_G(const Vector& g) {
    const Eigen::Index n = g.size();
    Matrix G = Matrix::Zero(n, n);
    if (n > 1) G.topRightCorner(n - 1, n - 1).setIdentity();
    G.row(n - 1) = g.transpose();
    return G;
}

PlgState plg_init(const PlgParams& params) {
    params.check_shapes();
    return PlgState{params.mu0, params.Sigma0, 0, true};
}

namespace {

// sigma2 e_n e_n^T + G C e_n^T + e_n C^T G^T
Matrix build_B(const PlgParams& p, const Matrix& G) {
    const Eigen::Index n = p.n;
    const Vector GC = G * p.C;
    Matrix B = Matrix::Zero(n, n);
    B.col(n - 1) += GC;
    B.row(n - 1) += GC.transpose();
    B(n - 1, n - 1) += p.sigma2;
    return B;
}

PlgState update_with_G(const PlgParams& p, const Matrix& G, const PlgState& s, double y) {
    const Eigen::Index n = p.n;
    const double s11 = s.Sigma(0, 0);
    if (!(s11 > kVarianceFloor))
        throw DegenerateVariance("plg_update: predictive variance below floor", s.t);

    Vector F = G * s.Sigma.col(0);
    F(n - 1) += p.C(0);

    const Matrix B = build_B(p, G);

    PlgState next;
    next.mu = G * s.mu + F * ((y - s.mu(0)) / s11);
    next.Sigma = symmetrized(G * s.Sigma * G.transpose() + B - F * F.transpose() / s11);
    next.t = s.t + 1;
    next.psd_ok = is_psd(next.Sigma, kPsdTolerance);
    return next;
}

PlgState shift_without_gain(const PlgParams& p, const Matrix& G, const PlgState& s) {
    const Matrix B = build_B(p, G);

    PlgState next;
    next.mu = G * s.mu;
    next.Sigma = symmetrized(G * s.Sigma * G.transpose() + B);
    next.t = s.t + 1;
    next.psd_ok = is_psd(next.Sigma, kPsdTolerance);
    return next;
}

}  // namespace

PlgState plg_update(const PlgParams& params, const PlgState& state, double y) {
    return update_with_G(params, build_G(params.g), state, y);
}

GaussianDist plg_predict_next(const PlgState& state) {
    return GaussianDist::scalar(state.mu(0), state.Sigma(0, 0));
}

GaussianDist plg_extend(const PlgParams& params, const PlgState& state, int m) {
    const Eigen::Index n = params.n;
    const Eigen::Index total = n + m;
    Vector mean(total);
    Matrix cov = Matrix::Zero(total, total);
    mean.head(n) = state.mu;
    cov.topLeftCorner(n, n) = state.Sigma;

    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index lo = k;       // first index of the trailing window
        const Eigen::Index cur = k + n;  // index being appended
        mean(cur) = params.g.dot(mean.segment(lo, n));

        // Cov(new, j) = Cov(Y_j, window) g (+ C for j inside the window).
        Vector cross = cov.topRows(cur).middleCols(lo, n) * params.g;
        cross.segment(lo, n) += params.C;
        cov.col(cur).head(cur) = cross;
        cov.row(cur).head(cur) = cross.transpose();

        const Matrix window = cov.block(lo, lo, n, n);
        cov(cur, cur) = params.g.dot(window * params.g) + 2.0 * params.g.dot(params.C) +
                        params.sigma2;
    }
    return GaussianDist(std::move(mean), std::move(cov));
}

double plg_loglik(const PlgParams& params, const Trace& trace) {
    if (trace.ys.empty()) throw DimensionMismatch("plg_loglik: empty trace");
    const Matrix G = build_G(params.g);
    PlgState state = plg_init(params);
    double total = 0.0;
    for (std::size_t i = 0; i < trace.ys.size(); ++i) {
        const double y = trace.ys[i];
        const double var = state.Sigma(0, 0);
        if (!(var > kVarianceFloor))
            throw DegenerateVariance("plg_loglik: predictive variance below floor", i);
        total += log_density(plg_predict_next(state), y);
        if (i + 1 < trace.ys.size()) state = update_with_G(params, G, state, y);
    }
    return total;
}

Trace plg_sample(const PlgParams& params, std::size_t length, Rng& rng) {
    if (length == 0) throw DimensionMismatch("plg_sample: length must be >= 1");
    const Matrix G = build_G(params.g);
    PlgState state = plg_init(params);
    Trace out;
    out.ys.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        const double y = sample(plg_predict_next(state), rng)(0);
        out.ys.push_back(y);
        if (i + 1 >= length) break;
        if (state.Sigma(0, 0) > kVarianceFloor) {
            state = update_with_G(params, G, state, y);
        } else {
            // Deterministic next observation: the pseudo-inverse conditioning drops
            // the gain term, leaving the pure time shift.
            state = shift_without_gain(params, G, state);
        }
    }
    return out;
}

long long plg_param_count(int n) {
    const long long m = n;
    return m * (m + 1) / 2 + 3 * m + 1;
}

long long lds_param_count(int n) {
    const long long m = n;
    return 2 * m * m + 3 * m + 1;
}

}  // namespace plg
