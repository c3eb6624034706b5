#include "plg/lds.hpp"

#include <algorithm>
#include <cmath>

#include "plg/errors.hpp"

namespace plg {

void LdsParams::check_shapes() const {
    if (n < 1) throw DimensionMismatch("LdsParams: n must be >= 1");
    if (A.rows() != n || A.cols() != n || H.size() != n || Q.rows() != n || Q.cols() != n ||
        x1hat.size() != n || P1.rows() != n || P1.cols() != n)
        throw DimensionMismatch("LdsParams: parameter shapes do not match n");
}

bool LdsParams::valid() const {
    try {
        check_shapes();
    } catch (const DimensionMismatch&) {
        return false;
    }
    return R >= 0.0 && is_symmetric(Q, kPsdTolerance) && is_psd(Q, kPsdTolerance) &&
           is_symmetric(P1, kPsdTolerance) && is_psd(P1, kPsdTolerance);
}

KalmanState kalman_init(const LdsParams& params) {
    params.check_shapes();
    return KalmanState{params.x1hat, params.P1, params.x1hat, params.P1, 0};
}

KalmanState kalman_update(const LdsParams& params, const KalmanState& state, double y) {
    const Vector PHt = state.P_minus * params.H.transpose();
    const double innovation_var = params.H.dot(PHt) + params.R;
    if (!(innovation_var > kVarianceFloor))
        throw DegenerateVariance("kalman_update: innovation variance below floor", state.t);

    const Vector gain = PHt / innovation_var;
    const double innovation = y - params.H.dot(state.xhat_minus);
    const Eigen::Index n = params.n;

    KalmanState next;
    next.xhat = state.xhat_minus + gain * innovation;
    next.P = symmetrized((Matrix::Identity(n, n) - gain * params.H) * state.P_minus);
    next.xhat_minus = params.A * next.xhat;
    next.P_minus = symmetrized(params.A * next.P * params.A.transpose() + params.Q);
    next.t = state.t + 1;
    return next;
}

GaussianDist lds_predictive(const LdsParams& params, const KalmanState& state) {
    const double mean = params.H.dot(state.xhat_minus);
    const double var = params.H.dot(state.P_minus * params.H.transpose()) + params.R;
    return GaussianDist::scalar(mean, var);
}

Matrix build_S(const LdsParams& params, int i) {
    Matrix S = Matrix::Zero(params.n, params.n);
    Matrix Ak = Matrix::Identity(params.n, params.n);
    for (int k = 1; k <= i; ++k) {
        S += Ak * params.Q * Ak.transpose();
        Ak = params.A * Ak;
    }
    return symmetrized(S);
}

MultiStepMoments lds_multi_step(const LdsParams& params, const KalmanState& state, int i, int j) {
    if (i < 1 || j < i) throw DimensionMismatch("lds_multi_step: need 1 <= i <= j");
    const RowVector HAi = params.H * matrix_power(params.A, i - 1);
    const RowVector HAj = params.H * matrix_power(params.A, j - 1);
    const RowVector HAji = params.H * matrix_power(params.A, j - i);

    MultiStepMoments out;
    out.mean_i = HAi.dot(state.xhat_minus);
    out.cov_ij = HAj.dot(state.P_minus * HAi.transpose()) + (i == j ? params.R : 0.0) +
                 HAji.dot(build_S(params, i - 1) * params.H.transpose());
    return out;
}

double lds_loglik(const LdsParams& params, const Trace& trace) {
    if (trace.ys.empty()) throw DimensionMismatch("lds_loglik: empty trace");
    KalmanState state = kalman_init(params);
    double total = 0.0;
    for (std::size_t i = 0; i < trace.ys.size(); ++i) {
        const GaussianDist pred = lds_predictive(params, state);
        if (!(pred.cov(0, 0) > kVarianceFloor))
            throw DegenerateVariance("lds_loglik: predictive variance below floor", i);
        total += log_density(pred, trace.ys[i]);
        if (i + 1 < trace.ys.size()) state = kalman_update(params, state, trace.ys[i]);
    }
    return total;
}

Trace lds_sample(const LdsParams& params, std::size_t length, Rng& rng) {
    params.check_shapes();
    if (length == 0) throw DimensionMismatch("lds_sample: length must be >= 1");
    const Matrix Lq = psd_sqrt(params.Q);
    const double r_sd = std::sqrt(std::max(0.0, params.R));

    Vector x = sample(GaussianDist(params.x1hat, params.P1), rng);
    Trace out;
    out.ys.reserve(length);
    Vector xi(params.n);
    for (std::size_t t = 0; t < length; ++t) {
        out.ys.push_back(params.H.dot(x) + r_sd * rng.normal());
        if (t + 1 == length) break;
        for (Eigen::Index k = 0; k < params.n; ++k) xi(k) = rng.normal();
        x = params.A * x + Lq * xi;
    }
    return out;
}

}  // namespace plg
