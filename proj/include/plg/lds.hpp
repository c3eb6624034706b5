#pragma once

#include "plg/gauss.hpp"
#include "plg/plg_model.hpp"
#include "plg/random.hpp"

namespace plg {

/// Linear dynamical system with scalar observations:
///   X_1 ~ N(x1hat, P1),  Y_t | X_t ~ N(H X_t, R),  X_{t+1} | X_t ~ N(A X_t, Q).
struct LdsParams {
    int n = 1;
    Matrix A;
    RowVector H;
    Matrix Q;
    double R = 0.0;
    Vector x1hat;
    Matrix P1;

    bool valid() const;
    void check_shapes() const;
};

/// Kalman filter state. (xhat_minus, P_minus) is the prior for the next
/// observation; (xhat, P) is the posterior after the most recent one.
struct KalmanState {
    Vector xhat_minus;
    Matrix P_minus;
    Vector xhat;
    Matrix P;
    std::size_t t = 0;
};

KalmanState kalman_init(const LdsParams& params);

/// Measurement update with y followed by the time update to the next prior.
/// Throws DegenerateVariance if H P^- H^T + R <= 1e-12.
KalmanState kalman_update(const LdsParams& params, const KalmanState& state, double y);

/// N(H xhat^-, H P^- H^T + R).
GaussianDist lds_predictive(const LdsParams& params, const KalmanState& state);

/// S_i = sum_{k=1}^{i} A^{k-1} Q (A^{k-1})^T; S_0 = 0.
Matrix build_S(const LdsParams& params, int i);

struct MultiStepMoments {
    double mean_i = 0.0;
    double cov_ij = 0.0;
};

/// Mean of the observation i steps ahead and its covariance with the one j
/// steps ahead (1 <= i <= j), computed from the current prior.
MultiStepMoments lds_multi_step(const LdsParams& params, const KalmanState& state, int i, int j);

double lds_loglik(const LdsParams& params, const Trace& trace);

Trace lds_sample(const LdsParams& params, std::size_t length, Rng& rng);

}  // namespace plg
