#pragma once

#include <vector>

#include "plg/gauss.hpp"
#include "plg/random.hpp"

namespace plg {

/// One observation sequence y_1 .. y_N emitted from the initial state.
struct Trace {
    std::vector<double> ys;
    std::size_t size() const { return ys.size(); }
};

/// Parameters of an n-dimensional predictive linear-Gaussian model.
///
/// The state is the distribution of the next n observations. mu0/Sigma0 give
/// that distribution before anything is observed; the (n+1)-th observation is
/// g^T (window) + eta, where eta has variance sigma2 and covariance C with the
/// window.
struct PlgParams {
    int n = 1;
    Vector mu0;
    Matrix Sigma0;
    Vector g;
    Vector C;
    double sigma2 = 0.0;

    /// Shapes agree with n, Sigma0 symmetric PSD (1e-10), sigma2 >= 0.
    bool valid() const;
    /// Throws DimensionMismatch on bad shapes; does not check PSD.
    void check_shapes() const;
};

struct PlgState {
    Vector mu;
    Matrix Sigma;
    std::size_t t = 0;
    /// Diagnostic: Sigma passed the tolerance PSD check after the last update.
    bool psd_ok = true;
};

/// [0 I_{n-1}; g^T]. For n = 1 this is the 1x1 matrix [g_1].
Matrix build_G(const Vector& g);

PlgState plg_init(const PlgParams& params);

/// Conditions the state on the next observation y and shifts the window by one.
/// Throws DegenerateVariance if Sigma(0,0) <= 1e-12.
PlgState plg_update(const PlgParams& params, const PlgState& state, double y);

/// N(mu(0), Sigma(0,0)).
GaussianDist plg_predict_next(const PlgState& state);

/// Joint distribution of the next n + m observations given the current history.
///
/// Each appended coordinate is g^T (trailing n coordinates) + eta, where eta
/// has covariance C with that trailing window and is uncorrelated with every
/// earlier coordinate.
GaussianDist plg_extend(const PlgParams& params, const PlgState& state, int m);

/// Sum of one-step predictive log-densities along the trace. A failing update
/// rethrows DegenerateVariance carrying the time index.
double plg_loglik(const PlgParams& params, const Trace& trace);

Trace plg_sample(const PlgParams& params, std::size_t length, Rng& rng);

/// n(n+1)/2 + 3n + 1
long long plg_param_count(int n);
/// 2n^2 + 3n + 1
long long lds_param_count(int n);

}  // namespace plg
