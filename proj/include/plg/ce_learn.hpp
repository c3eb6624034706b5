#pragma once

#include <vector>

#include "plg/plg_model.hpp"

namespace plg {

/// K equal-length traces plus the model dimension to fit.
struct TraceSet {
    std::vector<Trace> traces;
    int n = 1;

    std::size_t num_traces() const { return traces.size(); }
    std::size_t trace_length() const { return traces.empty() ? 0 : traces.front().size(); }

    /// Throws DimensionMismatch unless K >= 2, N >= 2n and all lengths agree.
    void validate() const;
};

struct CeDiagnostics {
    /// Condition number of Gamma^T Gamma (infinite when Gamma has a zero
    /// singular value).
    double gamma_condition = 1.0;
    /// Gamma has rank n. Singular values below 1e-8 x max(largest, rms(y) sqrt(rows n))
    /// count as zero.
    bool umt_ok = true;
    /// The probe filter hit a non-PSD Sigma_t or a predictive variance <= 1e-12.
    bool psd_violation = false;
};

struct InitialEstimate {
    Vector mu0;
    Matrix Sigma0;
};

struct TrendEstimate {
    Vector g;
    double gamma_condition = 1.0;
    bool umt_ok = true;
};

struct NoiseEstimate {
    Vector C;
    double sigma2 = 0.0;
};

struct CeOptions {
    /// Floor negative eigenvalues of the learned Sigma0 at zero. Off by default;
    /// nothing else is ever repaired.
    bool clip_sigma0 = false;
};

struct CeResult {
    PlgParams params;
    CeDiagnostics diagnostics;
};

/// Sample mean and unbiased sample covariance of the first n observations.
InitialEstimate estimate_initial(const TraceSet& ts);

/// Regression of the lagged cross-trace means onto the following mean.
TrendEstimate estimate_g(const TraceSet& ts);

/// Noise covariance with the window and noise variance from the residuals
/// y_{t+n+1} - g^T z_t, t = 0 .. N-n-1, normalized by K(N-n) - 1.
NoiseEstimate estimate_noise(const TraceSet& ts, const Vector& g);

CeResult ce_learn(const TraceSet& ts, const CeOptions& options = {});

/// Filters `trace` under `params` and reports whether Sigma_t ever left the PSD
/// cone or the predictive variance collapsed.
bool probe_psd_violation(const PlgParams& params, const Trace& trace);

}  // namespace plg
