#include "plg/ce_learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plg/errors.hpp"

namespace plg {

void TraceSet::validate() const {
    if (n < 1) throw DimensionMismatch("TraceSet: n must be >= 1");
    if (traces.size() < 2) throw DimensionMismatch("TraceSet: need at least 2 traces");
    const std::size_t len = traces.front().size();
    for (const auto& tr : traces)
        if (tr.size() != len) throw DimensionMismatch("TraceSet: traces differ in length");
    if (len < 2 * static_cast<std::size_t>(n))
        throw DimensionMismatch("TraceSet: traces must be at least 2n observations long");
}

namespace {

Vector column_means(const TraceSet& ts) {
    const std::size_t N = ts.trace_length();
    Vector sums = Vector::Zero(static_cast<Eigen::Index>(N));
    for (const auto& tr : ts.traces)
        for (std::size_t t = 0; t < N; ++t) sums(static_cast<Eigen::Index>(t)) += tr.ys[t];
    return sums / static_cast<double>(ts.num_traces());
}

}  // namespace

InitialEstimate estimate_initial(const TraceSet& ts) {
    ts.validate();
    const int n = ts.n;
    const double K = static_cast<double>(ts.num_traces());
    const Vector mean = column_means(ts).head(n);

    Matrix cov = Matrix::Zero(n, n);
    Vector dev(n);
    for (const auto& tr : ts.traces) {
        for (int i = 0; i < n; ++i) dev(i) = tr.ys[static_cast<std::size_t>(i)] - mean(i);
        cov.selfadjointView<Eigen::Lower>().rankUpdate(dev);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    return InitialEstimate{mean, cov / (K - 1.0)};
}

TrendEstimate estimate_g(const TraceSet& ts) {
    ts.validate();
    const int n = ts.n;
    const Eigen::Index N = static_cast<Eigen::Index>(ts.trace_length());
    const Vector ybar = column_means(ts);
    const Eigen::Index rows = N - n;

    Matrix gamma(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) gamma.row(r) = ybar.segment(r, n).transpose();
    const Vector lambda = ybar.segment(n, rows);

    Eigen::JacobiSVD<Matrix> svd(gamma, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();

    // Cutoff relative to the larger of Gamma's own scale and the scale Gamma
    // would have if the means were as large as the observations, so means that
    // vanish up to rounding count as zero.
    double sumsq = 0.0;
    for (const auto& tr : ts.traces)
        for (double y : tr.ys) sumsq += y * y;
    const double rms = std::sqrt(sumsq / static_cast<double>(ts.num_traces() * ts.trace_length()));
    const double smax = sv.size() ? sv.maxCoeff() : 0.0;
    const double smin = sv.size() ? sv.minCoeff() : 0.0;
    const double cutoff =
        1e-8 * std::max(smax, rms * std::sqrt(static_cast<double>(rows * n)));

    TrendEstimate out;
    out.gamma_condition = smin > 0.0 ? (smax / smin) * (smax / smin)
                                     : std::numeric_limits<double>::infinity();
    const auto rank = (sv.array() > cutoff).count();
    out.umt_ok = rank == n;
    if (out.umt_ok) {
        // Same minimizer as the normal equations without squaring the condition number.
        out.g = gamma.colPivHouseholderQr().solve(lambda);
    } else {
        const Vector ut_l = svd.matrixU().transpose() * lambda;
        Vector scaled = Vector::Zero(sv.size());
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > cutoff) scaled(i) = ut_l(i) / sv(i);
        out.g = svd.matrixV() * scaled;
    }
    return out;
}

NoiseEstimate estimate_noise(const TraceSet& ts, const Vector& g) {
    ts.validate();
    const int n = ts.n;
    if (g.size() != n) throw DimensionMismatch("estimate_noise: g has wrong dimension");
    const std::size_t N = ts.trace_length();
    const std::size_t un = static_cast<std::size_t>(n);
    const double denom = static_cast<double>(ts.num_traces() * (N - un)) - 1.0;

    Vector c_sum = Vector::Zero(n);
    double s2_sum = 0.0;
    for (const auto& tr : ts.traces) {
        const Eigen::Map<const Vector> y(tr.ys.data(), static_cast<Eigen::Index>(N));
        for (std::size_t t = 0; t + un < N; ++t) {
            const auto z = y.segment(static_cast<Eigen::Index>(t), n);
            const double eta = y(static_cast<Eigen::Index>(t + un)) - g.dot(z);
            c_sum += z * eta;
            s2_sum += eta * eta;
        }
    }
    return NoiseEstimate{c_sum / denom, s2_sum / denom};
}

bool probe_psd_violation(const PlgParams& params, const Trace& trace) {
    PlgState state = plg_init(params);
    if (!is_psd(state.Sigma, kPsdTolerance)) return true;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!(state.Sigma(0, 0) > kVarianceFloor)) return true;
        state = plg_update(params, state, trace.ys[i]);
        if (!state.psd_ok) return true;
    }
    return false;
}

CeResult ce_learn(const TraceSet& ts, const CeOptions& options) {
    ts.validate();
    const InitialEstimate init = estimate_initial(ts);
    const TrendEstimate trend = estimate_g(ts);
    const NoiseEstimate noise = estimate_noise(ts, trend.g);

    CeResult out;
    out.params.n = ts.n;
    out.params.mu0 = init.mu0;
    out.params.Sigma0 = init.Sigma0;
    if (options.clip_sigma0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(init.Sigma0);
        out.params.Sigma0 = symmetrized(es.eigenvectors() *
                                        es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                        es.eigenvectors().transpose());
    }
    out.params.g = trend.g;
    out.params.C = noise.C;
    out.params.sigma2 = noise.sigma2;

    out.diagnostics.gamma_condition = trend.gamma_condition;
    out.diagnostics.umt_ok = trend.umt_ok;
    out.diagnostics.psd_violation = probe_psd_violation(out.params, ts.traces.front());
    return out;
}

}  // namespace plg
