#include "plg/gauss.hpp"

#include <cmath>
#include <numbers>

#include "plg/errors.hpp"

namespace plg {

GaussianDist::GaussianDist(Vector m, Matrix c) : mean(std::move(m)), cov(std::move(c)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw DimensionMismatch("GaussianDist: covariance shape does not match mean");
}

GaussianDist GaussianDist::scalar(double mean, double variance) {
    return GaussianDist(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
}

bool GaussianDist::valid() const {
    return is_symmetric(cov, 1e-12) && is_psd(cov, kPsdTolerance);
}

GaussianDist condition_on_first(const GaussianDist& joint, double y) {
    const Eigen::Index p = joint.dim();
    if (p < 2) throw DimensionMismatch("condition_on_first: need dimension >= 2");
    const double s_yy = joint.cov(0, 0);
    if (!(s_yy > kVarianceFloor))
        throw DegenerateVariance("condition_on_first: conditioning variance below floor");

    const Eigen::Index q = p - 1;
    const Vector s_yz = joint.cov.col(0).tail(q);
    Vector mean = joint.mean.tail(q) + s_yz * ((y - joint.mean(0)) / s_yy);
    Matrix cov = joint.cov.bottomRightCorner(q, q) - s_yz * s_yz.transpose() / s_yy;
    return GaussianDist(std::move(mean), symmetrized(cov));
}

double log_density(const GaussianDist& dist, const Vector& x) {
    const Eigen::Index p = dist.dim();
    if (x.size() != p) throw DimensionMismatch("log_density: point dimension mismatch");

    Eigen::LDLT<Matrix> ldlt(symmetrized(dist.cov));
    const Vector d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || p == 0)
        throw SingularCovariance("log_density: factorization failed");
    const double dmax = d.maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= kVarianceFloor * dmax)
        throw SingularCovariance("log_density: covariance is singular at tolerance");

    const Vector r = x - dist.mean;
    const double quad = r.dot(ldlt.solve(r));
    const double logdet = d.array().log().sum();
    return -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double log_density(const GaussianDist& dist, double x) {
    return log_density(dist, Vector::Constant(1, x));
}

Vector sample(const GaussianDist& dist, Rng& rng) {
    const Eigen::Index p = dist.dim();
    Vector xi(p);
    for (Eigen::Index i = 0; i < p; ++i) xi(i) = rng.normal();
    return dist.mean + psd_sqrt(dist.cov) * xi;
}

GaussianDist marginal_head(const GaussianDist& dist, Eigen::Index k) {
    return GaussianDist(dist.mean.head(k), dist.cov.topLeftCorner(k, k));
}

}  // namespace plg
