#pragma once

#include "plg/linalg.hpp"
#include "plg/random.hpp"

namespace plg {

/// Multivariate Gaussian N(mean, cov). Used for every predictive distribution
/// in the library; a one-dimensional predictive is just a 1x1 cov.
struct GaussianDist {
    Vector mean;
    Matrix cov;

    GaussianDist() = default;
    GaussianDist(Vector m, Matrix c);

    /// Scalar convenience constructor.
    static GaussianDist scalar(double mean, double variance);

    Eigen::Index dim() const { return mean.size(); }

    /// Symmetric within 1e-12 and PSD within 1e-10 (relative).
    bool valid() const;
};

/// Distribution of coordinates 2..p given coordinate 1 equals y.
///
/// mean = mu_Z + (sigma_YZ / sigma_YY) (y - mu_Y)
/// cov  = Sigma_ZZ - sigma_YZ sigma_YZ^T / sigma_YY   (symmetrized)
///
/// Throws DegenerateVariance when sigma_YY <= 1e-12.
GaussianDist condition_on_first(const GaussianDist& joint, double y);

/// Natural-log density evaluated through an LDLT factorization.
/// Throws SingularCovariance if the smallest pivot is below 1e-12 of the largest.
double log_density(const GaussianDist& dist, const Vector& x);
double log_density(const GaussianDist& dist, double x);

/// mean + L xi with L L^T = cov (negative eigenvalues floored at zero).
Vector sample(const GaussianDist& dist, Rng& rng);

/// Marginal over the first k coordinates.
GaussianDist marginal_head(const GaussianDist& dist, Eigen::Index k);

}  // namespace plg
