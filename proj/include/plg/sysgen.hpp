#pragma once

#include <cstdint>
#include <string_view>

#include "plg/lds.hpp"
#include "plg/random.hpp"

namespace plg {

/// How the observation-noise variance R is drawn from x ~ U(-1, 1).
enum class RMode {
    Variance,  ///< R = 2^{2x}, a variance in (1/4, 4) like the diagonal of Q.
    Literal,   ///< R = 2^{x}, in (1/2, 2).
};

RMode parse_r_mode(std::string_view text);
std::string_view to_string(RMode mode);

struct GenConfig {
    int n = 2;
    std::uint64_t seed = 0;
    RMode r_mode = RMode::Variance;
};

/// Gram matrix of n independent uniform directions on the unit sphere in
/// dimension n + 1. Unit diagonal, PSD.
Matrix random_correlation(int n, Rng& rng);

/// Spectral radius via the eigenvalues of a general real matrix.
double spectral_radius(const Matrix& a);

struct GeneratedLds {
    LdsParams params;
    /// The target spectral radius the transition matrix was scaled to.
    double lambda = 0.0;
};

/// Random stable LDS: H, A, x1hat entries ~ U(-1, 1); A rescaled to spectral
/// radius lambda ~ U(0, 1); Q and P1 are D Q' D with Q' a random correlation
/// matrix and D = diag(2^{x_i}), x_i ~ U(-1, 1).
GeneratedLds random_lds_detailed(const GenConfig& cfg);
LdsParams random_lds(const GenConfig& cfg);

}  // namespace plg
