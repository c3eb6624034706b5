#include <doctest.h>

#include <cmath>

#include "plg/errors.hpp"
#include "plg/lds.hpp"
#include "plg/sysgen.hpp"
#include "test_support.hpp"

using namespace plg;
using namespace plg::testing;

namespace {

LdsParams scalar_lds(double a, double h, double q, double r, double x1, double p1) {
    LdsParams p;
    p.n = 1;
    p.A = mat({{a}});
    p.H = RowVector::Constant(1, h);
    p.Q = mat({{q}});
    p.R = r;
    p.x1hat = vec({x1});
    p.P1 = mat({{p1}});
    return p;
}

}  // namespace

TEST_CASE("kalman_update: scalar arithmetic") {
    const LdsParams p = scalar_lds(1, 1, 0, 1, 0, 1);
    const KalmanState s = kalman_update(p, kalman_init(p), 2.0);
    CHECK(s.xhat(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.P(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.xhat_minus(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.P_minus(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.t == 1);
}

TEST_CASE("kalman_update: uninformative and exact observations") {
    const LdsParams base = random_lds(GenConfig{3, 17, RMode::Variance});
    SUBCASE("huge R") {
        LdsParams p = base;
        p.R = 1e12;
        const KalmanState s0 = kalman_init(p);
        const KalmanState s1 = kalman_update(p, s0, 5.0);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(s1.xhat(i) - s0.xhat_minus(i)) <=
                  1e-10 * (1 + std::abs(s0.xhat_minus(i))));
        CHECK((s1.P - s0.P_minus).cwiseAbs().maxCoeff() <= 1e-10 * s0.P_minus.cwiseAbs().maxCoeff());
    }
    SUBCASE("R = 0 with H = e1") {
        LdsParams p = base;
        p.R = 0.0;
        p.H = RowVector::Zero(3);
        p.H(0) = 1.0;
        const KalmanState s1 = kalman_update(p, kalman_init(p), 0.375);
        CHECK(s1.xhat(0) == doctest::Approx(0.375).epsilon(1e-14));
    }
}

TEST_CASE("kalman_update: degenerate innovation variance") {
    const LdsParams p = scalar_lds(1, 1, 0, 0, 0, 0);
    CHECK_THROWS_AS(kalman_update(p, kalman_init(p), 1.0), DegenerateVariance);
}

TEST_CASE("lds_predictive") {
    const LdsParams p = scalar_lds(0.5, 1, 0.25, 1, 3, 2);
    const GaussianDist d = lds_predictive(p, kalman_init(p));
    CHECK(d.mean(0) == 3.0);
    CHECK(d.cov(0, 0) == 3.0);

    LdsParams z = random_lds(GenConfig{2, 5, RMode::Variance});
    z.H.setZero();
    const GaussianDist dz = lds_predictive(z, kalman_init(z));
    CHECK(dz.mean(0) == 0.0);
    CHECK(dz.cov(0, 0) == z.R);
}

TEST_CASE("build_S") {
    const LdsParams p = random_lds(GenConfig{3, 9, RMode::Variance});
    CHECK(build_S(p, 0) == Matrix::Zero(3, 3));
    CHECK((build_S(p, 1) - p.Q).cwiseAbs().maxCoeff() == 0.0);
    const LdsParams s = scalar_lds(2, 1, 1, 1, 0, 1);
    CHECK(build_S(s, 3)(0, 0) == 21.0);
}

TEST_CASE("lds_multi_step: examples") {
    SUBCASE("i = j = 1 reduces to the one-step predictive") {
        const LdsParams p = random_lds(GenConfig{4, 31, RMode::Variance});
        KalmanState s = kalman_init(p);
        s = kalman_update(p, s, 0.7);
        const auto m = lds_multi_step(p, s, 1, 1);
        const GaussianDist d = lds_predictive(p, s);
        CHECK(m.mean_i == doctest::Approx(d.mean(0)).epsilon(1e-14));
        CHECK(m.cov_ij == doctest::Approx(d.cov(0, 0)).epsilon(1e-14));
    }
    SUBCASE("scalar two steps ahead") {
        const LdsParams p = scalar_lds(0.5, 1, 0.25, 1, 1, 2);
        const auto m = lds_multi_step(p, kalman_init(p), 2, 2);
        CHECK(m.mean_i == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(m.cov_ij == doctest::Approx(1.75).epsilon(1e-15));
    }
    SUBCASE("bad indices") {
        const LdsParams p = scalar_lds(0.5, 1, 0.25, 1, 1, 2);
        CHECK_THROWS_AS(lds_multi_step(p, kalman_init(p), 2, 1), DimensionMismatch);
        CHECK_THROWS_AS(lds_multi_step(p, kalman_init(p), 0, 1), DimensionMismatch);
    }
}

TEST_CASE("lds_multi_step mean equals repeated time updates") {
    for (int n = 1; n <= 5; ++n) {
        const LdsParams p = random_lds(GenConfig{n, 200u + n, RMode::Variance});
        KalmanState s = kalman_update(p, kalman_init(p), 0.3);
        Vector x = s.xhat_minus;
        for (int i = 1; i <= 6; ++i) {
            const double mean = lds_multi_step(p, s, i, i).mean_i;
            CHECK(std::abs(mean - p.H.dot(x)) <= 1e-10);
            x = p.A * x;
        }
    }
}

TEST_CASE("lds_sample: noiseless rollout") {
    LdsParams p = random_lds(GenConfig{3, 12, RMode::Variance});
    p.Q.setZero();
    p.R = 0.0;
    p.P1.setZero();
    Rng rng(1);
    const Trace tr = lds_sample(p, 10, rng);
    Vector x = p.x1hat;
    for (std::size_t t = 0; t < 10; ++t) {
        CHECK(tr.ys[t] == doctest::Approx(p.H.dot(x)).epsilon(1e-13));
        x = p.A * x;
    }
}

TEST_CASE("lds_sample: first-step mean and lag-one covariance") {
    const LdsParams p = random_lds(GenConfig{2, 8, RMode::Variance});
    Rng rng(2);
    const int K = 100000;
    double s1 = 0, s2 = 0, s12 = 0;
    for (int k = 0; k < K; ++k) {
        const Trace tr = lds_sample(p, 2, rng);
        s1 += tr.ys[0];
        s2 += tr.ys[1];
        s12 += tr.ys[0] * tr.ys[1];
    }
    const auto m11 = lds_multi_step(p, kalman_init(p), 1, 1);
    const auto m22 = lds_multi_step(p, kalman_init(p), 2, 2);
    const auto m12 = lds_multi_step(p, kalman_init(p), 1, 2);
    CHECK(std::abs(s1 / K - m11.mean_i) <= 5 * std::sqrt(m11.cov_ij / K));

    const double cov = (s12 - s1 * s2 / K) / (K - 1);
    const double se = std::sqrt((m12.cov_ij * m12.cov_ij + m11.cov_ij * m22.cov_ij) / K);
    CHECK(std::abs(cov - m12.cov_ij) <= 5 * se);
}

TEST_CASE("P stays symmetric PSD along update chains") {
    Rng rng(3);
    for (int sys = 0; sys < 100; ++sys) {
        const int n = 1 + sys % 6;
        const LdsParams p = random_lds(GenConfig{n, 900u + sys, RMode::Variance});
        KalmanState s = kalman_init(p);
        const Trace tr = lds_sample(p, 20, rng);
        for (double y : tr.ys) {
            s = kalman_update(p, s, y);
            CHECK(is_symmetric(s.P, 1e-10));
            CHECK(is_psd(s.P, 1e-10));
            CHECK(is_psd(s.P_minus, 1e-10));
        }
    }
}

TEST_CASE("lds_loglik") {
    const LdsParams p = random_lds(GenConfig{3, 4, RMode::Variance});
    const GaussianDist first = lds_predictive(p, kalman_init(p));
    CHECK(lds_loglik(p, Trace{{0.25}}) == log_density(first, 0.25));

    Rng rng(5);
    const Trace tr = lds_sample(p, 30, rng);
    const Trace copy = tr;
    CHECK(lds_loglik(p, tr) == lds_loglik(p, copy));
    CHECK_THROWS_AS(lds_loglik(p, Trace{}), DimensionMismatch);
}

TEST_CASE("LdsParams::valid") {
    LdsParams p = random_lds(GenConfig{2, 1, RMode::Variance});
    CHECK(p.valid());
    p.R = -1;
    CHECK_FALSE(p.valid());
    p.R = 1;
    p.Q = mat({{1, 3}, {3, 1}});
    CHECK_FALSE(p.valid());
}
