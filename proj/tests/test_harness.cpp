#include <doctest.h>

#include <cmath>

#include "plg/convert.hpp"
#include "plg/errors.hpp"
#include "plg/harness.hpp"
#include "test_support.hpp"

using namespace plg;
using namespace plg::testing;

namespace {

PlgParams scalar_plg(double mu0, double s0, double g, double c, double s2) {
    PlgParams p;
    p.n = 1;
    p.mu0 = vec({mu0});
    p.Sigma0 = mat({{s0}});
    p.g = vec({g});
    p.C = vec({c});
    p.sigma2 = s2;
    return p;
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.trace_len = 12;
    cfg.k_grid = {20, 200};
    cfg.seeds = {1, 2, 3, 4};
    return cfg;
}

}  // namespace

TEST_CASE("param_l1_error") {
    const PlgParams p = lds_to_plg(random_lds(GenConfig{3, 2, RMode::Variance}));
    CHECK(param_l1_error(p, p) == 0.0);

    const PlgParams a = scalar_plg(0, 1, 0.5, 0, 1);
    const PlgParams b = scalar_plg(0.2, 1.3, 0.5, 0.1, 0.6);
    // (0.2 + 0.3 + 0 + 0.1 + 0.4) / 5
    CHECK(param_l1_error(a, b) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(param_l1_error(a, b) == param_l1_error(b, a));

    const PlgParams q = lds_to_plg(random_lds(GenConfig{2, 2, RMode::Variance}));
    CHECK_THROWS_AS(param_l1_error(p, q), DimensionMismatch);
}

TEST_CASE("perturb_params moves every free parameter by exactly delta") {
    const PlgParams p = lds_to_plg(random_lds(GenConfig{3, 7, RMode::Variance}));
    Rng rng(1);
    const PlgParams shifted = perturb_params(p, 0.125, rng);
    CHECK(param_l1_error(shifted, p) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(is_symmetric(shifted.Sigma0, 0.0));
}

TEST_CASE("ExperimentConfig validation") {
    ExperimentConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    CHECK(ExperimentConfig{}.effective_trace_len() == 20);

    ExperimentConfig bad = cfg;
    bad.k_grid.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.k_grid = {200, 20};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.k_grid = {1, 20};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.trace_len = 3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.seeds.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.threads = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config_from_json") {
    const ExperimentConfig cfg = config_from_json(
        R"({"n": 2, "trace_len": 20, "k_grid": [100, 1000], "seeds": [0, 1],
            "r_mode": "literal", "output_dir": "out", "generator": "lds", "threads": 3})");
    CHECK(cfg.n == 2);
    CHECK(cfg.trace_len == 20);
    CHECK(cfg.k_grid == std::vector<std::size_t>{100, 1000});
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1});
    CHECK(cfg.r_mode == RMode::Literal);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.generator == TraceGenerator::Lds);
    CHECK(cfg.threads == 3);

    CHECK_THROWS_AS(config_from_json("[1]"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"n": 2})"), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(R"({"n": 2, "k_grid": [2], "seeds": [0], "generator": "x"})"),
                    std::invalid_argument);
}

TEST_CASE("run_experiment: shape, determinism and thread independence") {
    ExperimentConfig cfg = small_config();
    const ExperimentReport a = run_experiment(cfg);
    REQUIRE(a.cells.size() == cfg.seeds.size() * cfg.k_grid.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].seed == cfg.seeds[i / 2]);
        CHECK(a.cells[i].K == cfg.k_grid[i % 2]);
    }
    cfg.threads = 3;
    const ExperimentReport b = run_experiment(cfg);
    CHECK(report_csv(a) == report_csv(b));
}

TEST_CASE("summaries and verdicts on a hand-built report") {
    ExperimentReport r;
    r.n = 1;
    auto cell = [](std::uint64_t seed, std::size_t K, double ll, double l1, double ref) {
        ReportCell c;
        c.seed = seed;
        c.K = K;
        c.loglik_error = ll;
        c.l1_param_error = l1;
        c.perturbed_loglik_error = ref;
        return c;
    };
    r.cells = {cell(0, 10, -0.4, 0.3, 0.5), cell(0, 100, -0.1, 0.1, 0.2),
               cell(1, 10, -0.2, 0.5, 0.5), cell(1, 100, 0.05, 0.2, 0.2),
               cell(2, 10, NAN, 0.4, 0.5), cell(2, 100, -0.02, 0.05, 0.2)};
    const std::vector<std::size_t> grid = {10, 100};

    const auto l1 = summarize_l1(r, grid);
    CHECK(l1[0].median == doctest::Approx(0.4));
    CHECK(l1[0].q25 == doctest::Approx(0.35));
    CHECK(l1[1].median == doctest::Approx(0.1));
    const auto ll = summarize_loglik(r, grid);
    CHECK(ll[0].finite == 2);
    CHECK(ll[0].median == doctest::Approx(-0.3));

    const Verdicts v = compute_verdicts(r, grid);
    // Failed cell ranks as +inf: |ll| at K = 10 is {0.2, 0.4, inf}.
    CHECK(v.loglik_abs_medians[0] == doctest::Approx(0.4));
    CHECK(v.loglik_abs_medians[1] == doctest::Approx(0.05));
    CHECK(v.loglik_median_strictly_decreasing);
    CHECK(v.l1_median_strictly_decreasing);
    CHECK(v.l1_improved_fraction == 1.0);
    CHECK(v.loglik_calibration_ratio == doctest::Approx(0.25));
    CHECK(v.loglik_calibration_ok);

    for (auto& c : r.cells)
        if (c.K == 100) c.perturbed_loglik_error = 0.004;
    const Verdicts loose = compute_verdicts(r, grid);
    CHECK(loose.loglik_calibration_ratio == doctest::Approx(12.5));
    CHECK_FALSE(loose.loglik_calibration_ok);

    const std::string json = verdicts_json(v, grid);
    CHECK(json.find("\"all_ok\": true") != std::string::npos);
    CHECK(plotdata_csv(ll).rfind("K,median,q25,q75,n_finite\n", 0) == 0);
    CHECK(report_csv(r).find(",nan,") != std::string::npos);
}
