#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plg/ce_learn.hpp"
#include "plg/plg_model.hpp"
#include "plg/random.hpp"
#include "plg/sysgen.hpp"

namespace plg {

enum class TraceGenerator { Plg, Lds };

struct ExperimentConfig {
    int n = 2;
    /// Observations per trace; 0 means the default 10n.
    std::size_t trace_len = 0;
    std::vector<std::size_t> k_grid;
    std::vector<std::uint64_t> seeds;
    RMode r_mode = RMode::Variance;
    std::filesystem::path output_dir;
    TraceGenerator generator = TraceGenerator::Plg;
    /// Worker threads over seeds. Output bytes do not depend on this.
    unsigned threads = 1;

    std::size_t effective_trace_len() const {
        return trace_len ? trace_len : static_cast<std::size_t>(10 * n);
    }
    /// Throws std::invalid_argument on an unusable configuration.
    void validate() const;
};

/// Parses {"n", "trace_len", "k_grid", "seeds", "r_mode", "output_dir"} plus the
/// optional "generator" ("plg" | "lds") and "threads".
ExperimentConfig config_from_json(const std::string& text);

struct ReportCell {
    std::uint64_t seed = 0;
    std::size_t K = 0;
    /// (l_t - l_a) / K; NaN when evaluation failed.
    double loglik_error = 0.0;
    double l1_param_error = 0.0;
    /// |(l_p - l_a) / K| for the true parameters shifted by +-l1_param_error per entry.
    double perturbed_loglik_error = 0.0;
    CeDiagnostics diagnostics;
    std::string reason;
};

struct MetricSummary {
    std::size_t K = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t finite = 0;
};

struct Verdicts {
    std::vector<double> l1_medians;
    std::vector<double> loglik_abs_medians;
    bool l1_median_strictly_decreasing = false;
    /// Share of seeds whose L1 error at the largest K beats the smallest K.
    double l1_improved_fraction = 0.0;
    bool l1_improved_fraction_ok = false;
    bool loglik_median_strictly_decreasing = false;
    /// median |loglik_error| / median perturbed_loglik_error at the largest K.
    double loglik_calibration_ratio = 0.0;
    /// ratio <= 10
    bool loglik_calibration_ok = false;
};

struct ExperimentReport {
    int n = 0;
    std::vector<ReportCell> cells;  ///< ordered by (seed position, K position)
};

/// Sum |difference| over mu0, upper triangle of Sigma0, g, C, sigma2, divided by
/// the PLG parameter count. Throws DimensionMismatch when n differs.
double param_l1_error(const PlgParams& learned, const PlgParams& truth);

/// Shifts every free parameter by +-delta with seeded random signs
/// (Sigma0 kept symmetric).
PlgParams perturb_params(const PlgParams& truth, double delta, Rng& rng);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::vector<MetricSummary> summarize_l1(const ExperimentReport& report,
                                        const std::vector<std::size_t>& k_grid);
std::vector<MetricSummary> summarize_loglik(const ExperimentReport& report,
                                            const std::vector<std::size_t>& k_grid);
Verdicts compute_verdicts(const ExperimentReport& report, const std::vector<std::size_t>& k_grid);

std::string report_csv(const ExperimentReport& report);
std::string plotdata_csv(const std::vector<MetricSummary>& rows);
std::string verdicts_json(const Verdicts& v, const std::vector<std::size_t>& k_grid);

/// Writes report.csv, verdicts.json, plotdata_loglik.csv and plotdata_l1.csv.
void write_experiment_outputs(const ExperimentReport& report, const ExperimentConfig& cfg);

}  // namespace plg
