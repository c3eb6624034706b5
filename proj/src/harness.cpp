#include "plg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "plg/convert.hpp"
#include "plg/errors.hpp"
#include "plg/lds.hpp"
#include "plg/serialization.hpp"

namespace plg {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (n < 1) throw std::invalid_argument("experiment: n must be >= 1");
    if (effective_trace_len() < 2 * static_cast<std::size_t>(n))
        throw std::invalid_argument("experiment: trace_len must be >= 2n");
    if (k_grid.empty()) throw std::invalid_argument("experiment: k_grid is empty");
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
        if (k_grid[i] < 2) throw std::invalid_argument("experiment: every K must be >= 2");
        if (i && k_grid[i] <= k_grid[i - 1])
            throw std::invalid_argument("experiment: k_grid must be strictly ascending");
    }
    if (seeds.empty()) throw std::invalid_argument("experiment: seeds is empty");
    if (threads == 0) throw std::invalid_argument("experiment: threads must be >= 1");
}

ExperimentConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
    try {
        ExperimentConfig cfg;
        cfg.n = doc.at("n").get<int>();
        if (doc.contains("trace_len") && !doc["trace_len"].is_null())
            cfg.trace_len = doc["trace_len"].get<std::size_t>();
        cfg.k_grid = doc.at("k_grid").get<std::vector<std::size_t>>();
        cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        if (doc.contains("r_mode")) cfg.r_mode = parse_r_mode(doc["r_mode"].get<std::string>());
        if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("generator")) {
            const auto gen = doc["generator"].get<std::string>();
            if (gen == "plg")
                cfg.generator = TraceGenerator::Plg;
            else if (gen == "lds")
                cfg.generator = TraceGenerator::Lds;
            else
                throw std::invalid_argument("config: generator must be plg or lds");
        }
        if (doc.contains("threads")) cfg.threads = doc["threads"].get<unsigned>();
        return cfg;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

namespace {

template <typename F>
void for_each_free_parameter(const PlgParams& p, F&& f) {
    for (int i = 0; i < p.n; ++i) f(p.mu0(i));
    for (int i = 0; i < p.n; ++i)
        for (int j = i; j < p.n; ++j) f(p.Sigma0(i, j));
    for (int i = 0; i < p.n; ++i) f(p.g(i));
    for (int i = 0; i < p.n; ++i) f(p.C(i));
    f(p.sigma2);
}

std::vector<double> flatten(const PlgParams& p) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(plg_param_count(p.n)));
    for_each_free_parameter(p, [&out](double v) { out.push_back(v); });
    return out;
}

}  // namespace

double param_l1_error(const PlgParams& learned, const PlgParams& truth) {
    learned.check_shapes();
    truth.check_shapes();
    if (learned.n != truth.n) throw DimensionMismatch("param_l1_error: dimensions differ");
    const auto a = flatten(learned);
    const auto b = flatten(truth);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(plg_param_count(truth.n));
}

PlgParams perturb_params(const PlgParams& truth, double delta, Rng& rng) {
    PlgParams p = truth;
    auto shift = [&]() { return rng.uniform(0.0, 1.0) < 0.5 ? -delta : delta; };
    for (int i = 0; i < p.n; ++i) p.mu0(i) += shift();
    for (int i = 0; i < p.n; ++i)
        for (int j = i; j < p.n; ++j) {
            p.Sigma0(i, j) += shift();
            p.Sigma0(j, i) = p.Sigma0(i, j);
        }
    for (int i = 0; i < p.n; ++i) p.g(i) += shift();
    for (int i = 0; i < p.n; ++i) p.C(i) += shift();
    p.sigma2 += shift();
    return p;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-trace log-likelihoods; first failure aborts with its message.
std::vector<double> per_trace_loglik(const PlgParams& params, const std::vector<Trace>& traces,
                                     std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = plg_loglik(params, traces[k]);
    return out;
}

double sum_prefix(const std::vector<double>& v, std::size_t count) {
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += v[k];
    return s;
}

std::vector<ReportCell> run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    std::vector<ReportCell> cells;
    for (std::size_t K : cfg.k_grid) {
        ReportCell c;
        c.seed = seed;
        c.K = K;
        cells.push_back(c);
    }
    auto fail_all = [&](const std::string& why) {
        for (auto& c : cells) {
            c.loglik_error = c.l1_param_error = c.perturbed_loglik_error = kNaN;
            c.reason = why;
        }
        return cells;
    };

    const std::size_t N = cfg.effective_trace_len();
    const std::size_t kmax = cfg.k_grid.back();

    PlgParams truth;
    std::vector<Trace> traces;
    try {
        const LdsParams lds = random_lds(GenConfig{cfg.n, derive_seed(seed, 0), cfg.r_mode});
        truth = lds_to_plg(lds);
        Rng trace_rng(derive_seed(seed, 1));
        traces.reserve(kmax);
        for (std::size_t k = 0; k < kmax; ++k)
            traces.push_back(cfg.generator == TraceGenerator::Plg
                                 ? plg_sample(truth, N, trace_rng)
                                 : lds_sample(lds, N, trace_rng));
    } catch (const NumericalError& e) {
        return fail_all(std::string("setup: ") + e.what());
    }

    std::vector<double> truth_ll;
    try {
        truth_ll = per_trace_loglik(truth, traces, kmax);
    } catch (const NumericalError& e) {
        return fail_all(std::string("true-model loglik: ") + e.what());
    }

    for (std::size_t ki = 0; ki < cfg.k_grid.size(); ++ki) {
        ReportCell& cell = cells[ki];
        const std::size_t K = cell.K;
        TraceSet ts{std::vector<Trace>(traces.begin(), traces.begin() + static_cast<long>(K)),
                    cfg.n};
        const CeResult learned = ce_learn(ts);
        cell.diagnostics = learned.diagnostics;
        cell.l1_param_error = param_l1_error(learned.params, truth);

        const double l_a = sum_prefix(truth_ll, K);
        try {
            const double l_t = sum_prefix(per_trace_loglik(learned.params, traces, K), K);
            cell.loglik_error = (l_t - l_a) / static_cast<double>(K);
        } catch (const NumericalError& e) {
            cell.loglik_error = kNaN;
            cell.reason = std::string("learned-model loglik: ") + e.what();
        }

        Rng perturb_rng(derive_seed(seed, 2 + ki));
        try {
            const PlgParams shifted = perturb_params(truth, cell.l1_param_error, perturb_rng);
            const double l_p = sum_prefix(per_trace_loglik(shifted, traces, K), K);
            cell.perturbed_loglik_error = std::abs((l_p - l_a) / static_cast<double>(K));
        } catch (const NumericalError& e) {
            cell.perturbed_loglik_error = kNaN;
            if (cell.reason.empty()) cell.reason = std::string("perturbed loglik: ") + e.what();
        }
    }
    return cells;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ReportCell>> per_seed(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++)
            per_seed[i] = run_seed(cfg, cfg.seeds[i]);
    };

    const unsigned workers =
        std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.seeds.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    ExperimentReport report;
    report.n = cfg.n;
    for (auto& cells : per_seed)
        for (auto& c : cells) report.cells.push_back(std::move(c));
    return report;
}

namespace {

// Linear-interpolation quantile of sorted data (+inf allowed).
double quantile_sorted(const std::vector<double>& s, double q) {
    if (s.empty()) return kNaN;
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || s[lo] == s[hi]) return s[lo];
    if (std::isinf(s[hi])) return std::numeric_limits<double>::infinity();
    return s[lo] + (s[hi] - s[lo]) * frac;
}

template <typename Metric>
std::vector<MetricSummary> summarize(const ExperimentReport& report,
                                     const std::vector<std::size_t>& k_grid, Metric metric) {
    std::vector<MetricSummary> out;
    for (std::size_t K : k_grid) {
        std::vector<double> vals;
        for (const auto& c : report.cells)
            if (c.K == K) {
                const double v = metric(c);
                if (std::isfinite(v)) vals.push_back(v);
            }
        std::sort(vals.begin(), vals.end());
        out.push_back(MetricSummary{K, quantile_sorted(vals, 0.5), quantile_sorted(vals, 0.25),
                                    quantile_sorted(vals, 0.75), vals.size()});
    }
    return out;
}

// Median with failed (NaN) cells ranked as +infinity.
template <typename Metric>
double median_failures_high(const ExperimentReport& report, std::size_t K, Metric metric) {
    std::vector<double> vals;
    for (const auto& c : report.cells)
        if (c.K == K) {
            const double v = metric(c);
            vals.push_back(std::isnan(v) ? std::numeric_limits<double>::infinity() : v);
        }
    std::sort(vals.begin(), vals.end());
    return quantile_sorted(vals, 0.5);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

}  // namespace

std::vector<MetricSummary> summarize_l1(const ExperimentReport& report,
                                        const std::vector<std::size_t>& k_grid) {
    return summarize(report, k_grid, [](const ReportCell& c) { return c.l1_param_error; });
}

std::vector<MetricSummary> summarize_loglik(const ExperimentReport& report,
                                            const std::vector<std::size_t>& k_grid) {
    return summarize(report, k_grid, [](const ReportCell& c) { return c.loglik_error; });
}

Verdicts compute_verdicts(const ExperimentReport& report, const std::vector<std::size_t>& k_grid) {
    Verdicts v;
    auto l1 = [](const ReportCell& c) { return c.l1_param_error; };
    auto ll_abs = [](const ReportCell& c) { return std::abs(c.loglik_error); };
    auto ll_ref = [](const ReportCell& c) { return c.perturbed_loglik_error; };
    for (std::size_t K : k_grid) {
        v.l1_medians.push_back(median_failures_high(report, K, l1));
        v.loglik_abs_medians.push_back(median_failures_high(report, K, ll_abs));
    }
    v.l1_median_strictly_decreasing = strictly_decreasing(v.l1_medians);
    v.loglik_median_strictly_decreasing = strictly_decreasing(v.loglik_abs_medians);

    if (k_grid.empty()) return v;
    const std::size_t kmin = k_grid.front();
    const std::size_t kmax = k_grid.back();

    std::size_t seeds = 0, improved = 0;
    for (const auto& hi : report.cells) {
        if (hi.K != kmax) continue;
        ++seeds;
        for (const auto& lo : report.cells)
            if (lo.seed == hi.seed && lo.K == kmin && hi.l1_param_error < lo.l1_param_error)
                ++improved;
    }
    v.l1_improved_fraction = seeds ? static_cast<double>(improved) / static_cast<double>(seeds) : 0;
    v.l1_improved_fraction_ok = v.l1_improved_fraction >= 0.9;

    const double ref = median_failures_high(report, kmax, ll_ref);
    v.loglik_calibration_ratio = v.loglik_abs_medians.back() / ref;
    v.loglik_calibration_ok =
        std::isfinite(v.loglik_calibration_ratio) && v.loglik_calibration_ratio <= 10.0;
    return v;
}

namespace {

std::string real_or_nan(double v) { return std::isfinite(v) ? format_real(v) : "nan"; }

std::string json_real(double v) { return std::isfinite(v) ? format_real(v) : "null"; }

}  // namespace

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream s;
    s << "seed,K,loglik_error,l1_param_error,perturbed_loglik_error,gamma_condition,umt_ok,"
         "psd_violation,reason\n";
    for (const auto& c : report.cells) {
        std::string reason = c.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        s << c.seed << ',' << c.K << ',' << real_or_nan(c.loglik_error) << ','
          << real_or_nan(c.l1_param_error) << ',' << real_or_nan(c.perturbed_loglik_error) << ','
          << (std::isfinite(c.diagnostics.gamma_condition)
                  ? format_real(c.diagnostics.gamma_condition)
                  : "inf")
          << ',' << (c.diagnostics.umt_ok ? 1 : 0) << ',' << (c.diagnostics.psd_violation ? 1 : 0)
          << ',' << reason << '\n';
    }
    return s.str();
}

std::string plotdata_csv(const std::vector<MetricSummary>& rows) {
    std::ostringstream s;
    s << "K,median,q25,q75,n_finite\n";
    for (const auto& r : rows)
        s << r.K << ',' << real_or_nan(r.median) << ',' << real_or_nan(r.q25) << ','
          << real_or_nan(r.q75) << ',' << r.finite << '\n';
    return s.str();
}

std::string verdicts_json(const Verdicts& v, const std::vector<std::size_t>& k_grid) {
    auto list = [](const std::vector<double>& xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + json_real(xs[i]);
        return s + "]";
    };
    std::string kg = "[";
    for (std::size_t i = 0; i < k_grid.size(); ++i)
        kg += (i ? ", " : "") + std::to_string(k_grid[i]);
    kg += "]";
    auto b = [](bool x) { return x ? "true" : "false"; };

    std::ostringstream s;
    s << "{\n"
      << "  \"k_grid\": " << kg << ",\n"
      << "  \"l1_medians\": " << list(v.l1_medians) << ",\n"
      << "  \"loglik_abs_medians\": " << list(v.loglik_abs_medians) << ",\n"
      << "  \"l1_median_strictly_decreasing\": " << b(v.l1_median_strictly_decreasing) << ",\n"
      << "  \"l1_improved_fraction\": " << json_real(v.l1_improved_fraction) << ",\n"
      << "  \"l1_improved_fraction_ok\": " << b(v.l1_improved_fraction_ok) << ",\n"
      << "  \"loglik_median_strictly_decreasing\": " << b(v.loglik_median_strictly_decreasing)
      << ",\n"
      << "  \"loglik_calibration_ratio\": " << json_real(v.loglik_calibration_ratio) << ",\n"
      << "  \"loglik_calibration_ok\": " << b(v.loglik_calibration_ok) << ",\n"
      << "  \"all_ok\": "
      << b(v.l1_median_strictly_decreasing && v.l1_improved_fraction_ok &&
           v.loglik_median_strictly_decreasing && v.loglik_calibration_ok)
      << "\n}\n";
    return s.str();
}

void write_experiment_outputs(const ExperimentReport& report, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    write_file(cfg.output_dir / "report.csv", report_csv(report));
    write_file(cfg.output_dir / "verdicts.json",
               verdicts_json(compute_verdicts(report, cfg.k_grid), cfg.k_grid));
    write_file(cfg.output_dir / "plotdata_loglik.csv",
               plotdata_csv(summarize_loglik(report, cfg.k_grid)));
    write_file(cfg.output_dir / "plotdata_l1.csv", plotdata_csv(summarize_l1(report, cfg.k_grid)));
}

}  // namespace plg
