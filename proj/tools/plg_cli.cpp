// Command-line front end: system generation, simulation, conversion, CE
// learning, likelihood evaluation and the consistency experiment sweep.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "plg/ce_learn.hpp"
#include "plg/convert.hpp"
#include "plg/errors.hpp"
#include "plg/harness.hpp"
#include "plg/lds.hpp"
#include "plg/plg_model.hpp"
#include "plg/serialization.hpp"
#include "plg/sysgen.hpp"

namespace {

using namespace plg;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

std::vector<double> per_trace_loglik(const Model& model, const std::vector<Trace>& traces) {
    std::vector<double> out;
    out.reserve(traces.size());
    for (const auto& tr : traces) {
        out.push_back(std::visit(
            [&tr](const auto& params) -> double {
                using T = std::decay_t<decltype(params)>;
                if constexpr (std::is_same_v<T, PlgParams>)
                    return plg_loglik(params, tr);
                else
                    return lds_loglik(params, tr);
            },
            model));
    }
    return out;
}

std::string loglik_json(const Model& model, const std::vector<double>& per_trace) {
    double total = 0.0;
    for (double v : per_trace) total += v;
    std::string s = "{\n  \"model\": \"";
    s += std::holds_alternative<PlgParams>(model) ? "plg" : "lds";
    s += "\",\n  \"total_loglik\": " + format_real(total) + ",\n  \"per_trace_loglik\": [";
    for (std::size_t i = 0; i < per_trace.size(); ++i)
        s += (i ? ", " : "") + format_real(per_trace[i]);
    s += "]\n}\n";
    return s;
}

std::vector<Trace> load_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return read_traces_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Predictive linear-Gaussian models: filtering, LDS conversion, CE learning"};
    app.require_subcommand(1);

    // gen-system
    auto* gen = app.add_subcommand("gen-system", "Generate a random stable LDS (JSON)");
    int gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_r_mode = "variance";
    std::string gen_out;
    gen->add_option("--n", gen_n, "State dimension")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Generator seed")->required();
    gen->add_option("--r-mode", gen_r_mode, "Observation noise draw: literal|variance")
        ->check(CLI::IsMember({"literal", "variance"}));
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Sample K traces of length N from a model");
    std::string sim_model, sim_out;
    std::size_t sim_len = 0, sim_k = 0;
    std::uint64_t sim_seed = 0;
    sim->add_option("--model", sim_model, "PLG or LDS JSON")->required();
    sim->add_option("-N,--length", sim_len, "Observations per trace")
        ->required()
        ->check(CLI::PositiveNumber);
    sim->add_option("-K,--traces", sim_k, "Number of traces")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "Sampling seed")->required();
    sim->add_option("--out", sim_out, "Trace CSV output file")->required();

    // convert
    auto* conv = app.add_subcommand("convert", "Convert an LDS JSON to its equivalent PLG JSON");
    std::string conv_in, conv_out;
    conv->add_option("--lds", conv_in, "LDS JSON")->required();
    conv->add_option("--out", conv_out, "Output file (default stdout)");

    // learn-ce
    auto* learn = app.add_subcommand("learn-ce", "Estimate PLG parameters from a trace CSV");
    std::string learn_traces, learn_out, learn_diag;
    int learn_n = 0;
    bool learn_clip = false;
    learn->add_option("--traces", learn_traces, "Trace CSV")->required();
    learn->add_option("--n", learn_n, "Model dimension")->required()->check(CLI::PositiveNumber);
    learn->add_option("--out", learn_out, "PLG JSON output (default stdout)");
    learn->add_option("--diagnostics", learn_diag, "Diagnostics JSON output (default stderr)");
    learn->add_flag("--clip-sigma0", learn_clip, "Floor negative eigenvalues of Sigma0 at zero");

    // eval-loglik
    auto* eval = app.add_subcommand("eval-loglik", "Per-trace and total log-likelihood");
    std::string eval_model, eval_traces, eval_out;
    eval->add_option("--model", eval_model, "PLG or LDS JSON")->required();
    eval->add_option("--traces", eval_traces, "Trace CSV")->required();
    eval->add_option("--out", eval_out, "Output file (default stdout)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run the CE consistency sweep from a config");
    std::string exp_config, exp_dir;
    unsigned exp_threads = 0;
    exp->add_option("--config", exp_config, "Experiment config JSON")->required();
    exp->add_option("--output-dir", exp_dir,
                    "Output directory (overrides config; default $PLG_OUTPUT_DIR)");
    exp->add_option("--threads", exp_threads, "Worker threads (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gen) {
            const LdsParams lds = random_lds(GenConfig{gen_n, gen_seed, parse_r_mode(gen_r_mode)});
            emit(lds_to_json(lds), gen_out);
        } else if (*sim) {
            const Model model = model_from_json(read_file(sim_model));
            Rng rng(sim_seed);
            std::vector<Trace> traces;
            traces.reserve(sim_k);
            for (std::size_t k = 0; k < sim_k; ++k) {
                traces.push_back(std::visit(
                    [&](const auto& params) -> Trace {
                        using T = std::decay_t<decltype(params)>;
                        if constexpr (std::is_same_v<T, PlgParams>)
                            return plg_sample(params, sim_len, rng);
                        else
                            return lds_sample(params, sim_len, rng);
                    },
                    model));
            }
            std::ostringstream csv;
            write_traces_csv(csv, traces);
            write_file(sim_out, csv.str());
            try {
                std::cout << loglik_json(model, per_trace_loglik(model, traces));
            } catch (const NumericalError& e) {
                // Noiseless models have no density; the traces are still valid output.
                std::cerr << "note: log-likelihood unavailable: " << e.what() << '\n';
            }
        } else if (*conv) {
            emit(plg_to_json(lds_to_plg(lds_from_json(read_file(conv_in)))), conv_out);
        } else if (*learn) {
            TraceSet ts{load_traces(learn_traces), learn_n};
            CeOptions opts;
            opts.clip_sigma0 = learn_clip;
            const CeResult res = ce_learn(ts, opts);
            emit(plg_to_json(res.params), learn_out);
            if (learn_diag.empty())
                std::cerr << diagnostics_to_json(res.diagnostics);
            else
                write_file(learn_diag, diagnostics_to_json(res.diagnostics));
        } else if (*eval) {
            const Model model = model_from_json(read_file(eval_model));
            const auto traces = load_traces(eval_traces);
            emit(loglik_json(model, per_trace_loglik(model, traces)), eval_out);
        } else if (*exp) {
            ExperimentConfig cfg = config_from_json(read_file(exp_config));
            if (!exp_dir.empty()) {
                cfg.output_dir = exp_dir;
            } else if (cfg.output_dir.empty()) {
                const char* env = std::getenv("PLG_OUTPUT_DIR");
                cfg.output_dir = env && *env ? env : "plg_experiment_out";
            }
            if (exp_threads) cfg.threads = exp_threads;
            const ExperimentReport report = run_experiment(cfg);
            write_experiment_outputs(report, cfg);
            std::cout << read_file(cfg.output_dir / "verdicts.json");
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return 0;
}
