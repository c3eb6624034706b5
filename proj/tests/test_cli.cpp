#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "plg/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::current_path() / "cli_work";

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = std::string(PLG_CLI_PATH) + " " + args + " > " + stdout_file +
                            " 2> " + (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (kWork / name).string(); }

json load(const std::string& name) { return json::parse(plg::read_file(kWork / name)); }

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * (1 + std::abs(b)); }

struct Workdir {
    Workdir() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

}  // namespace

TEST_CASE_FIXTURE(Workdir, "simulate then eval-loglik reproduces the sampling likelihood") {
    REQUIRE(run("gen-system --n 2 --seed 5 --out " + path("lds.json")) == 0);
    REQUIRE(run("convert --lds " + path("lds.json") + " --out " + path("plg.json")) == 0);
    REQUIRE(run("simulate --model " + path("plg.json") + " -N 20 -K 50 --seed 1 --out " +
                    path("traces.csv"),
                path("sim.json")) == 0);
    REQUIRE(run("eval-loglik --model " + path("plg.json") + " --traces " + path("traces.csv") +
                    " --out " + path("eval_plg.json")) == 0);
    REQUIRE(run("eval-loglik --model " + path("lds.json") + " --traces " + path("traces.csv") +
                    " --out " + path("eval_lds.json")) == 0);

    const double sim = load("sim.json")["total_loglik"].get<double>();
    const double ev_plg = load("eval_plg.json")["total_loglik"].get<double>();
    const double ev_lds = load("eval_lds.json")["total_loglik"].get<double>();
    CHECK(close_rel(ev_plg, sim, 1e-9));
    CHECK(close_rel(ev_lds, ev_plg, 1e-6));
    CHECK(load("eval_plg.json")["per_trace_loglik"].size() == 50);
}

TEST_CASE_FIXTURE(Workdir, "learn-ce writes a model and diagnostics") {
    REQUIRE(run("gen-system --n 2 --seed 9 --r-mode literal --out " + path("lds.json")) == 0);
    REQUIRE(run("simulate --model " + path("lds.json") + " -N 20 -K 500 --seed 2 --out " +
                path("traces.csv")) == 0);
    REQUIRE(run("learn-ce --traces " + path("traces.csv") + " --n 2 --out " + path("learned.json") +
                " --diagnostics " + path("diag.json")) == 0);
    const plg::PlgParams p = plg::plg_from_json(plg::read_file(kWork / "learned.json"));
    CHECK(p.n == 2);
    CHECK(load("diag.json").contains("umt_ok"));
}

TEST_CASE_FIXTURE(Workdir, "exit codes") {
    CHECK(run("") == 1);
    CHECK(run("gen-system --n 0 --seed 1") == 1);
    CHECK(run("eval-loglik --model " + path("missing.json") + " --traces " + path("x.csv")) == 1);

    plg::write_file(kWork / "bad.json", R"({"n": 2, "k_grid": [], "seeds": [1]})");
    CHECK(run("experiment --config " + path("bad.json") + " --output-dir " + path("out")) == 1);

    // A PLG with zero variance everywhere cannot score any trace.
    plg::write_file(kWork / "flat.json",
                    R"({"n": 1, "mu0": [0], "Sigma0": [0], "g": [0.5], "C": [0], "sigma2": 0})");
    plg::write_file(kWork / "one.csv", "trace,t,y\n0,1,1\n0,2,0.5\n");
    CHECK(run("eval-loglik --model " + path("flat.json") + " --traces " + path("one.csv")) == 2);
}

TEST_CASE_FIXTURE(Workdir, "experiment writes every output file") {
    plg::write_file(kWork / "cfg.json",
                    R"({"n": 1, "trace_len": 10, "k_grid": [10, 100], "seeds": [1, 2, 3]})");
    REQUIRE(run("experiment --config " + path("cfg.json") + " --output-dir " + path("out"),
                path("verdicts_stdout.json")) == 0);
    for (const char* f : {"report.csv", "verdicts.json", "plotdata_loglik.csv", "plotdata_l1.csv"})
        CHECK(fs::exists(kWork / "out" / f));
    CHECK(plg::read_file(kWork / "verdicts_stdout.json") ==
          plg::read_file(kWork / "out" / "verdicts.json"));
}
