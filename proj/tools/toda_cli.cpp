// Command-line front end: verify / simulate / sweep over the Toda multi-time
// library. Exit codes: 0 success, 1 failed checks or a runtime divergence,
// 2 configuration errors.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "toda/errors.hpp"
#include "toda/harness.hpp"

namespace {

using namespace toda::harness;

struct CommonFlags {
    std::string config_file;
    std::uint64_t seed = 0;
    std::string out;
    std::string boundary;
    int n = 0;
    std::vector<double> lambdas;
    std::vector<double> mus;
    double step = 0;
    double tol = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_file, "JSON config file");
    cmd->add_option("--seed", f.seed, "random state seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--boundary", f.boundary, "open|periodic")
        ->check(CLI::IsMember({"open", "periodic"}));
    cmd->add_option("--n", f.n, "particle count")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", f.lambdas, "Backlund parameters (comma separated)")
        ->delimiter(',');
    cmd->add_option("--mu", f.mus, "second parameter family (comma separated)")
        ->delimiter(',');
    cmd->add_option("--step", f.step, "integrator step")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", f.tol, "Newton tolerance")->check(CLI::PositiveNumber);
}

RunConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
    RunConfig cfg;
    if (cmd->count("--config")) {
        std::ifstream is(f.config_file);
        if (!is) throw std::invalid_argument("cannot read config file " + f.config_file);
        std::stringstream buf;
        buf << is.rdbuf();
        cfg = config_from_json(buf.str());
    }
    if (cmd->count("--seed")) cfg.seed = f.seed;
    if (cmd->count("--out")) cfg.out = f.out;
    if (cmd->count("--boundary"))
        cfg.toda.boundary =
            f.boundary == "open" ? toda::Boundary::OpenEnd : toda::Boundary::Periodic;
    if (cmd->count("--n")) cfg.toda.n = f.n;
    if (cmd->count("--lambda")) cfg.lambdas = f.lambdas;
    if (cmd->count("--mu")) cfg.mus = f.mus;
    if (cmd->count("--step")) cfg.step = f.step;
    if (cmd->count("--tol")) cfg.toda.tol_newton = f.tol;
    return cfg;
}

int do_verify(RunConfig cfg) {
    cfg.experiment = Experiment::Verify;
    cfg.validate();
    const VerificationReport report = run_verify(cfg);
    for (const auto& c : report.checks) {
        std::printf("[%s] %-26s value=%-13.6g tol=%-8.2g %s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.tolerance,
                    c.note.empty() ? "" : c.note.c_str());
    }
    const auto file = write_report(report);
    std::printf("report: %s\n", file.string().c_str());
    std::printf("status: %s\n", report.all_pass() ? "pass" : "fail");
    return report.all_pass() ? 0 : 1;
}

int do_simulate(RunConfig cfg, const CLI::App* cmd, const std::string& mode, int samples,
                int iterations) {
    if (cmd->count("--mode")) cfg.experiment = experiment_from_string(mode);
    if (cfg.experiment != Experiment::Continuous && cfg.experiment != Experiment::Backlund)
        cfg.experiment = Experiment::Continuous;
    if (cmd->count("--samples")) cfg.samples = samples;
    if (cmd->count("--iterations")) cfg.iterations = iterations;
    cfg.validate();
    const auto file = run_simulate(cfg);
    std::printf("wrote %s\n", file.string().c_str());
    return 0;
}

int do_sweep(RunConfig cfg, const CLI::App* cmd, const std::vector<int>& n_values) {
    cfg.experiment = Experiment::Sweep;
    if (cmd->count("--n-values")) cfg.n_values = n_values;
    cfg.validate();
    const auto file = run_sweep(cfg);
    std::printf("wrote %s\n", file.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-time variational structure of the Toda lattice"};
    app.require_subcommand(1);

    CommonFlags vf, sf, wf;
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    add_common(verify, vf);

    CLI::App* simulate = app.add_subcommand("simulate", "write trajectory files");
    add_common(simulate, sf);
    std::string mode = "continuous";
    int samples = 0, iterations = 0;
    simulate->add_option("--mode", mode, "continuous|backlund")
        ->check(CLI::IsMember({"continuous", "backlund"}));
    simulate->add_option("--samples", samples, "samples along the path")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--iterations", iterations, "map iterations")
        ->check(CLI::PositiveNumber);

    CLI::App* sweep = app.add_subcommand("sweep", "scan the (lambda, mu) grid");
    add_common(sweep, wf);
    std::vector<int> n_values;
    sweep->add_option("--n-values", n_values, "particle counts (comma separated)")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) return do_verify(build_config(verify, vf));
        if (simulate->parsed())
            return do_simulate(build_config(simulate, sf), simulate, mode, samples, iterations);
        if (sweep->parsed()) return do_sweep(build_config(sweep, wf), sweep, n_values);
    } catch (const toda::harness::RuntimeFailure& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 1;
    } catch (const toda::BacklundError& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 1;
    } catch (const toda::FlowDivergedError& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    }
    return 2;
}
