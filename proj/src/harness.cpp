#include "toda/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "toda/backlund.hpp"
#include "toda/continuous.hpp"
#include "toda/zero_curvature.hpp"

namespace toda::harness {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kSpread = 1.5;     // open-end background slope per site
constexpr double kAmplitude = 0.5;  // uniform jitter on both x and p

double uniform_pm(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2 - 1) * kAmplitude;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Verify: return "verify";
        case Experiment::Continuous: return "continuous";
        case Experiment::Backlund: return "backlund";
        case Experiment::Sweep: return "sweep";
    }
    return "verify";
}

Experiment experiment_from_string(const std::string& s) {
    if (s == "verify") return Experiment::Verify;
    if (s == "continuous") return Experiment::Continuous;
    if (s == "backlund") return Experiment::Backlund;
    if (s == "sweep") return Experiment::Sweep;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void RunConfig::validate() const {
    toda.validate();
    if (lambdas.empty()) throw std::invalid_argument("lambda list must be nonempty");
    if (mus.empty()) throw std::invalid_argument("mu list must be nonempty");
    for (double l : lambdas) BtParam{l};  // rejects zero / non-finite
    for (double m : mus) BtParam{m};
    if (!(step > 0)) throw std::invalid_argument("step must be > 0");
    if (!(h_fd > 0)) throw std::invalid_argument("h_fd must be > 0");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (path.size() < 2) throw std::invalid_argument("path needs at least 2 vertices");
    for (const auto& v : path)
        if (v.size() != 2) throw std::invalid_argument("path vertices must be 2-dimensional");
    for (int n : n_values)
        if (n < 1) throw std::invalid_argument("n_values entries must be >= 1");
    if (state) {
        if (static_cast<int>(state->x.size()) != toda.n ||
            static_cast<int>(state->p.size()) != toda.n)
            throw std::invalid_argument("explicit state length does not match n");
        validate_state(*state, toda);
    }
    for (const auto& [name, tol] : tolerance_overrides)
        if (!(tol > 0))
            throw std::invalid_argument("tolerance override for '" + name + "' must be > 0");
}

RunConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

    // state_spread / state_amplitude are informational echoes of the sampler
    // constants; they are accepted so a report's config block round-trips.
    static const std::set<std::string> known{
        "experiment", "n",      "boundary",   "tol_newton", "max_newton_iters",
        "seed",       "state",  "lambda",     "mu",         "step",
        "h_fd",       "path",   "samples",    "iterations", "n_values",
        "out",        "tolerances", "state_spread", "state_amplitude"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");

    RunConfig cfg;
    if (j.contains("experiment")) cfg.experiment = experiment_from_string(j["experiment"]);
    if (j.contains("n")) cfg.toda.n = j["n"];
    if (j.contains("boundary")) {
        const std::string b = j["boundary"];
        if (b == "open")
            cfg.toda.boundary = Boundary::OpenEnd;
        else if (b == "periodic")
            cfg.toda.boundary = Boundary::Periodic;
        else
            throw std::invalid_argument("boundary must be 'open' or 'periodic'");
    }
    if (j.contains("tol_newton")) cfg.toda.tol_newton = j["tol_newton"];
    if (j.contains("max_newton_iters")) cfg.toda.max_newton_iters = j["max_newton_iters"];
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("state")) {
        LatticeState s;
        s.x = j["state"].at("x").get<std::vector<double>>();
        s.p = j["state"].at("p").get<std::vector<double>>();
        cfg.state = std::move(s);
    }
    if (j.contains("lambda")) cfg.lambdas = j["lambda"].get<std::vector<double>>();
    if (j.contains("mu")) cfg.mus = j["mu"].get<std::vector<double>>();
    if (j.contains("step")) cfg.step = j["step"];
    if (j.contains("h_fd")) cfg.h_fd = j["h_fd"];
    if (j.contains("path")) cfg.path = j["path"].get<std::vector<std::vector<double>>>();
    if (j.contains("samples")) cfg.samples = j["samples"];
    if (j.contains("iterations")) cfg.iterations = j["iterations"];
    if (j.contains("n_values")) cfg.n_values = j["n_values"].get<std::vector<int>>();
    if (j.contains("out")) cfg.out = std::filesystem::path(j["out"].get<std::string>());
    if (j.contains("tolerances"))
        cfg.tolerance_overrides = j["tolerances"].get<std::map<std::string, double>>();

    cfg.validate();
    return cfg;
}

namespace {

json config_json(const RunConfig& cfg) {
    json j;
    j["experiment"] = to_string(cfg.experiment);
    j["n"] = cfg.toda.n;
    j["boundary"] = toda::to_string(cfg.toda.boundary);
    j["tol_newton"] = cfg.toda.tol_newton;
    j["max_newton_iters"] = cfg.toda.max_newton_iters;
    j["seed"] = cfg.seed;
    j["lambda"] = cfg.lambdas;
    j["mu"] = cfg.mus;
    j["step"] = cfg.step;
    j["h_fd"] = cfg.h_fd;
    j["path"] = cfg.path;
    j["samples"] = cfg.samples;
    j["iterations"] = cfg.iterations;
    j["n_values"] = cfg.n_values;
    j["out"] = cfg.out.string();
    j["tolerances"] = cfg.tolerance_overrides;
    j["state_spread"] = kSpread;
    j["state_amplitude"] = kAmplitude;
    if (cfg.state) j["state"] = {{"x", cfg.state->x}, {"p", cfg.state->p}};
    return j;
}

}  // namespace

std::string config_to_json(const RunConfig& cfg, int indent) {
    return config_json(cfg).dump(indent);
}

LatticeState sample_state(std::uint64_t seed, const TodaConfig& cfg) {
    std::mt19937_64 rng(seed);
    LatticeState s{std::vector<double>(cfg.n), std::vector<double>(cfg.n)};
    const double slope = cfg.boundary == Boundary::OpenEnd ? kSpread : 0.0;
    for (int k = 0; k < cfg.n; ++k) s.x[k] = -slope * k + uniform_pm(rng);
    for (int k = 0; k < cfg.n; ++k) s.p[k] = uniform_pm(rng);
    return s;
}

bool VerificationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

namespace {

LatticeState initial_state(const RunConfig& cfg, std::uint64_t offset = 0) {
    if (cfg.state && offset == 0) return *cfg.state;
    return sample_state(cfg.seed + offset, cfg.toda);
}

std::vector<double> trace_mu_grid(const RunConfig& cfg, double lambda) {
    std::vector<double> grid;
    auto want = [&](double m) {
        if (std::abs(m) < 1e-9 || std::abs(m - lambda) < 1e-9) return false;
        for (double g : grid)
            if (g == m) return false;
        return true;
    };
    for (double m : cfg.mus)
        if (want(m)) grid.push_back(m);
    for (double m : {0.5, 0.9, 1.3, 1.7, 2.1}) {
        if (grid.size() >= 5) break;
        if (want(m)) grid.push_back(m);
    }
    return grid;
}

using Evaluator = std::function<double()>;

void run_check(std::vector<CheckResult>& out, const RunConfig& cfg, const std::string& name,
               const std::string& anchor, double default_tol, const Evaluator& eval) {
    CheckResult c;
    c.name = name;
    c.anchor = anchor;
    const auto it = cfg.tolerance_overrides.find(name);
    c.tolerance = it == cfg.tolerance_overrides.end() ? default_tol : it->second;
    try {
        c.value = eval();
        c.pass = std::isfinite(c.value) && c.value <= c.tolerance;
    } catch (const std::exception& e) {
        c.value = std::numeric_limits<double>::quiet_NaN();
        c.pass = false;
        c.note = e.what();
    }
    out.push_back(std::move(c));
}

constexpr int kVerifyStates = 20;

}  // namespace

VerificationReport run_verify(const RunConfig& cfg) {
    cfg.validate();
    VerificationReport report;
    report.version = kVersion;
    report.config = cfg;

    const TodaConfig& tc = cfg.toda;
    const bool open = tc.boundary == Boundary::OpenEnd;
    const BtParam lam(cfg.lambdas.front());
    const BtParam mu(cfg.mus.front());
    const HamiltonianSystem sys = toda_system(tc);
    const OneForm form = toda_one_form(tc);
    const double bt_tol = open ? 1e-10 : 10 * tc.tol_newton;
    auto& checks = report.checks;

    run_check(checks, cfg, "poisson-involutivity",
              "the Poisson bracket of H1 and H2 vanishes identically", 1e-12, [&] {
                  double worst = 0;
                  for (int i = 0; i < 100; ++i) {
                      const LatticeState s = initial_state(cfg, i);
                      worst = std::max(worst, std::abs(poisson_bracket(sys, 1, 2, s)));
                  }
                  return worst;
              });

    run_check(checks, cfg, "flow-commutativity",
              "the Hamiltonian flows of H1 and H2 commute", 1e-9, [&] {
                  double worst = 0;
                  for (int i = 0; i < 3; ++i)
                      worst = std::max(
                          worst, flow_commutator_defect(sys, 1, 2, initial_state(cfg, i), 0.5,
                                                        0.5, cfg.step));
                  return worst;
              });

    run_check(checks, cfg, "action-path-independence",
              "the action integral depends only on the endpoints of the curve", 1e-6, [&] {
                  const LatticeState s0 = initial_state(cfg);
                  const PolylinePath a{{{0, 0}, {0.8, 0}, {0.8, 0.6}}, 8};
                  const PolylinePath b{{{0, 0}, {0, 0.6}, {0.8, 0.6}}, 8};
                  return std::abs(action_along_path(form, sys, s0, a, cfg.step) -
                                  action_along_path(form, sys, s0, b, cfg.step));
              });

    run_check(checks, cfg, "bt-commutativity", "the maps F_lambda and F_mu commute", bt_tol,
              [&] {
                  double worst = 0;
                  for (int i = 0; i < kVerifyStates; ++i)
                      worst = std::max(worst,
                                       commutation_defect(initial_state(cfg, i), lam, mu, tc));
                  return worst;
              });

    run_check(checks, cfg, "closure-ell",
              "the discrete 1-form is closed on solutions: ell(lambda, mu) = 0", bt_tol, [&] {
                  double worst = 0;
                  for (int i = 0; i < kVerifyStates; ++i)
                      worst = std::max(worst, std::abs(closure_constant(initial_state(cfg, i),
                                                                        lam, mu, tc)
                                                           .ell));
                  return worst;
              });

    run_check(checks, cfg, "closure-direct-vs-reduced",
              "direct and telescoped evaluations of ell agree", 1e-10, [&] {
                  double worst = 0;
                  for (int i = 0; i < kVerifyStates; ++i) {
                      const ClosureConstant c =
                          closure_constant(initial_state(cfg, i), lam, mu, tc);
                      worst = std::max(worst, std::abs(c.ell - c.ell_reduced));
                  }
                  return worst;
              });

    run_check(checks, cfg, "spectrality-conservation",
              "dLambda/dlambda is a common integral of motion of the family",
              open ? 1e-9 : 1e-8, [&] {
                  LatticeState s = initial_state(cfg);
                  auto integral = [&](const LatticeState& at) {
                      const BtStepResult r = bt_forward(at, lam, tc);
                      return spectrality_integral(at.x, r.next.x, at.p, lam, tc).direct;
                  };
                  const double first = integral(s);
                  double drift = 0;
                  for (int i = 0; i < cfg.iterations; ++i) {
                      s = bt_forward(s, mu, tc).next;
                      drift = std::max(drift, std::abs(integral(s) - first));
                  }
                  return drift;
              });

    run_check(checks, cfg, "symplecticity",
              "the map F_lambda preserves the canonical symplectic form", 1e-6,
              [&] { return symplecticity_defect(initial_state(cfg), lam, tc, cfg.h_fd); });

    run_check(checks, cfg, "zero-curvature",
              "the transfer and evolution matrices satisfy L~ V = V' L", 1e-10, [&] {
                  const LatticeState s = initial_state(cfg);
                  double worst = 0;
                  for (double m : trace_mu_grid(cfg, lam.lambda))
                      worst = std::max(worst, zero_curvature_defect(s, lam, m, tc));
                  return worst;
              });

    // The trace of the monodromy generates integrals under periodic boundaries
    // only, and the product identity is an open-end statement; each check runs
    // on the matching boundary regardless of the configured one.
    run_check(checks, cfg, "monodromy-trace",
              "tr T(mu) is invariant under the map F_lambda", 1e-8, [&] {
                  TodaConfig per = tc;
                  per.boundary = Boundary::Periodic;
                  LatticeState s = sample_state(cfg.seed, per);
                  const std::vector<double> grid = trace_mu_grid(cfg, lam.lambda);
                  std::vector<double> first;
                  for (double m : grid) first.push_back(monodromy(s, m).trace());
                  double drift = 0;
                  for (int i = 0; i < 50; ++i) {
                      s = bt_forward(s, lam, per).next;
                      for (size_t g = 0; g < grid.size(); ++g)
                          drift = std::max(
                              drift, std::abs(monodromy(s, grid[g]).trace() - first[g]));
                  }
                  return drift;
              });

    run_check(checks, cfg, "product-identity",
              "the layer shift product equals lambda^N T(lambda)_11", 1e-10, [&] {
                  TodaConfig op = tc;
                  op.boundary = Boundary::OpenEnd;
                  return product_identity_defect(sample_state(cfg.seed, op), lam, op);
              });

    return report;
}

std::string report_to_json(const VerificationReport& report, int indent) {
    json j;
    j["version"] = report.version;
    j["config"] = config_json(report.config);
    json checks = json::array();
    for (const auto& c : report.checks) {
        json jc;
        jc["name"] = c.name;
        jc["anchor"] = c.anchor;
        jc["value"] = c.value;  // NaN serializes as null
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        jc["note"] = c.note;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    j["status"] = report.all_pass() ? "pass" : "fail";
    return j.dump(indent);
}

std::filesystem::path write_report(const VerificationReport& report) {
    std::filesystem::create_directories(report.config.out);
    const std::filesystem::path file = report.config.out / "report.json";
    std::ofstream os(file);
    if (!os) throw std::invalid_argument("cannot write " + file.string());
    os << report_to_json(report) << '\n';
    return file;
}

namespace {

void write_row(std::ofstream& os, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

std::filesystem::path simulate_continuous(const RunConfig& cfg) {
    const TodaConfig& tc = cfg.toda;
    const HamiltonianSystem sys = toda_system(tc);
    const LatticeState s0 = initial_state(cfg);

    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path file = cfg.out / "trajectory.csv";
    std::ofstream os(file);
    if (!os) throw std::invalid_argument("cannot write " + file.string());

    std::vector<std::string> header{"t1", "t2"};
    for (int k = 1; k <= tc.n; ++k) header.push_back("x" + std::to_string(k));
    for (int k = 1; k <= tc.n; ++k) header.push_back("p" + std::to_string(k));
    header.push_back("H1");
    header.push_back("H2");
    write_row(os, header);

    const int nseg = static_cast<int>(cfg.path.size()) - 1;
    for (int i = 0; i < cfg.samples; ++i) {
        const double u =
            cfg.samples == 1 ? 0.0 : static_cast<double>(i) * nseg / (cfg.samples - 1);
        const int seg = std::min(static_cast<int>(u), nseg - 1);
        const double frac = u - seg;
        std::vector<double> t(2);
        for (int d = 0; d < 2; ++d)
            t[d] = cfg.path[seg][d] + frac * (cfg.path[seg + 1][d] - cfg.path[seg][d]);

        LatticeState s;
        try {
            s = evaluate_multitime(sys, s0, t, cfg.step);
        } catch (const std::exception& e) {
            os.flush();
            throw RuntimeFailure("sample " + std::to_string(i + 1) + ": " + e.what());
        }
        std::vector<std::string> row{format_g17(t[0]), format_g17(t[1])};
        for (double v : s.x) row.push_back(format_g17(v));
        for (double v : s.p) row.push_back(format_g17(v));
        row.push_back(format_g17(toda_H1(s, tc)));
        row.push_back(format_g17(toda_H2(s, tc)));
        write_row(os, row);
    }
    return file;
}

std::filesystem::path simulate_backlund(const RunConfig& cfg) {
    const TodaConfig& tc = cfg.toda;
    const BtParam lam(cfg.lambdas.front());
    const double mu = cfg.mus.front();

    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path file = cfg.out / "backlund.csv";
    std::ofstream os(file);
    if (!os) throw std::invalid_argument("cannot write " + file.string());

    std::vector<std::string> header{"iter"};
    for (int k = 1; k <= tc.n; ++k) header.push_back("x" + std::to_string(k));
    for (int k = 1; k <= tc.n; ++k) header.push_back("p" + std::to_string(k));
    header.push_back("Lambda");
    header.push_back("spectrality");
    header.push_back("trT");
    write_row(os, header);

    LatticeState s = initial_state(cfg);
    for (int iter = 0; iter <= cfg.iterations; ++iter) {
        BtStepResult step;
        try {
            step = bt_forward(s, lam, tc);
        } catch (const std::exception& e) {
            os.flush();
            throw RuntimeFailure("iteration " + std::to_string(iter) + ": " + e.what());
        }
        std::vector<std::string> row{std::to_string(iter)};
        for (double v : s.x) row.push_back(format_g17(v));
        for (double v : s.p) row.push_back(format_g17(v));
        row.push_back(format_g17(bt_lagrangian(s.x, step.next.x, lam, tc)));
        row.push_back(format_g17(spectrality_integral(s.x, step.next.x, s.p, lam, tc).direct));
        row.push_back(format_g17(monodromy(s, mu).trace()));
        write_row(os, row);
        s = step.next;
    }
    return file;
}

}  // namespace

std::filesystem::path run_simulate(const RunConfig& cfg) {
    cfg.validate();
    switch (cfg.experiment) {
        case Experiment::Continuous: return simulate_continuous(cfg);
        case Experiment::Backlund: return simulate_backlund(cfg);
        default:
            throw std::invalid_argument("simulate needs experiment 'continuous' or 'backlund'");
    }
}

std::filesystem::path run_sweep(const RunConfig& cfg) {
    cfg.validate();
    const std::vector<int> ns =
        cfg.n_values.empty() ? std::vector<int>{cfg.toda.n} : cfg.n_values;

    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path file = cfg.out / "sweep.csv";
    std::ofstream os(file);
    if (!os) throw std::invalid_argument("cannot write " + file.string());
    write_row(os, {"n", "boundary", "lambda", "mu", "status", "commutation_defect",
                   "closure_ell", "closure_ell_reduced", "zero_curvature_defect"});

    for (int n : ns) {
        TodaConfig tc = cfg.toda;
        tc.n = n;
        const LatticeState s =
            cfg.state && n == cfg.toda.n ? *cfg.state : sample_state(cfg.seed, tc);
        for (double l : cfg.lambdas) {
            for (double m : cfg.mus) {
                std::vector<std::string> row{std::to_string(n), toda::to_string(tc.boundary),
                                             format_g17(l), format_g17(m)};
                try {
                    const double comm = commutation_defect(s, BtParam(l), BtParam(m), tc);
                    const ClosureConstant cc = closure_constant(s, BtParam(l), BtParam(m), tc);
                    const double zcr = zero_curvature_defect(s, BtParam(l), m, tc);
                    row.push_back("ok");
                    row.push_back(format_g17(comm));
                    row.push_back(format_g17(cc.ell));
                    row.push_back(format_g17(cc.ell_reduced));
                    row.push_back(format_g17(zcr));
                } catch (const BacklundError&) {
                    row.insert(row.end(), {"branch-invalid", "", "", "", ""});
                }
                write_row(os, row);
            }
        }
    }
    return file;
}

}  // namespace toda::harness
