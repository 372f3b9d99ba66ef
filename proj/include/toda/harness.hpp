#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toda/lattice.hpp"

namespace toda::harness {

/// A solver failure mid-run (branch loss, divergence), tagged with the step
/// at which it happened. Maps to exit code 1 at the CLI.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { Verify, Continuous, Backlund, Sweep };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

/// Everything a run needs: lattice setup, parameters, sampling seed, output
/// locations and optional per-check tolerance overrides.
struct RunConfig {
    Experiment experiment = Experiment::Verify;
    TodaConfig toda{4, Boundary::OpenEnd, 1e-12, 50};
    std::uint64_t seed = 1;
    std::optional<LatticeState> state;  // explicit initial state instead of sampling
    std::vector<double> lambdas{0.3};
    std::vector<double> mus{0.7};
    double step = 1e-3;
    double h_fd = 1e-5;
    std::vector<std::vector<double>> path{{0, 0}, {1, 0}, {1, 1}};  // continuous mode
    int samples = 50;                                               // continuous mode
    int iterations = 50;                                            // backlund mode
    std::vector<int> n_values;  // sweep grid; empty means {toda.n}
    std::filesystem::path out = "out";
    std::map<std::string, double> tolerance_overrides;

    void validate() const;  // throws std::invalid_argument on any bad field
};

/// Parse a JSON config; unknown keys are rejected. The result is validated.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg, int indent = 2);

struct CheckResult {
    std::string name;
    std::string anchor;  // one-line statement of the property under test
    double value = 0;    // measured defect or drift
    double tolerance = 0;
    bool pass = false;
    std::string note;  // populated when a check dies on a solver error
};

struct VerificationReport {
    std::string version;
    RunConfig config;
    std::vector<CheckResult> checks;

    bool all_pass() const;
};

/// Deterministic initial state for (seed, cfg): momenta uniform in [-0.5, 0.5];
/// positions uniform around a spread background under open ends (slope -1.5
/// per site) and around 0 under periodic boundaries. The spread keeps the
/// Backlund branch real for the default parameter set; a flat open-end lattice
/// has no real branch at lambda = 0.7 once N >= 4.
LatticeState sample_state(std::uint64_t seed, const TodaConfig& cfg);

/// Run the full invariant suite for the config.
VerificationReport run_verify(const RunConfig& cfg);

/// Serialize a report: sorted keys, stable field set, no timestamps.
std::string report_to_json(const VerificationReport& report, int indent = 2);

/// Write report.json under cfg.out; returns the file path.
std::filesystem::path write_report(const VerificationReport& report);

/// Trajectory writers; both return the written file path.
/// Continuous: samples of (t1, t2, x, p, H1, H2) along the configured path.
/// Backlund: iterates of F_lambda with edge Lagrangian, spectrality integral
/// and tr T(mu) columns.
std::filesystem::path run_simulate(const RunConfig& cfg);

/// Grid scan over n_values x lambdas x mus; one CSV row per cell, cells with
/// no real branch marked "branch-invalid". Returns the summary path.
std::filesystem::path run_sweep(const RunConfig& cfg);

/// Doubles formatted with 17 significant digits (round-trip exact).
std::string format_g17(double v);

}  // namespace toda::harness
