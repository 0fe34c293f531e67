#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "motlab/config.hpp"
#include "motlab/diagnostics.hpp"

namespace motlab {

std::string motlab_version();

enum class RunStatus : int {
    ok = 0,
    config_error = 2,
    solver_failure = 3,
    invariant_violation = 4,
};

int exit_code(RunStatus status);
std::string run_status_name(RunStatus status);

/// Per-run invariant gates, tracked on every step:
///   mass:        |mass(t) - mass(0)| <= 10 * solver_tol * max(1, |mass(0)|)
///   positivity:  min u, min v >= -1e-13 * (1 + initial sup of that field)
///   v-sup:       max(v) never increases by more than 1e-12 * (1 + previous max)
struct InvariantReport {
    bool mass_pass = true;
    bool positivity_pass = true;
    bool sup_v_monotone_pass = true;
    double max_mass_drift = 0.0;
    double min_u = 0.0;
    double min_v = 0.0;
    double max_sup_v_jump = 0.0;  // largest single-step increase of max(v)

    bool all() const { return mass_pass && positivity_pass && sup_v_monotone_pass; }
};

struct RunOutcome {
    RunStatus status = RunStatus::ok;
    std::string message;  // empty on success
    std::filesystem::path directory;
    double dt = 0.0;
    std::int64_t n_steps = 0;
    std::vector<DiagnosticsRecord> records;
    std::optional<WeightedParams> weighted_params;
    InvariantReport invariants;
    SimState final_state;
};

/// Optional per-step hook (sees every step, including step 0).
using StateProbe = std::function<void(const SimState&, std::int64_t)>;

/// Runs one configured simulation, writing diagnostics.csv, snapshot files
/// (at the output snapshot cadence; cadence 0 keeps only the first/last
/// states) and manifest.json into the resolved output directory.  The
/// manifest is written exactly once, last, for every run that starts
/// stepping — including solver failures and invariant violations.
RunOutcome run_single(const RunConfig& config, const StateProbe& probe = {});

struct SweepReport {
    RunStatus status = RunStatus::ok;
    std::string message;
    std::filesystem::path directory;
    std::vector<double> epsilons;
    std::vector<double> sample_times;
    /// d_j = max over sample times of ||u_j - u_{j+1}||_{L2} + ||v_j - v_{j+1}||_inf.
    std::vector<double> distances;
    bool monotone_pass = true;  // d_{j+1} <= 1.1 * d_j (+ roundoff floor)
    std::vector<RunStatus> member_status;
    std::vector<std::filesystem::path> member_directories;
};

/// Runs one trajectory per epsilon (identical grid and timestep) in member
/// subdirectories eps_000, eps_001, ... under the configured output
/// directory, in parallel up to `workers` threads (0 = automatic), and
/// writes sweep_summary.json.  eps_list must be nonincreasing and
/// nonnegative; sampling happens at the snapshot cadence plus both endpoints.
SweepReport run_epsilon_sweep(const RunConfig& config, std::vector<double> eps_list,
                              int workers = 0);

struct LongtimeReport {
    RunStatus status = RunStatus::ok;
    std::string message;
    std::filesystem::path directory;
    std::vector<double> etas;
    /// First record time with sup_v <= eta / stab_u <= eta; absent if never.
    std::vector<std::optional<double>> v_crossing;
    std::vector<std::optional<double>> u_crossing;
};

/// Runs the configured simulation once and reports, per eta, the first
/// crossing times of sup_v and stab_u; writes longtime.json next to the run
/// artifacts.  Thresholds that are never reached are reported as absent.
LongtimeReport run_longtime_study(const RunConfig& config, std::vector<double> eta_list);

}  // namespace motlab
