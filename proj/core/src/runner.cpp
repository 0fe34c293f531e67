#include "motlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "motlab/csv.hpp"
#include "motlab/snapshot.hpp"

namespace motlab {

namespace {

using ordered_json = nlohmann::ordered_json;

// Invariant gates; see InvariantReport in the header.
constexpr double kMassDriftFactor = 10.0;
constexpr double kNegativityTol = 1e-13;
constexpr double kSupVJumpTol = 1e-12;
// Distances at roundoff scale count as ties in the sweep monotonicity check.
constexpr double kSweepDistanceFloor = 1e-12;
constexpr double kSweepSlack = 1.10;

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json record_to_json(const DiagnosticsRecord& record,
                            const std::vector<double>& p_list) {
    ordered_json j;
    j["t"] = record.t;
    j["mass_u"] = record.mass_u;
    j["sup_v"] = record.sup_v;
    j["dual_norm_sq"] = record.dual_norm_sq;
    j["l2_u_sq"] = record.l2_u_sq;
    j["grad_v_sq"] = record.grad_v_sq;
    j["lap_v_sq"] = record.lap_v_sq;
    j["grad_v_4"] = record.grad_v_4;
    j["v_t_sq"] = record.v_t_sq.has_value() ? ordered_json(*record.v_t_sq) : ordered_json(nullptr);
    ordered_json lp = ordered_json::array();
    for (std::size_t i = 0; i < record.lp_u.size(); ++i) {
        lp.push_back({{"p", i < p_list.size() ? p_list[i] : 0.0}, {"value", record.lp_u[i]}});
    }
    j["lp_u"] = lp;
    j["entropy_u"] = record.entropy_u;
    j["fisher_u"] = record.fisher_u;
    j["grad_u_43"] = record.grad_u_43;
    j["weighted"] = record.weighted.has_value() ? ordered_json(*record.weighted)
                                                : ordered_json(nullptr);
    j["stab_u"] = record.stab_u;
    j["stab_v"] = record.stab_v;
    return j;
}

std::string snapshot_name(std::int64_t step) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "snapshot_%08lld.mlab", static_cast<long long>(step));
    return buf;
}

struct InvariantTracker {
    double mass0 = 0.0;
    double mass_gate = 0.0;
    double u_floor = 0.0;  // most negative value tolerated
    double v_floor = 0.0;
    double sup_v_prev = 0.0;
    bool started = false;
    InvariantReport report;

    void init(const Grid& grid, const Field& u0, const Field& v0, double solver_tol) {
        mass0 = integrate(grid, u0);
        mass_gate = kMassDriftFactor * solver_tol * std::max(1.0, std::abs(mass0));
        double sup_u0 = 0.0, sup_v0 = 0.0;
        for (double x : u0) sup_u0 = std::max(sup_u0, x);
        for (double x : v0) sup_v0 = std::max(sup_v0, x);
        u_floor = -kNegativityTol * (1.0 + sup_u0);
        v_floor = -kNegativityTol * (1.0 + sup_v0);
        report.min_u = u0.empty() ? 0.0 : *std::min_element(u0.begin(), u0.end());
        report.min_v = v0.empty() ? 0.0 : *std::min_element(v0.begin(), v0.end());
        sup_v_prev = sup_v0;
        started = true;
    }

    void observe(const SimState& state, std::int64_t step) {
        const double mass = integrate(state.grid, state.u);
        report.max_mass_drift = std::max(report.max_mass_drift, std::abs(mass - mass0));
        double min_u = state.u[0], min_v = state.v[0], sup_v = state.v[0];
        for (double x : state.u) min_u = std::min(min_u, x);
        for (double x : state.v) {
            min_v = std::min(min_v, x);
            sup_v = std::max(sup_v, x);
        }
        report.min_u = std::min(report.min_u, min_u);
        report.min_v = std::min(report.min_v, min_v);
        if (step > 0) {
            report.max_sup_v_jump = std::max(report.max_sup_v_jump, sup_v - sup_v_prev);
        }
        sup_v_prev = sup_v;
    }

    void finalize() {
        report.mass_pass = report.max_mass_drift <= mass_gate;
        report.positivity_pass = report.min_u >= u_floor && report.min_v >= v_floor;
        report.sup_v_monotone_pass =
            report.max_sup_v_jump <= kSupVJumpTol * (1.0 + std::abs(sup_v_prev));
    }
};

void write_manifest(const std::filesystem::path& directory, const RunConfig& config,
                    const RunOutcome& outcome, const InvariantTracker& tracker,
                    const std::string& started_at, std::size_t rows_written,
                    const std::vector<std::string>& snapshots) {
    ordered_json manifest;
    manifest["code_version"] = motlab_version();
    manifest["status"] = run_status_name(outcome.status);
    manifest["exit_code"] = exit_code(outcome.status);
    manifest["message"] = outcome.message;
    manifest["started_at"] = started_at;
    manifest["finished_at"] = iso8601_utc(std::chrono::system_clock::now());
    manifest["config"] = ordered_json::parse(serialize_run_config(config));
    manifest["dt"] = outcome.dt;
    manifest["n_steps"] = outcome.n_steps;
    manifest["rows_written"] = rows_written;
    manifest["snapshots"] = snapshots;
    ordered_json invariants;
    invariants["mass_pass"] = tracker.report.mass_pass;
    invariants["positivity_pass"] = tracker.report.positivity_pass;
    invariants["sup_v_monotone_pass"] = tracker.report.sup_v_monotone_pass;
    invariants["max_mass_drift"] = tracker.report.max_mass_drift;
    invariants["mass_gate"] = tracker.mass_gate;
    invariants["min_u"] = tracker.report.min_u;
    invariants["min_v"] = tracker.report.min_v;
    invariants["max_sup_v_jump"] = tracker.report.max_sup_v_jump;
    manifest["invariants"] = invariants;
    if (!outcome.records.empty()) {
        manifest["final_record"] =
            record_to_json(outcome.records.back(), config.diagnostics.p_list);
    } else {
        manifest["final_record"] = nullptr;
    }
    std::ofstream out(directory / "manifest.json", std::ios::trunc);
    if (out) out << manifest.dump(2) << '\n';
}

std::string format_double_label(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

}  // namespace

std::string motlab_version() { return "motlab 1.0.0"; }

int exit_code(RunStatus status) { return static_cast<int>(status); }

std::string run_status_name(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return "ok";
        case RunStatus::config_error: return "config_error";
        case RunStatus::solver_failure: return "solver_failure";
        case RunStatus::invariant_violation: return "invariant_violation";
    }
    return "unknown";
}

RunOutcome run_single(const RunConfig& config, const StateProbe& probe) {
    RunOutcome outcome;
    const std::string started_at = iso8601_utc(std::chrono::system_clock::now());

    MaterializedRun plan;
    try {
        plan = materialize(config);
    } catch (const std::exception& e) {
        outcome.status = RunStatus::config_error;
        outcome.message = e.what();
        return outcome;
    }

    const std::filesystem::path directory = resolve_output_directory(config.output);
    outcome.directory = directory;
    outcome.dt = plan.step_params.dt;
    outcome.n_steps = plan_steps(plan.t_end, plan.step_params.dt);

    std::optional<DiagnosticsRecorder> recorder;
    std::optional<DiagnosticsCsvWriter> csv;
    try {
        std::filesystem::create_directories(directory);
        recorder.emplace(plan.problem.grid, plan.problem.motility, config.diagnostics,
                         plan.problem.u0, plan.problem.v0);
        if (config.output.write_csv) {
            csv.emplace(directory / "diagnostics.csv", config.diagnostics);
        }
    } catch (const std::exception& e) {
        outcome.status = RunStatus::config_error;
        outcome.message = e.what();
        return outcome;
    }
    outcome.weighted_params = recorder->weighted_params();

    InvariantTracker tracker;
    tracker.init(plan.problem.grid, plan.problem.u0, plan.problem.v0,
                 plan.step_params.solver_tol);

    std::vector<std::string> snapshots;
    std::size_t rows_written = 0;
    const std::int64_t snap_cadence = config.output.snapshot_cadence;
    const std::int64_t last_step = outcome.n_steps;

    const auto observer = [&](const SimState& state, std::int64_t step) {
        tracker.observe(state, step);
        if (const auto record = recorder->observe(state, step)) {
            if (csv) csv->append(*record);
            ++rows_written;
        }
        const bool on_cadence = snap_cadence > 0 && step % snap_cadence == 0;
        if (config.output.write_snapshots && (on_cadence || step == 0 || step == last_step)) {
            const std::string name = snapshot_name(step);
            Snapshot snap{state.grid, state.t, config.epsilon, state.u, state.v};
            write_snapshot(directory / name, snap);
            snapshots.push_back(name);
        }
        if (probe) probe(state, step);
    };

    try {
        SimState state = make_state(plan.problem);
        RunSummary summary = run(std::move(state), plan.problem.motility, plan.step_params,
                                 plan.t_end, observer);
        outcome.final_state = std::move(summary.final_state);
    } catch (const SolverError& e) {
        outcome.status = RunStatus::solver_failure;
        outcome.message = e.what();
    } catch (const std::exception& e) {
        // I/O failures mid-run land here; the manifest still records them.
        outcome.status = RunStatus::solver_failure;
        outcome.message = e.what();
    }

    if (csv) {
        try {
            csv->flush();
        } catch (const std::exception& e) {
            if (outcome.status == RunStatus::ok) {
                outcome.status = RunStatus::solver_failure;
                outcome.message = e.what();
            }
        }
    }
    outcome.records = recorder->records();
    tracker.finalize();
    outcome.invariants = tracker.report;
    if (outcome.status == RunStatus::ok && !tracker.report.all()) {
        outcome.status = RunStatus::invariant_violation;
        std::string which;
        if (!tracker.report.mass_pass) which += " mass";
        if (!tracker.report.positivity_pass) which += " positivity";
        if (!tracker.report.sup_v_monotone_pass) which += " v-sup-monotonicity";
        outcome.message = "invariant check failed:" + which;
    }
    write_manifest(directory, config, outcome, tracker, started_at, rows_written, snapshots);
    return outcome;
}

SweepReport run_epsilon_sweep(const RunConfig& config, std::vector<double> eps_list,
                              int workers) {
    SweepReport report;
    report.epsilons = eps_list;
    if (eps_list.size() < 2) {
        report.status = RunStatus::config_error;
        report.message = "sweep: need at least two epsilon values";
        return report;
    }
    for (std::size_t j = 0; j < eps_list.size(); ++j) {
        if (!(eps_list[j] >= 0.0) || !std::isfinite(eps_list[j])) {
            report.status = RunStatus::config_error;
            report.message = "sweep: epsilon values must be finite and >= 0";
            return report;
        }
        if (j > 0 && eps_list[j] > eps_list[j - 1]) {
            report.status = RunStatus::config_error;
            report.message = "sweep: epsilon list must be nonincreasing";
            return report;
        }
    }

    const std::filesystem::path base_dir = resolve_output_directory(config.output);
    report.directory = base_dir;
    try {
        std::filesystem::create_directories(base_dir);
    } catch (const std::exception& e) {
        report.status = RunStatus::config_error;
        report.message = e.what();
        return report;
    }

    const std::size_t n = eps_list.size();
    std::vector<RunOutcome> outcomes(n);
    std::vector<std::vector<Field>> u_samples(n), v_samples(n);
    std::vector<std::vector<double>> sample_times(n);
    report.member_status.resize(n, RunStatus::ok);
    report.member_directories.resize(n);

    // Sampling at the snapshot cadence plus both endpoints, mirroring the
    // snapshot files, so distances are taken "over snapshot times".
    std::int64_t n_steps = 0;
    try {
        MaterializedRun plan = materialize(config);
        n_steps = plan_steps(plan.t_end, plan.step_params.dt);
    } catch (const std::exception& e) {
        report.status = RunStatus::config_error;
        report.message = e.what();
        return report;
    }
    const std::int64_t snap_cadence = config.output.snapshot_cadence;
    const auto is_sample = [&](std::int64_t step) {
        if (step == 0 || step == n_steps) return true;
        return snap_cadence > 0 && step % snap_cadence == 0;
    };

    std::atomic<std::size_t> next{0};
    const auto worker_fn = [&]() {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= n) return;
            RunConfig member = config;
            member.epsilon = eps_list[j];
            char label[16];
            std::snprintf(label, sizeof(label), "eps_%03zu", j);
            member.output.directory = (base_dir / label).string();
            report.member_directories[j] = member.output.directory;
            const auto sampler = [&, j](const SimState& state, std::int64_t step) {
                if (is_sample(step)) {
                    u_samples[j].push_back(state.u);
                    v_samples[j].push_back(state.v);
                    sample_times[j].push_back(state.t);
                }
            };
            outcomes[j] = run_single(member, sampler);
            report.member_status[j] = outcomes[j].status;
        }
    };

    int thread_count = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (thread_count < 1) thread_count = 2;
    thread_count = std::min<int>(thread_count, static_cast<int>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker_fn);
    for (auto& t : pool) t.join();

    for (std::size_t j = 0; j < n; ++j) {
        if (outcomes[j].status != RunStatus::ok &&
            exit_code(outcomes[j].status) > exit_code(report.status)) {
            report.status = outcomes[j].status;
            report.message = "member eps=" + format_double_label(eps_list[j]) + ": " +
                             outcomes[j].message;
        }
    }

    if (report.status == RunStatus::ok || report.status == RunStatus::invariant_violation) {
        report.sample_times = sample_times[0];
        const Grid& grid = outcomes[0].final_state.grid;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            if (u_samples[j].size() != u_samples[j + 1].size()) {
                report.status = RunStatus::solver_failure;
                report.message = "sweep: members recorded different sample counts";
                return report;
            }
            double dist = 0.0;
            Field diff = make_field(grid);
            for (std::size_t s = 0; s < u_samples[j].size(); ++s) {
                const Field& ua = u_samples[j][s];
                const Field& ub = u_samples[j + 1][s];
                for (std::size_t i = 0; i < diff.size(); ++i) {
                    const double d = ua[i] - ub[i];
                    diff[i] = d * d;
                }
                const double l2 = std::sqrt(integrate(grid, diff));
                double linf = 0.0;
                const Field& va = v_samples[j][s];
                const Field& vb = v_samples[j + 1][s];
                for (std::size_t i = 0; i < va.size(); ++i) {
                    linf = std::max(linf, std::abs(va[i] - vb[i]));
                }
                dist = std::max(dist, l2 + linf);
            }
            report.distances.push_back(dist);
        }
        for (std::size_t j = 0; j + 1 < report.distances.size(); ++j) {
            if (report.distances[j + 1] >
                kSweepSlack * report.distances[j] + kSweepDistanceFloor) {
                report.monotone_pass = false;
            }
        }
        if (report.status == RunStatus::ok && !report.monotone_pass) {
            report.status = RunStatus::invariant_violation;
            report.message = "sweep: pairwise distances are not nonincreasing (10% slack)";
        }
    }

    ordered_json summary;
    summary["code_version"] = motlab_version();
    summary["status"] = run_status_name(report.status);
    summary["message"] = report.message;
    summary["epsilons"] = report.epsilons;
    summary["sample_times"] = report.sample_times;
    summary["distances"] = report.distances;
    summary["monotone_pass"] = report.monotone_pass;
    ordered_json members = ordered_json::array();
    for (std::size_t j = 0; j < n; ++j) {
        members.push_back({{"epsilon", eps_list[j]},
                           {"directory", report.member_directories[j].string()},
                           {"status", run_status_name(report.member_status[j])}});
    }
    summary["members"] = members;
    std::ofstream out(base_dir / "sweep_summary.json", std::ios::trunc);
    if (out) out << summary.dump(2) << '\n';
    return report;
}

LongtimeReport run_longtime_study(const RunConfig& config, std::vector<double> eta_list) {
    LongtimeReport report;
    report.etas = eta_list;
    if (eta_list.empty()) {
        report.status = RunStatus::config_error;
        report.message = "longtime: need at least one eta";
        return report;
    }
    for (double eta : eta_list) {
        if (!(eta > 0.0) || !std::isfinite(eta)) {
            report.status = RunStatus::config_error;
            report.message = "longtime: eta values must be positive and finite";
            return report;
        }
    }
    RunOutcome outcome = run_single(config);
    report.status = outcome.status;
    report.message = outcome.message;
    report.directory = outcome.directory;
    if (outcome.status == RunStatus::config_error ||
        outcome.status == RunStatus::solver_failure) {
        return report;
    }

    const StabilizationReport stab =
        stabilization_metrics(outcome.records, eta_list, eta_list);
    for (const CrossingTime& crossing : stab.v_crossings) {
        report.v_crossing.push_back(crossing.time);
    }
    for (const CrossingTime& crossing : stab.u_crossings) {
        report.u_crossing.push_back(crossing.time);
    }

    ordered_json summary;
    summary["code_version"] = motlab_version();
    summary["status"] = run_status_name(report.status);
    summary["etas"] = report.etas;
    ordered_json v_rows = ordered_json::array();
    ordered_json u_rows = ordered_json::array();
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        v_rows.push_back({{"eta", eta_list[i]},
                          {"time", report.v_crossing[i].has_value()
                                       ? ordered_json(*report.v_crossing[i])
                                       : ordered_json(nullptr)}});
        u_rows.push_back({{"eta", eta_list[i]},
                          {"time", report.u_crossing[i].has_value()
                                       ? ordered_json(*report.u_crossing[i])
                                       : ordered_json(nullptr)}});
    }
    summary["sup_v_crossings"] = v_rows;
    summary["stab_u_crossings"] = u_rows;
    std::ofstream out(report.directory / "longtime.json", std::ios::trunc);
    if (out) out << summary.dump(2) << '\n';
    return report;
}

}  // namespace motlab
