#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motlab/config.hpp"
#include "motlab/csv.hpp"
#include "motlab/plots.hpp"
#include "motlab/runner.hpp"
#include "motlab/snapshot.hpp"

using namespace motlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "motlab_harness_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// 1D gaussian-into-uniform-signal run: 50 steps, 6 diagnostics rows,
/// snapshots at steps 0 / 25 / 50.
RunConfig small_run_config(const fs::path& out_dir) {
    RunConfig config;
    config.grid.dim = 1;
    config.grid.extents = {1.0};
    config.grid.cells = {32};
    config.motility.family = "exp_decay";
    config.motility.parameters = {1.0, 0.5};
    config.u0.kind = "gaussian";
    config.u0.bumps = {BumpSpec{{0.5, 0.0, 0.0}, 0.1, 1.0}};
    config.u0.mass = 1.0;
    config.v0.kind = "constant";
    config.v0.value = 1.0;
    config.epsilon = 0.1;
    config.time.t_end = 0.05;
    config.time.dt = 1e-3;
    config.solver.solver_tol = 1e-12;
    config.diagnostics.cadence = 10;
    config.diagnostics.p_list = {2.0, 3.0};
    config.output.directory = out_dir.string();
    config.output.snapshot_cadence = 25;
    return config;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void expect_parse_error(const std::string& json_text, const std::string& needle) {
    try {
        (void)parse_run_config(json_text);
        FAIL("expected parse failure mentioning '" << needle << "'");
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

const char* kBaseJson = R"({
  "grid": {"dim": 1, "extents": [1.0], "cells": [16]},
  "motility": {"family": "constant", "parameters": [1.0]},
  "u0": {"kind": "constant", "value": 1.0},
  "v0": {"kind": "constant", "value": 1.0},
  "epsilon": 0.0,
  "time": {"t_end": 0.1, "dt": 0.001}
})";

}  // namespace

TEST_CASE("run config serialization round-trips field-for-field") {
    RunConfig config;
    config.grid.dim = 2;
    config.grid.extents = {1.0, 2.5};
    config.grid.cells = {12, 20};
    config.motility.family = "rational";
    config.motility.parameters = {1.0, 0.5, 2.0};
    config.u0.kind = "bumps";
    config.u0.bumps = {BumpSpec{{0.25, 0.5, 0.0}, 0.08, 2.0},
                       BumpSpec{{0.75, 1.75, 0.0}, 0.2, 0.5}};
    config.u0.mass = 3.0;
    config.v0.kind = "random_smooth";
    config.v0.seed = 42;
    config.v0.modes = 3;
    config.v0.amplitude = 0.25;
    config.v0.offset = 0.5;
    config.epsilon = 0.03125;
    config.time.t_end = 2.0;
    config.time.dt = 0.0005;
    config.solver.solver_tol = 1e-10;
    config.solver.max_iters = 777;
    config.diagnostics.cadence = 7;
    config.diagnostics.p_list = {1.5, 2.0, 4.0};
    config.diagnostics.weighted = true;
    config.diagnostics.weighted_p = 3.0;
    config.output.directory = "some/rel/dir";
    config.output.snapshot_cadence = 11;
    config.output.write_csv = false;
    config.output.write_snapshots = true;

    const RunConfig reparsed = parse_run_config(serialize_run_config(config));
    CHECK(reparsed == config);

    // The auto-dt spelling survives the trip too.
    config.time.auto_dt = true;
    config.time.dt = 0.0;
    config.time.safety = 0.5;
    const RunConfig auto_trip = parse_run_config(serialize_run_config(config));
    CHECK(auto_trip == config);
    CHECK(serialize_run_config(config).find("\"auto\"") != std::string::npos);
}

TEST_CASE("config parser rejects malformed documents with located messages") {
    expect_parse_error("{", "config");
    expect_parse_error(R"({"grid": {}})", "$.grid");

    nlohmann::json doc = nlohmann::json::parse(kBaseJson);
    doc["surprise"] = 1;
    expect_parse_error(doc.dump(), "surprise");

    doc = nlohmann::json::parse(kBaseJson);
    doc["time"]["dt"] = "fast";
    expect_parse_error(doc.dump(), "$.time.dt");

    doc = nlohmann::json::parse(kBaseJson);
    doc["grid"]["cells"] = {16.5};
    expect_parse_error(doc.dump(), "$.grid.cells");

    doc = nlohmann::json::parse(kBaseJson);
    doc["u0"].erase("kind");
    expect_parse_error(doc.dump(), "$.u0");
}

TEST_CASE("load_run_config reads a file and materialize validates") {
    const fs::path dir = fresh_dir("load_config");
    const fs::path file = dir / "config.json";
    {
        std::ofstream out(file);
        out << kBaseJson;
    }
    const RunConfig config = load_run_config(file);
    CHECK(config.grid.cells == std::vector<int>{16});
    CHECK(config.time.dt == 0.001);
    const MaterializedRun plan = materialize(config);
    CHECK(plan.step_params.dt == 0.001);
    CHECK(plan.t_end == 0.1);
    CHECK(plan.problem.grid.total == 16);

    CHECK_THROWS_AS(load_run_config(dir / "missing.json"), std::invalid_argument);

    RunConfig bad = config;
    bad.time.dt = -1.0;
    CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
    bad = config;
    bad.diagnostics.cadence = 0;
    CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
    bad = config;
    bad.solver.solver_tol = 1e-3;  // above the 1e-6 ceiling
    CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
}

TEST_CASE("run_single maps config errors to exit code 2 without artifacts") {
    RunConfig config = small_run_config(fresh_dir("config_error"));
    config.time.dt = -1.0;
    const RunOutcome outcome = run_single(config);
    CHECK(outcome.status == RunStatus::config_error);
    CHECK(exit_code(outcome.status) == 2);
    CHECK_FALSE(outcome.message.empty());
    CHECK(outcome.records.empty());
    CHECK(outcome.directory.empty());  // failed before any directory was resolved
}

TEST_CASE("run_single writes csv, snapshots and manifest with exact bookkeeping") {
    const fs::path dir = fresh_dir("happy_run");
    const RunConfig config = small_run_config(dir);

    std::int64_t probe_calls = 0;
    const RunOutcome outcome =
        run_single(config, [&](const SimState&, std::int64_t) { ++probe_calls; });

    REQUIRE(outcome.status == RunStatus::ok);
    CHECK(outcome.n_steps == 50);
    CHECK(probe_calls == 51);  // every step including step 0
    REQUIRE(outcome.records.size() == 6);  // steps 0,10,20,30,40,50
    CHECK(outcome.records.back().t == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(outcome.invariants.all());
    CHECK(outcome.invariants.max_mass_drift <=
          10.0 * config.solver.solver_tol * std::max(1.0, outcome.records[0].mass_u));

    // CSV: fixed header, one row per record, 17-significant-digit round trip.
    const fs::path csv_path = dir / "diagnostics.csv";
    REQUIRE(fs::exists(csv_path));
    const std::string text = slurp(csv_path);
    const std::string header = text.substr(0, text.find('\n'));
    CHECK(header ==
          "t,mass_u,sup_v,dual_norm_sq,l2_u_sq,grad_v_sq,lap_v_sq,grad_v_4,v_t_sq,"
          "lp_u_2,lp_u_3,entropy_u,fisher_u,grad_u_43,weighted,stab_u,stab_v");
    const CsvTable table = read_csv(csv_path);
    REQUIRE(table.rows.size() == 6);
    const std::size_t t_col = table.column("t");
    const std::size_t mass_col = table.column("mass_u");
    const std::size_t vt_col = table.column("v_t_sq");
    const std::size_t weighted_col = table.column("weighted");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        REQUIRE(table.rows[r][t_col].has_value());
        CHECK(*table.rows[r][t_col] == outcome.records[r].t);        // bitwise
        CHECK(*table.rows[r][mass_col] == outcome.records[r].mass_u);  // bitwise
        CHECK_FALSE(table.rows[r][weighted_col].has_value());  // not enabled
    }
    CHECK_FALSE(table.rows[0][vt_col].has_value());  // no previous state yet
    CHECK(table.rows[1][vt_col].has_value());

    // Snapshots: cadence 25 plus forced endpoints -> steps 0, 25, 50.
    for (const char* name :
         {"snapshot_00000000.mlab", "snapshot_00000025.mlab", "snapshot_00000050.mlab"}) {
        CHECK(fs::exists(dir / name));
    }
    const Snapshot first = read_snapshot(dir / "snapshot_00000000.mlab");
    CHECK(first.t == 0.0);
    CHECK(first.epsilon == 0.1);
    const MaterializedRun plan = materialize(config);
    REQUIRE(first.u.size() == plan.problem.u0.size());
    for (std::size_t i = 0; i < first.u.size(); ++i) {
        CHECK(first.u[i] == plan.problem.u0[i]);  // initial state, bit-for-bit
    }
    const Snapshot last = read_snapshot(dir / "snapshot_00000050.mlab");
    CHECK(last.t == doctest::Approx(0.05).epsilon(1e-12));

    // Manifest: status, bookkeeping, config echo.
    const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("status") == "ok");
    CHECK(manifest.at("exit_code") == 0);
    CHECK(manifest.at("n_steps") == 50);
    CHECK(manifest.at("rows_written") == 6);
    CHECK(manifest.at("snapshots").size() == 3);
    CHECK(manifest.at("invariants").at("mass_pass") == true);
    CHECK(manifest.at("invariants").at("positivity_pass") == true);
    CHECK(manifest.at("invariants").at("sup_v_monotone_pass") == true);
    CHECK(parse_run_config(manifest.at("config").dump()) == config);
    CHECK(manifest.at("final_record").at("t").get<double>() ==
          doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("output toggles: cadence 0 keeps endpoints, flags suppress files") {
    {
        const fs::path dir = fresh_dir("endpoints_only");
        RunConfig config = small_run_config(dir);
        config.output.snapshot_cadence = 0;
        REQUIRE(run_single(config).status == RunStatus::ok);
        CHECK(fs::exists(dir / "snapshot_00000000.mlab"));
        CHECK(fs::exists(dir / "snapshot_00000050.mlab"));
        std::size_t count = 0;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".mlab") ++count;
        }
        CHECK(count == 2);
    }
    {
        const fs::path dir = fresh_dir("no_files");
        RunConfig config = small_run_config(dir);
        config.output.write_csv = false;
        config.output.write_snapshots = false;
        const RunOutcome outcome = run_single(config);
        REQUIRE(outcome.status == RunStatus::ok);
        CHECK(outcome.records.size() == 6);  // in-memory diagnostics still on
        CHECK_FALSE(fs::exists(dir / "diagnostics.csv"));
        CHECK_FALSE(fs::exists(dir / "snapshot_00000000.mlab"));
        CHECK(fs::exists(dir / "manifest.json"));  // manifest is unconditional
    }
}

TEST_CASE("snapshot files round-trip bitwise and carry the documented layout") {
    const std::vector<double> extents = {1.0, 2.0};
    const std::vector<int> cells = {6, 5};
    const Grid grid = build_grid(2, extents, cells);
    Snapshot snap;
    snap.grid = grid;
    snap.t = 0.375;
    snap.epsilon = 0.125;
    snap.u = make_field(grid);
    snap.v = make_field(grid);
    for (std::size_t i = 0; i < snap.u.size(); ++i) {
        snap.u[i] = 0.1 + 1e-3 * static_cast<double>(i * i % 17);
        snap.v[i] = 1.0 / (1.0 + static_cast<double>(i));
    }

    const fs::path dir = fresh_dir("snapshot_identity");
    const fs::path file = dir / "state.mlab";
    write_snapshot(file, snap);

    const Snapshot back = read_snapshot(file);
    CHECK(back.grid.dim == 2);
    CHECK(back.grid.cells == grid.cells);
    CHECK(back.grid.extents == grid.extents);
    CHECK(back.t == snap.t);
    CHECK(back.epsilon == snap.epsilon);
    REQUIRE(back.u.size() == snap.u.size());
    for (std::size_t i = 0; i < snap.u.size(); ++i) {
        CHECK(back.u[i] == snap.u[i]);
        CHECK(back.v[i] == snap.v[i]);
    }

    // Raw layout: magic, then version and dim as little-endian u32.
    const std::string bytes = slurp(file);
    REQUIRE(bytes.size() >= 12);
    CHECK(bytes.substr(0, 4) == "MLAB");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[5]) == 0);
    CHECK(static_cast<unsigned char>(bytes[6]) == 0);
    CHECK(static_cast<unsigned char>(bytes[7]) == 0);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // dim

    // Corruption is detected, not silently accepted.
    {
        std::ofstream out(dir / "bad_magic.mlab", std::ios::binary);
        out << "XLAB" << bytes.substr(4);
    }
    CHECK_THROWS_AS(read_snapshot(dir / "bad_magic.mlab"), std::runtime_error);
    {
        std::ofstream out(dir / "truncated.mlab", std::ios::binary);
        out << bytes.substr(0, bytes.size() / 2);
    }
    CHECK_THROWS_AS(read_snapshot(dir / "truncated.mlab"), std::runtime_error);
    CHECK_THROWS_AS(read_snapshot(dir / "absent.mlab"), std::runtime_error);
}

TEST_CASE("csv values survive a write/read cycle exactly") {
    const std::vector<double> values = {1.0 / 3.0,
                                        0.1,
                                        6.02214076e23,
                                        1e-300,
                                        -12345.678901234567,
                                        3.141592653589793,
                                        1.2345678901234567e-8};
    for (const double x : values) {
        const std::string formatted = format_csv_value(x);
        CHECK(std::strtod(formatted.c_str(), nullptr) == x);
    }
}

TEST_CASE("epsilon sweep: a tied pair gives distance exactly zero") {
    const fs::path dir = fresh_dir("sweep_tie");
    RunConfig config = small_run_config(dir);
    config.time.t_end = 0.02;  // 20 steps is plenty for a tie check
    const SweepReport report = run_epsilon_sweep(config, {0.5, 0.5}, 2);
    REQUIRE(report.status == RunStatus::ok);
    REQUIRE(report.distances.size() == 1);
    CHECK(report.distances[0] == 0.0);  // identical members, bitwise
    CHECK(report.monotone_pass);
    CHECK(fs::exists(dir / "eps_000" / "manifest.json"));
    CHECK(fs::exists(dir / "eps_001" / "manifest.json"));
    const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "sweep_summary.json"));
    CHECK(summary.at("status") == "ok");
    CHECK(summary.at("monotone_pass") == true);
    CHECK(summary.at("members").size() == 2);
}

TEST_CASE("epsilon sweep: decreasing regularization contracts the gaps") {
    const fs::path dir = fresh_dir("sweep_decreasing");
    RunConfig config = small_run_config(dir);
    config.time.t_end = 0.02;
    config.output.snapshot_cadence = 10;
    const SweepReport report = run_epsilon_sweep(config, {0.5, 0.1, 0.0}, 2);
    REQUIRE(report.status == RunStatus::ok);
    REQUIRE(report.distances.size() == 2);
    CHECK(report.distances[0] > 0.0);
    CHECK(report.distances[1] > 0.0);
    CHECK(report.distances[1] <= 1.10 * report.distances[0] + 1e-12);
    CHECK(report.monotone_pass);
    REQUIRE_FALSE(report.sample_times.empty());
    CHECK(report.sample_times.front() == 0.0);
    CHECK(report.sample_times.back() == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(report.member_directories.size() == 3);
}

TEST_CASE("epsilon sweep rejects bad lists up front") {
    RunConfig config = small_run_config(fresh_dir("sweep_bad"));
    CHECK(run_epsilon_sweep(config, {0.5}).status == RunStatus::config_error);
    CHECK(run_epsilon_sweep(config, {0.1, 0.5}).status == RunStatus::config_error);
    CHECK(run_epsilon_sweep(config, {0.5, -0.1}).status == RunStatus::config_error);
    CHECK(run_epsilon_sweep(config, {}).status == RunStatus::config_error);
}

TEST_CASE("longtime study reports crossings against the exact uniform decay") {
    const fs::path dir = fresh_dir("longtime_uniform");
    RunConfig config;
    config.grid.dim = 1;
    config.grid.extents = {1.0};
    config.grid.cells = {16};
    config.motility.family = "constant";
    config.motility.parameters = {1.0};
    config.u0.kind = "constant";
    config.u0.value = 1.0;
    config.v0.kind = "constant";
    config.v0.value = 1.0;
    config.epsilon = 0.0;
    config.time.t_end = 3.0;
    config.time.dt = 0.01;
    config.output.directory = dir.string();
    config.output.write_snapshots = false;

    // Uniform data: v_n = (1 + dt)^{-n}; the first n with v_n <= 0.1 is 232.
    const LongtimeReport report = run_longtime_study(config, {0.1, 1e-12});
    REQUIRE(report.status == RunStatus::ok);
    REQUIRE(report.v_crossing.size() == 2);
    REQUIRE(report.u_crossing.size() == 2);
    REQUIRE(report.v_crossing[0].has_value());
    CHECK(*report.v_crossing[0] == doctest::Approx(2.32).epsilon(1e-9));
    CHECK_FALSE(report.v_crossing[1].has_value());  // 0.05 final value, never 1e-12
    REQUIRE(report.u_crossing[0].has_value());
    CHECK(*report.u_crossing[0] == 0.0);  // u is already spatially uniform
    REQUIRE(report.u_crossing[1].has_value());
    CHECK(*report.u_crossing[1] == 0.0);

    const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "longtime.json"));
    CHECK(summary.at("sup_v_crossings").size() == 2);
    CHECK(summary.at("sup_v_crossings")[1].at("time").is_null());
    CHECK_FALSE(summary.at("stab_u_crossings")[0].at("time").is_null());

    CHECK(run_longtime_study(config, {}).status == RunStatus::config_error);
    CHECK(run_longtime_study(config, {-0.5}).status == RunStatus::config_error);
}

TEST_CASE("MOTLAB_OUTPUT_ROOT re-roots relative output directories only") {
    const fs::path root = fresh_dir("output_root");
    OutputConfig relative;
    relative.directory = "nested/run";
    OutputConfig absolute;
    absolute.directory = (root / "fixed").string();

    REQUIRE(::setenv("MOTLAB_OUTPUT_ROOT", root.c_str(), 1) == 0);
    CHECK(resolve_output_directory(relative) == root / "nested/run");
    CHECK(resolve_output_directory(absolute) == root / "fixed");
    REQUIRE(::unsetenv("MOTLAB_OUTPUT_ROOT") == 0);
    CHECK(resolve_output_directory(relative) == fs::path("nested/run"));
}

TEST_CASE("plots render deterministically from run artifacts") {
    const fs::path dir = fresh_dir("plots_run");
    RunConfig config = small_run_config(dir);
    config.output.snapshot_cadence = 10;
    REQUIRE(run_single(config).status == RunStatus::ok);

    const std::vector<fs::path> files = emit_plots(dir);
    REQUIRE_FALSE(files.empty());
    std::vector<std::string> first_bytes;
    for (const fs::path& file : files) {
        REQUIRE(fs::exists(file));
        first_bytes.push_back(slurp(file));
        CHECK_FALSE(first_bytes.back().empty());
        CHECK(first_bytes.back().find("<svg") != std::string::npos);
        fs::remove(file);
    }
    const std::vector<fs::path> again = emit_plots(dir);
    REQUIRE(again.size() == files.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(slurp(again[i]) == first_bytes[i]);  // byte-identical re-render
    }

    CHECK_THROWS_AS(emit_plots(fresh_dir("plots_empty")), std::runtime_error);
}
