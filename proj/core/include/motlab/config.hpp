#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motlab/diagnostics.hpp"
#include "motlab/problem.hpp"
#include "motlab/stepper.hpp"

namespace motlab {

struct GridConfig {
    int dim = 1;
    std::vector<double> extents;
    std::vector<int> cells;

    bool operator==(const GridConfig&) const = default;
};

struct MotilityConfig {
    std::string family = "constant";
    std::vector<double> parameters{1.0};

    bool operator==(const MotilityConfig&) const = default;
};

struct TimeConfig {
    double t_end = 1.0;
    bool auto_dt = false;   // serialized as "dt": "auto"
    double dt = 0.0;        // ignored when auto_dt
    double safety = 0.9;    // suggest_dt factor when auto_dt

    bool operator==(const TimeConfig&) const = default;
};

struct SolverConfig {
    double solver_tol = 1e-11;
    int max_iters = 0;  // 0: 10x cell count

    bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::int64_t snapshot_cadence = 0;  // 0: no snapshots
    bool write_csv = true;
    bool write_snapshots = true;

    bool operator==(const OutputConfig&) const = default;
};

/// Complete description of a single simulation run.  Serializes to a single
/// JSON document; parse(serialize(c)) == c holds field-for-field.
struct RunConfig {
    GridConfig grid;
    MotilityConfig motility;
    InitialDataSpec u0;
    InitialDataSpec v0;
    double epsilon = 0.0;
    TimeConfig time;
    SolverConfig solver;
    DiagnosticsConfig diagnostics;
    OutputConfig output;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& config);

/// Cross-field validation + materialization.  Throws std::invalid_argument
/// with a config-path-prefixed message on any violation.
struct MaterializedRun {
    ProblemSpec problem;
    StepParams step_params;
    double t_end = 0.0;
};
MaterializedRun materialize(const RunConfig& config);

/// Output directory resolution: relative directories are joined under
/// $MOTLAB_OUTPUT_ROOT when that variable is set, else used as-is.
std::filesystem::path resolve_output_directory(const OutputConfig& output);

}  // namespace motlab
