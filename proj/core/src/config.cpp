#include "motlab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace motlab {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw std::invalid_argument("config: " + path + ": " + message);
}

const json& member(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required key");
    return *it;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + item.key(), "unknown key");
    }
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::int64_t as_int64(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<std::int64_t>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], path));
    return out;
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of integers");
    std::vector<int> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path));
    return out;
}

InitialDataSpec parse_initial(const json& j, const std::string& path) {
    check_keys(j, {"kind", "value", "bumps", "seed", "modes", "amplitude", "offset", "mass"},
               path);
    InitialDataSpec spec;
    spec.kind = as_string(member(j, "kind", path), path + ".kind");
    if (j.contains("value")) spec.value = as_double(j["value"], path + ".value");
    if (j.contains("bumps")) {
        const json& bumps = j["bumps"];
        if (!bumps.is_array()) fail(path + ".bumps", "expected an array");
        for (std::size_t i = 0; i < bumps.size(); ++i) {
            const std::string bp = path + ".bumps[" + std::to_string(i) + "]";
            check_keys(bumps[i], {"center", "width", "amplitude"}, bp);
            BumpSpec bump;
            const auto center = as_double_list(member(bumps[i], "center", bp), bp + ".center");
            if (center.empty() || center.size() > 3) fail(bp + ".center", "expected 1-3 entries");
            for (std::size_t a = 0; a < center.size(); ++a) bump.center[a] = center[a];
            bump.width = as_double(member(bumps[i], "width", bp), bp + ".width");
            bump.amplitude = as_double(member(bumps[i], "amplitude", bp), bp + ".amplitude");
            spec.bumps.push_back(bump);
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            fail(path + ".seed", "expected a nonnegative integer");
        }
        spec.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("modes")) spec.modes = as_int(j["modes"], path + ".modes");
    if (j.contains("amplitude")) spec.amplitude = as_double(j["amplitude"], path + ".amplitude");
    if (j.contains("offset")) spec.offset = as_double(j["offset"], path + ".offset");
    if (j.contains("mass")) spec.mass = as_double(j["mass"], path + ".mass");
    return spec;
}

ordered_json dump_initial(const InitialDataSpec& spec) {
    ordered_json j;
    j["kind"] = spec.kind;
    j["value"] = spec.value;
    ordered_json bumps = ordered_json::array();
    for (const BumpSpec& bump : spec.bumps) {
        ordered_json b;
        b["center"] = std::vector<double>(bump.center.begin(), bump.center.end());
        b["width"] = bump.width;
        b["amplitude"] = bump.amplitude;
        bumps.push_back(b);
    }
    j["bumps"] = bumps;
    j["seed"] = spec.seed;
    j["modes"] = spec.modes;
    j["amplitude"] = spec.amplitude;
    j["offset"] = spec.offset;
    if (spec.mass.has_value()) j["mass"] = *spec.mass;
    return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(root,
               {"grid", "motility", "u0", "v0", "epsilon", "time", "solver", "diagnostics",
                "output"},
               "$");
    RunConfig config;

    const json& grid = member(root, "grid", "$");
    check_keys(grid, {"dim", "extents", "cells"}, "$.grid");
    config.grid.dim = as_int(member(grid, "dim", "$.grid"), "$.grid.dim");
    config.grid.extents = as_double_list(member(grid, "extents", "$.grid"), "$.grid.extents");
    config.grid.cells = as_int_list(member(grid, "cells", "$.grid"), "$.grid.cells");

    const json& motility = member(root, "motility", "$");
    check_keys(motility, {"family", "parameters"}, "$.motility");
    config.motility.family = as_string(member(motility, "family", "$.motility"),
                                       "$.motility.family");
    config.motility.parameters = as_double_list(member(motility, "parameters", "$.motility"),
                                                "$.motility.parameters");

    config.u0 = parse_initial(member(root, "u0", "$"), "$.u0");
    config.v0 = parse_initial(member(root, "v0", "$"), "$.v0");
    config.epsilon = as_double(member(root, "epsilon", "$"), "$.epsilon");

    const json& time = member(root, "time", "$");
    check_keys(time, {"t_end", "dt", "safety"}, "$.time");
    config.time.t_end = as_double(member(time, "t_end", "$.time"), "$.time.t_end");
    const json& dt = member(time, "dt", "$.time");
    if (dt.is_string()) {
        if (dt.get<std::string>() != "auto") fail("$.time.dt", "expected a number or \"auto\"");
        config.time.auto_dt = true;
        config.time.dt = 0.0;
    } else {
        config.time.auto_dt = false;
        config.time.dt = as_double(dt, "$.time.dt");
    }
    if (time.contains("safety")) {
        config.time.safety = as_double(time["safety"], "$.time.safety");
    }

    if (root.contains("solver")) {
        const json& solver = root["solver"];
        check_keys(solver, {"tol", "max_iters"}, "$.solver");
        if (solver.contains("tol")) {
            config.solver.solver_tol = as_double(solver["tol"], "$.solver.tol");
        }
        if (solver.contains("max_iters")) {
            config.solver.max_iters = as_int(solver["max_iters"], "$.solver.max_iters");
        }
    }

    if (root.contains("diagnostics")) {
        const json& diag = root["diagnostics"];
        check_keys(diag, {"cadence", "p_list", "weighted", "weighted_p"}, "$.diagnostics");
        if (diag.contains("cadence")) {
            config.diagnostics.cadence = as_int64(diag["cadence"], "$.diagnostics.cadence");
        }
        if (diag.contains("p_list")) {
            config.diagnostics.p_list = as_double_list(diag["p_list"], "$.diagnostics.p_list");
        }
        if (diag.contains("weighted")) {
            config.diagnostics.weighted = as_bool(diag["weighted"], "$.diagnostics.weighted");
        }
        if (diag.contains("weighted_p")) {
            config.diagnostics.weighted_p =
                as_double(diag["weighted_p"], "$.diagnostics.weighted_p");
        }
    }

    if (root.contains("output")) {
        const json& output = root["output"];
        check_keys(output, {"directory", "snapshot_cadence", "csv", "snapshots"}, "$.output");
        if (output.contains("directory")) {
            config.output.directory = as_string(output["directory"], "$.output.directory");
        }
        if (output.contains("snapshot_cadence")) {
            config.output.snapshot_cadence =
                as_int64(output["snapshot_cadence"], "$.output.snapshot_cadence");
        }
        if (output.contains("csv")) {
            config.output.write_csv = as_bool(output["csv"], "$.output.csv");
        }
        if (output.contains("snapshots")) {
            config.output.write_snapshots = as_bool(output["snapshots"], "$.output.snapshots");
        }
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string serialize_run_config(const RunConfig& config) {
    ordered_json root;
    root["grid"] = {{"dim", config.grid.dim},
                    {"extents", config.grid.extents},
                    {"cells", config.grid.cells}};
    root["motility"] = {{"family", config.motility.family},
                        {"parameters", config.motility.parameters}};
    root["u0"] = dump_initial(config.u0);
    root["v0"] = dump_initial(config.v0);
    root["epsilon"] = config.epsilon;
    ordered_json time;
    time["t_end"] = config.time.t_end;
    if (config.time.auto_dt) {
        time["dt"] = "auto";
    } else {
        time["dt"] = config.time.dt;
    }
    time["safety"] = config.time.safety;
    root["time"] = time;
    root["solver"] = {{"tol", config.solver.solver_tol}, {"max_iters", config.solver.max_iters}};
    root["diagnostics"] = {{"cadence", config.diagnostics.cadence},
                           {"p_list", config.diagnostics.p_list},
                           {"weighted", config.diagnostics.weighted},
                           {"weighted_p", config.diagnostics.weighted_p}};
    root["output"] = {{"directory", config.output.directory},
                      {"snapshot_cadence", config.output.snapshot_cadence},
                      {"csv", config.output.write_csv},
                      {"snapshots", config.output.write_snapshots}};
    return root.dump(2) + "\n";
}

MaterializedRun materialize(const RunConfig& config) {
    const Grid grid = build_grid(config.grid.dim, config.grid.extents, config.grid.cells);
    MotilitySpec motility = make_motility(config.motility.family, config.motility.parameters);
    Field u0 = make_initial_data(grid, config.u0);
    Field v0 = make_initial_data(grid, config.v0);

    MaterializedRun run;
    run.problem =
        make_problem(grid, std::move(motility), std::move(u0), std::move(v0), config.epsilon);

    if (!(config.time.t_end > 0.0) || !std::isfinite(config.time.t_end)) {
        throw std::invalid_argument("config: $.time.t_end must be positive and finite");
    }
    run.t_end = config.time.t_end;
    run.step_params.epsilon = config.epsilon;
    run.step_params.solver_tol = config.solver.solver_tol;
    run.step_params.max_iters = config.solver.max_iters;
    if (config.time.auto_dt) {
        if (!(config.time.safety > 0.0) || config.time.safety > 1.0) {
            throw std::invalid_argument("config: $.time.safety must lie in (0, 1]");
        }
        run.step_params.dt = suggest_dt(run.problem, config.time.safety);
    } else {
        if (!(config.time.dt > 0.0) || !std::isfinite(config.time.dt)) {
            throw std::invalid_argument("config: $.time.dt must be positive and finite");
        }
        run.step_params.dt = config.time.dt;
    }
    if (!(run.step_params.solver_tol > 0.0) || run.step_params.solver_tol > 1e-6) {
        throw std::invalid_argument("config: $.solver.tol must lie in (0, 1e-6]");
    }
    if (run.step_params.max_iters < 0) {
        throw std::invalid_argument("config: $.solver.max_iters must be >= 0");
    }
    if (config.diagnostics.cadence < 1) {
        throw std::invalid_argument("config: $.diagnostics.cadence must be >= 1");
    }
    for (double p : config.diagnostics.p_list) {
        if (!(p > 1.0) || !std::isfinite(p)) {
            throw std::invalid_argument("config: $.diagnostics.p_list entries must exceed 1");
        }
    }
    if (config.output.snapshot_cadence < 0) {
        throw std::invalid_argument("config: $.output.snapshot_cadence must be >= 0");
    }
    if (config.output.directory.empty()) {
        throw std::invalid_argument("config: $.output.directory must not be empty");
    }
    return run;
}

std::filesystem::path resolve_output_directory(const OutputConfig& output) {
    std::filesystem::path dir(output.directory);
    if (dir.is_relative()) {
        if (const char* root = std::getenv("MOTLAB_OUTPUT_ROOT")) {
            return std::filesystem::path(root) / dir;
        }
    }
    return dir;
}

}  // namespace motlab
