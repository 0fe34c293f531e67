#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "motlab/grid.hpp"
#include "motlab/motility.hpp"

namespace motlab {

struct BumpSpec {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 0.0;
    double amplitude = 0.0;

    bool operator==(const BumpSpec&) const = default;
};

/// Declarative nonnegative initial-data generator.
///
/// Kinds:
///   constant       value
///   gaussian       bumps[0] = {center, width, amplitude}
///   bumps          sum of gaussians
///   random_smooth  truncated cosine series, seeded; shifted so min = 0,
///                  then scaled by `amplitude` and lifted by `offset`
/// Any kind accepts an optional `mass` target: the field is rescaled so its
/// discrete integral equals it (requires a positive integral to scale).
struct InitialDataSpec {
    std::string kind = "constant";
    double value = 0.0;                 // constant
    std::vector<BumpSpec> bumps;        // gaussian / bumps
    std::uint64_t seed = 0;             // random_smooth
    int modes = 0;                      // random_smooth: max cosine mode per axis
    double amplitude = 1.0;             // random_smooth
    double offset = 0.0;                // random_smooth
    std::optional<double> mass;

    bool operator==(const InitialDataSpec&) const = default;
};

Field make_initial_data(const Grid& grid, const InitialDataSpec& spec);

/// Cellwise regularized consumption u v / (1 + eps u).  Rejects mismatched
/// shapes, negative eps and genuinely negative input values (a tolerance of
/// 1e-13 * (1 + sup|f|) absorbs roundoff dust from upstream solves).
Field regularized_consumption(const Grid& grid, std::span<const double> u,
                              std::span<const double> v, double epsilon);

/// Full problem statement for the consumption system with motility phi:
///   u_t = Lap(u phi(v)),   v_t = Lap(v) - u v / (1 + eps u),  no-flux walls.
struct ProblemSpec {
    Grid grid;
    MotilitySpec motility;
    Field u0;
    Field v0;
    double epsilon = 0.0;
};

/// Validates shapes, nonnegativity of the data, positivity of the starting
/// mass and eps >= 0.  Throws std::invalid_argument on violations.
ProblemSpec make_problem(Grid grid, MotilitySpec motility, Field u0, Field v0, double epsilon);

}  // namespace motlab
