#include "motlab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace motlab {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

double portable_unit(std::mt19937_64& gen) {
    // Explicit mapping instead of std::uniform_real_distribution: the engine
    // sequence is pinned by the standard, distribution internals are not.
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::array<std::int64_t, 3> decode(const Grid& grid, std::int64_t idx) {
    std::array<std::int64_t, 3> coord{0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
        coord[a] = idx / grid.strides[a];
        idx -= coord[a] * grid.strides[a];
    }
    return coord;
}

Field generate_bumps(const Grid& grid, const std::vector<BumpSpec>& bumps) {
    Field f = make_field(grid);
    for (const BumpSpec& bump : bumps) {
        require(bump.width > 0.0 && std::isfinite(bump.width),
                "make_initial_data: bump width must be positive");
        require(bump.amplitude >= 0.0 && std::isfinite(bump.amplitude),
                "make_initial_data: bump amplitude must be >= 0");
        for (int a = 0; a < grid.dim; ++a) {
            require(std::isfinite(bump.center[a]), "make_initial_data: bump center must be finite");
        }
    }
    for (std::int64_t idx = 0; idx < grid.total; ++idx) {
        const auto coord = decode(grid, idx);
        double acc = 0.0;
        for (const BumpSpec& bump : bumps) {
            double r2 = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                const double d = grid.center(a, static_cast<int>(coord[a])) - bump.center[a];
                r2 += d * d;
            }
            acc += bump.amplitude * std::exp(-r2 / (2.0 * bump.width * bump.width));
        }
        f[idx] = acc;
    }
    return f;
}

Field generate_random_smooth(const Grid& grid, const InitialDataSpec& spec) {
    require(spec.modes >= 0, "make_initial_data: random_smooth modes must be >= 0");
    require(spec.amplitude >= 0.0 && std::isfinite(spec.amplitude),
            "make_initial_data: random_smooth amplitude must be >= 0");
    require(spec.offset >= 0.0 && std::isfinite(spec.offset),
            "make_initial_data: random_smooth offset must be >= 0");
    const int m = spec.modes + 1;
    std::mt19937_64 gen(spec.seed);

    // Coefficients in lexicographic multi-index order (axis 0 major), decayed
    // by 1 / (1 + |k|^2) so the field stays smooth at any mode count.
    std::array<int, 3> kmax{1, 1, 1};
    int combos = 1;
    for (int a = 0; a < grid.dim; ++a) {
        kmax[a] = m;
        combos *= m;
    }
    std::vector<double> coeff(static_cast<std::size_t>(combos));
    for (int c = 0; c < combos; ++c) {
        int rest = c, k2 = 0;
        for (int a = grid.dim - 1; a >= 0; --a) {
            const int k = rest % kmax[a];
            rest /= kmax[a];
            k2 += k * k;
        }
        coeff[c] = (2.0 * portable_unit(gen) - 1.0) / (1.0 + k2);
    }

    // Per-axis tables cos(pi k x / L) at cell centers.
    std::array<std::vector<double>, 3> table;
    for (int a = 0; a < grid.dim; ++a) {
        table[a].resize(static_cast<std::size_t>(m) * grid.cells[a]);
        for (int k = 0; k < m; ++k) {
            for (int i = 0; i < grid.cells[a]; ++i) {
                table[a][static_cast<std::size_t>(k) * grid.cells[a] + i] =
                    std::cos(std::numbers::pi * k * grid.center(a, i) / grid.extents[a]);
            }
        }
    }

    Field f = make_field(grid);
    for (std::int64_t idx = 0; idx < grid.total; ++idx) {
        const auto coord = decode(grid, idx);
        double acc = 0.0;
        for (int c = 0; c < combos; ++c) {
            int rest = c;
            double prod = coeff[c];
            for (int a = grid.dim - 1; a >= 0; --a) {
                const int k = rest % kmax[a];
                rest /= kmax[a];
                prod *= table[a][static_cast<std::size_t>(k) * grid.cells[a] + coord[a]];
            }
            acc += prod;
        }
        f[idx] = acc;
    }
    double lo = f[0];
    for (double x : f) lo = std::min(lo, x);
    for (double& x : f) x = spec.amplitude * (x - lo) + spec.offset;
    return f;
}

}  // namespace

Field make_initial_data(const Grid& grid, const InitialDataSpec& spec) {
    Field f;
    if (spec.kind == "constant") {
        require(spec.value >= 0.0 && std::isfinite(spec.value),
                "make_initial_data: constant value must be >= 0");
        f = make_field(grid, spec.value);
    } else if (spec.kind == "gaussian") {
        require(spec.bumps.size() == 1, "make_initial_data: gaussian takes exactly one bump");
        f = generate_bumps(grid, spec.bumps);
    } else if (spec.kind == "bumps") {
        require(!spec.bumps.empty(), "make_initial_data: bumps needs at least one bump");
        f = generate_bumps(grid, spec.bumps);
    } else if (spec.kind == "random_smooth") {
        f = generate_random_smooth(grid, spec);
    } else {
        throw std::invalid_argument("make_initial_data: unknown kind '" + spec.kind + "'");
    }
    if (spec.mass.has_value()) {
        require(*spec.mass > 0.0 && std::isfinite(*spec.mass),
                "make_initial_data: mass target must be positive");
        const double current = integrate(grid, f);
        require(current > 0.0, "make_initial_data: cannot rescale a zero field to a mass target");
        const double scale = *spec.mass / current;
        for (double& x : f) x *= scale;
    }
    return f;
}

Field regularized_consumption(const Grid& grid, std::span<const double> u,
                              std::span<const double> v, double epsilon) {
    require(static_cast<std::int64_t>(u.size()) == grid.total &&
                static_cast<std::int64_t>(v.size()) == grid.total,
            "regularized_consumption: field sizes do not match the grid");
    require(epsilon >= 0.0 && std::isfinite(epsilon),
            "regularized_consumption: epsilon must be finite and >= 0");
    double sup_u = 0.0, sup_v = 0.0, min_u = 0.0, min_v = 0.0;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        sup_u = std::max(sup_u, std::abs(u[i]));
        sup_v = std::max(sup_v, std::abs(v[i]));
        min_u = std::min(min_u, u[i]);
        min_v = std::min(min_v, v[i]);
    }
    require(min_u >= -1e-13 * (1.0 + sup_u) && min_v >= -1e-13 * (1.0 + sup_v),
            "regularized_consumption: input values must be nonnegative");
    Field out = make_field(grid);
    for (std::int64_t i = 0; i < grid.total; ++i) {
        out[i] = u[i] * v[i] / (1.0 + epsilon * u[i]);
    }
    return out;
}

ProblemSpec make_problem(Grid grid, MotilitySpec motility, Field u0, Field v0, double epsilon) {
    require(static_cast<std::int64_t>(u0.size()) == grid.total &&
                static_cast<std::int64_t>(v0.size()) == grid.total,
            "make_problem: initial data sizes do not match the grid");
    require(epsilon >= 0.0 && std::isfinite(epsilon),
            "make_problem: epsilon must be finite and >= 0");
    for (double x : u0) {
        require(std::isfinite(x) && x >= 0.0, "make_problem: u0 must be finite and >= 0");
    }
    for (double x : v0) {
        require(std::isfinite(x) && x >= 0.0, "make_problem: v0 must be finite and >= 0");
    }
    require(integrate(grid, u0) > 0.0, "make_problem: u0 must carry positive mass");
    ProblemSpec spec;
    spec.grid = grid;
    spec.motility = std::move(motility);
    spec.u0 = std::move(u0);
    spec.v0 = std::move(v0);
    spec.epsilon = epsilon;
    return spec;
}

}  // namespace motlab
