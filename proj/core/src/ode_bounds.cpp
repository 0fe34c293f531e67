#include "motlab/ode_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace motlab {

namespace {

constexpr double kPieceLength = 0.1;

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

double portable_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

struct Forcing {
    double origin = 0.0;
    std::vector<double> pieces;  // constant on [origin + k h, origin + (k+1) h)

    double at(double t) const {
        if (pieces.empty()) return 0.0;
        auto idx = static_cast<std::int64_t>(std::floor((t - origin) / kPieceLength));
        idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(pieces.size()) - 1);
        return pieces[static_cast<std::size_t>(idx)];
    }
};

// Largest sliding unit-window integral of a piecewise-constant nonnegative
// forcing.  The window integral is piecewise linear in the window position,
// so scanning piece breakpoints (and the horizon) is exact.
double max_window_integral(const Forcing& forcing, double horizon) {
    const std::size_t count = forcing.pieces.size();
    double best = 0.0;
    auto window_at = [&](double t) {
        const double lo = std::max(t - 1.0, forcing.origin);
        double acc = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const double p0 = forcing.origin + static_cast<double>(k) * kPieceLength;
            const double p1 = p0 + kPieceLength;
            const double a = std::max(p0, lo), b = std::min(p1, t);
            if (b > a) acc += (b - a) * forcing.pieces[k];
        }
        return acc;
    };
    for (std::size_t k = 1; k <= count; ++k) {
        const double t = std::min(forcing.origin + static_cast<double>(k) * kPieceLength, horizon);
        best = std::max(best, window_at(t));
        if (t >= horizon) break;
    }
    best = std::max(best, window_at(horizon));
    return best;
}

Forcing build_forcing(const OdeBoundProblem& problem, const VerifyOptions& options,
                      double t_begin) {
    Forcing forcing;
    forcing.origin = t_begin;
    if (problem.lemma == OdeLemma::superlinear_decay) return forcing;  // constant b instead
    const auto count = static_cast<std::size_t>(
        std::ceil((problem.horizon - t_begin) / kPieceLength - 1e-12));
    forcing.pieces.assign(std::max<std::size_t>(count, 1), 0.0);
    switch (options.forcing) {
        case ForcingKind::zero:
            break;
        case ForcingKind::constant_saturating:
            std::fill(forcing.pieces.begin(), forcing.pieces.end(), problem.b);
            break;
        case ForcingKind::randomized: {
            std::mt19937_64 gen(options.seed);
            for (double& g : forcing.pieces) g = portable_unit(gen);
            const double worst = max_window_integral(forcing, problem.horizon);
            const double scale = worst > 0.0 ? problem.b / worst : 0.0;
            for (double& g : forcing.pieces) g *= scale;  // saturate the constraint
            break;
        }
    }
    return forcing;
}

}  // namespace

double bound_linear_damping(double y0, double a, double b) {
    require(std::isfinite(y0) && y0 >= 0.0, "bound_linear_damping: y0 must be >= 0");
    require(std::isfinite(a) && a > 0.0, "bound_linear_damping: a must be > 0");
    require(std::isfinite(b) && b >= 0.0, "bound_linear_damping: b must be >= 0");
    return y0 + b / (-std::expm1(-a));
}

double bound_superlinear(double y0, double a, double b, double lambda) {
    require(std::isfinite(y0) && y0 > 0.0, "bound_superlinear: y0 must be > 0");
    require(std::isfinite(a) && a > 0.0, "bound_superlinear: a must be > 0");
    require(std::isfinite(b) && b >= 0.0, "bound_superlinear: b must be >= 0");
    require(std::isfinite(lambda) && lambda > 1.0, "bound_superlinear: lambda must exceed 1");
    const double eb = std::exp(b);
    const double plateau = std::pow(a * (lambda - 1.0), -1.0 / (lambda - 1.0));
    return std::max(y0 * eb, plateau * eb);
}

double bound_superlinear_decay(double a, double b, double lambda, double elapsed) {
    require(std::isfinite(a) && a > 0.0, "bound_superlinear_decay: a must be > 0");
    require(std::isfinite(b) && b >= 0.0, "bound_superlinear_decay: b must be >= 0");
    require(std::isfinite(lambda) && lambda > 1.0, "bound_superlinear_decay: lambda must exceed 1");
    require(std::isfinite(elapsed) && elapsed > 0.0,
            "bound_superlinear_decay: elapsed time must be > 0");
    return std::pow(b / a, 1.0 / lambda) +
           std::pow(a * (lambda - 1.0), -1.0 / (lambda - 1.0)) *
               std::pow(elapsed, -1.0 / (lambda - 1.0));
}

VerifyOutcome verify_bound(const OdeBoundProblem& problem, const VerifyOptions& options) {
    require(std::isfinite(problem.a) && problem.a > 0.0, "verify_bound: a must be > 0");
    require(std::isfinite(problem.b) && problem.b >= 0.0, "verify_bound: b must be >= 0");
    require(std::isfinite(problem.y0) && problem.y0 >= 0.0, "verify_bound: y0 must be >= 0");
    if (problem.lemma != OdeLemma::linear_damping) {
        require(std::isfinite(problem.lambda) && problem.lambda > 1.0,
                "verify_bound: lambda must exceed 1");
    }
    if (problem.lemma == OdeLemma::superlinear_growth) {
        require(problem.y0 > 0.0, "verify_bound: superlinear_growth needs y0 > 0");
    }
    require(options.n_steps >= 1000, "verify_bound: n_steps must be >= 1000");
    require(options.margin > 0.0, "verify_bound: margin must be > 0");
    const double t_begin = problem.lemma == OdeLemma::superlinear_decay ? problem.t0 : 0.0;
    require(std::isfinite(problem.horizon) && problem.horizon > t_begin,
            "verify_bound: horizon must exceed the starting time");

    const Forcing forcing = build_forcing(problem, options, t_begin);
    const double lam = problem.lambda;
    const double a = problem.a;
    auto rhs = [&](double y, double h) {
        const double yc = std::max(y, 0.0);
        switch (problem.lemma) {
            case OdeLemma::linear_damping: return -a * y + h;
            case OdeLemma::superlinear_growth: return -a * std::pow(yc, lam) + h * y;
            case OdeLemma::superlinear_decay: return -a * std::pow(yc, lam) + problem.b;
        }
        return 0.0;
    };
    auto stiffness = [&](double y, double h) {
        const double yc = std::max(y, 0.0);
        switch (problem.lemma) {
            case OdeLemma::linear_damping: return a + h;
            case OdeLemma::superlinear_growth:
                return a * lam * std::pow(yc, lam - 1.0) + std::abs(h);
            case OdeLemma::superlinear_decay: return a * lam * std::pow(yc, lam - 1.0);
        }
        return 0.0;
    };
    auto bound_at = [&](double t) {
        switch (problem.lemma) {
            case OdeLemma::linear_damping:
                return bound_linear_damping(problem.y0, a, problem.b);
            case OdeLemma::superlinear_growth:
                return bound_superlinear(problem.y0, a, problem.b, lam);
            case OdeLemma::superlinear_decay:
                return bound_superlinear_decay(a, problem.b, lam, t - problem.t0);
        }
        return 0.0;
    };

    const double base_dt = (problem.horizon - t_begin) / options.n_steps;
    VerifyOutcome outcome;
    outcome.pass = true;
    outcome.max_excess = -std::numeric_limits<double>::infinity();
    double y = problem.y0;
    std::int64_t substeps = 0;
    for (int k = 0; k <= options.n_steps; ++k) {
        const double t_grid = t_begin + static_cast<double>(k) * base_dt;
        if (k > 0 || problem.lemma != OdeLemma::superlinear_decay) {
            const double bound = bound_at(t_grid);
            const double excess = y - bound;
            if (excess > outcome.max_excess) {
                outcome.max_excess = excess;
                outcome.worst_time = t_grid;
                outcome.worst_bound = bound;
            }
            if (excess > options.margin * (1.0 + bound)) outcome.pass = false;
        }
        if (k == options.n_steps) break;

        // Advance to the next base grid point with stability-limited substeps
        // that never straddle a forcing breakpoint.
        const double t_next = t_begin + static_cast<double>(k + 1) * base_dt;
        double t = t_grid;
        while (t < t_next - 1e-14 * problem.horizon) {
            double dt = std::min(t_next - t, 0.5 / (1.0 + stiffness(y, forcing.at(t))));
            if (!forcing.pieces.empty()) {
                const double piece = std::floor((t - forcing.origin) / kPieceLength + 1e-9);
                double boundary = forcing.origin + (piece + 1.0) * kPieceLength;
                if (boundary - t < 1e-12) boundary += kPieceLength;
                dt = std::min(dt, boundary - t);
            }
            const double h = forcing.at(t + 0.5 * dt);
            const double k1 = rhs(y, h);
            const double k2 = rhs(y + 0.5 * dt * k1, h);
            const double k3 = rhs(y + 0.5 * dt * k2, h);
            const double k4 = rhs(y + dt * k3, h);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
            if (!std::isfinite(y)) {
                throw std::runtime_error("verify_bound: integrator produced a non-finite value");
            }
            if (++substeps > 100'000'000) {
                throw std::runtime_error("verify_bound: substep budget exhausted");
            }
        }
    }
    outcome.y_final = y;
    return outcome;
}

const char* ode_lemma_name(OdeLemma lemma) {
    switch (lemma) {
        case OdeLemma::linear_damping: return "linear_damping";
        case OdeLemma::superlinear_growth: return "superlinear_growth";
        case OdeLemma::superlinear_decay: return "superlinear_decay";
    }
    throw std::logic_error("ode_lemma_name: unknown lemma");
}

std::vector<SuiteEntry> verify_suite(std::uint64_t seed_begin, std::uint64_t seed_end,
                                     const VerifyOptions& base_options) {
    require(seed_end >= seed_begin, "verify_suite: empty seed range");
    std::vector<SuiteEntry> entries;
    entries.reserve(3 * (seed_end - seed_begin + 1));
    for (std::uint64_t seed = seed_begin; seed <= seed_end; ++seed) {
        std::mt19937_64 gen(seed);
        for (OdeLemma lemma : {OdeLemma::linear_damping, OdeLemma::superlinear_growth,
                               OdeLemma::superlinear_decay}) {
            SuiteEntry entry;
            entry.seed = seed;
            entry.lemma = lemma;
            entry.problem.lemma = lemma;
            entry.problem.a = 0.1 * std::exp(portable_unit(gen) * std::log(100.0));
            entry.problem.b = 0.1 * std::exp(portable_unit(gen) * std::log(100.0));
            entry.problem.lambda = 1.0 + 3.0 * (1.0 - portable_unit(gen));
            entry.problem.y0 = 100.0 * portable_unit(gen);
            if (lemma == OdeLemma::superlinear_growth) {
                entry.problem.y0 = std::max(entry.problem.y0, 1e-6);
            }
            entry.problem.t0 = 0.0;
            entry.problem.horizon = 5.0;
            VerifyOptions options = base_options;
            options.seed = seed * 3 + static_cast<std::uint64_t>(lemma);
            entry.outcome = verify_bound(entry.problem, options);
            entries.push_back(std::move(entry));
        }
    }
    return entries;
}

}  // namespace motlab
