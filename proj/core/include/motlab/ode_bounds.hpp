#pragma once

#include <cstdint>
#include <vector>

namespace motlab {

/// The three comparison lemmas the a priori estimates lean on, stated as
/// checkable bounds on scalar ODEs:
///   linear_damping      y' + a y <= h,  all unit-window integrals of h <= b
///                       ==>  y(t) <= y(0) + b / (1 - e^{-a})
///   superlinear_growth  y' + a y^l <= h y, same window condition, y > 0
///                       ==>  y(t) <= max{y(0) e^b, (a(l-1))^{-1/(l-1)} e^b}
///   superlinear_decay   y' + a y^l <= b
///                       ==>  y(t) <= (b/a)^{1/l} + (a(l-1))^{-1/(l-1)} (t-t0)^{-1/(l-1)}
enum class OdeLemma { linear_damping, superlinear_growth, superlinear_decay };

struct OdeBoundProblem {
    OdeLemma lemma = OdeLemma::linear_damping;
    double a = 1.0;
    double b = 1.0;
    double lambda = 2.0;  // superlinear lemmas only, > 1
    double y0 = 0.0;
    double t0 = 0.0;      // decay lemma only
    double horizon = 5.0;
};

double bound_linear_damping(double y0, double a, double b);
double bound_superlinear(double y0, double a, double b, double lambda);
double bound_superlinear_decay(double a, double b, double lambda, double elapsed);

/// Forcing used by the verifier for the window-conditioned lemmas.
enum class ForcingKind {
    randomized,           // nonnegative piecewise-constant draws, rescaled so
                          // the worst unit-window integral saturates b
    constant_saturating,  // h == b
    zero,                 // h == 0
};

struct VerifyOptions {
    int n_steps = 2000;  // base RK4 grid, >= 1000
    std::uint64_t seed = 0;
    ForcingKind forcing = ForcingKind::randomized;
    double margin = 1e-6;  // pass iff y - bound <= margin * (1 + bound) on the grid
};

struct VerifyOutcome {
    bool pass = false;
    double max_excess = 0.0;  // max over the grid of y - bound (negative = slack)
    double worst_time = 0.0;
    double worst_bound = 0.0;
    double y_final = 0.0;
};

/// Integrates the EQUALITY dynamics of the lemma (inequalities replaced by
/// equalities, which explores the bound's tightest admissible trajectory)
/// with classical RK4 on a uniform base grid; stiff segments are resolved by
/// stability-driven substeps aligned to the forcing's piece boundaries.
VerifyOutcome verify_bound(const OdeBoundProblem& problem, const VerifyOptions& options);

struct SuiteEntry {
    std::uint64_t seed = 0;
    OdeLemma lemma = OdeLemma::linear_damping;
    OdeBoundProblem problem;
    VerifyOutcome outcome;
};

/// One randomized problem per lemma per seed in [seed_begin, seed_end]:
/// a, b log-uniform in [0.1, 10], lambda in (1, 4], y0 in [0, 100) (kept
/// strictly positive for the growth lemma), horizon 5.
std::vector<SuiteEntry> verify_suite(std::uint64_t seed_begin, std::uint64_t seed_end,
                                     const VerifyOptions& base_options);

const char* ode_lemma_name(OdeLemma lemma);

}  // namespace motlab
