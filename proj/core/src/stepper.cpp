#include "motlab/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motlab/linsolve.hpp"

namespace motlab {

namespace {

struct Workspace {
    Field d, ds, b, x, r, p, ap, tmp, lap;

    explicit Workspace(const Grid& grid)
        : d(make_field(grid)), ds(make_field(grid)), b(make_field(grid)), x(make_field(grid)),
          r(make_field(grid)), p(make_field(grid)), ap(make_field(grid)), tmp(make_field(grid)),
          lap(make_field(grid)) {}
};

void validate_params(const StepParams& params) {
    if (!(params.dt > 0.0) || !std::isfinite(params.dt)) {
        throw std::invalid_argument("step: dt must be positive and finite");
    }
    if (!(params.solver_tol > 0.0) || params.solver_tol > 1e-6) {
        throw std::invalid_argument("step: solver_tol must lie in (0, 1e-6]");
    }
    if (!(params.epsilon >= 0.0) || !std::isfinite(params.epsilon)) {
        throw std::invalid_argument("step: epsilon must be finite and >= 0");
    }
    if (params.max_iters < 0) {
        throw std::invalid_argument("step: max_iters must be >= 0");
    }
}

void check_finite(const Field& f, const char* what, double t) {
    for (double x : f) {
        if (!std::isfinite(x)) {
            throw SolverError(std::string("step: non-finite value in ") + what + " at t = " +
                              std::to_string(t));
        }
    }
}

StepStats step_with_workspace(SimState& state, const MotilitySpec& phi, const StepParams& params,
                              Workspace& ws) {
    const Grid& grid = state.grid;
    const std::int64_t n = grid.total;
    const double dt = params.dt;
    const int max_iters =
        params.max_iters > 0 ? params.max_iters : static_cast<int>(10 * grid.total);
    StepStats stats;

    // --- Stage 1: (I - dt L D) u = u^n, D = diag(phi(v^n)) ----------------
    // Similarity transform w = D^{1/2} u turns the system SPD:
    //   (I - dt D^{1/2} L D^{1/2}) w = D^{1/2} u^n.
    for (std::int64_t i = 0; i < n; ++i) {
        const double di = phi.value(state.v[i]);
        if (!(di > 0.0) || !std::isfinite(di)) {
            throw SolverError("step: motility evaluated nonpositive at t = " +
                              std::to_string(state.t) + " (signal outside certified range?)");
        }
        ws.d[i] = di;
        ws.ds[i] = std::sqrt(di);
    }
    for (std::int64_t i = 0; i < n; ++i) ws.b[i] = ws.ds[i] * state.u[i];
    for (std::int64_t i = 0; i < n; ++i) ws.x[i] = ws.b[i];  // warm start at u^n

    auto apply_u = [&](std::span<const double> in, std::span<double> out) {
        for (std::int64_t i = 0; i < n; ++i) ws.tmp[i] = ws.ds[i] * in[i];
        neumann_laplacian(grid, ws.tmp, ws.lap);
        for (std::int64_t i = 0; i < n; ++i) out[i] = in[i] - dt * ws.ds[i] * ws.lap[i];
    };
    const CgResult cg_u = conjugate_gradient(apply_u, ws.b, std::span<double>(ws.x),
                                             params.solver_tol, max_iters, ws.r, ws.p, ws.ap);
    stats.u_iterations = cg_u.iterations;
    stats.u_residual = cg_u.rel_residual;
    if (!cg_u.converged) {
        throw SolverError("step: u-stage CG failed (relative residual " +
                          std::to_string(cg_u.rel_residual) + " after " +
                          std::to_string(cg_u.iterations) + " iterations, tol " +
                          std::to_string(params.solver_tol) + ")");
    }

    // Finalize in flux form: with g = D u~ = D^{1/2} w, set u+ = u^n + dt L g.
    // The update's cell sum telescopes exactly, so conserved mass does not
    // inherit the Krylov residual.
    for (std::int64_t i = 0; i < n; ++i) ws.tmp[i] = ws.ds[i] * ws.x[i];
    neumann_laplacian(grid, ws.tmp, ws.lap);
    for (std::int64_t i = 0; i < n; ++i) state.u[i] += dt * ws.lap[i];
    check_finite(state.u, "u", state.t);

    // --- Stage 2: (I - dt L + dt diag(u+/(1 + eps u+))) v = v^n -----------
    for (std::int64_t i = 0; i < n; ++i) {
        ws.d[i] = state.u[i] / (1.0 + params.epsilon * state.u[i]);
    }
    for (std::int64_t i = 0; i < n; ++i) ws.b[i] = state.v[i];
    for (std::int64_t i = 0; i < n; ++i) ws.x[i] = state.v[i];  // warm start at v^n

    auto apply_v = [&](std::span<const double> in, std::span<double> out) {
        neumann_laplacian(grid, in, ws.lap);
        for (std::int64_t i = 0; i < n; ++i) {
            out[i] = in[i] - dt * ws.lap[i] + dt * ws.d[i] * in[i];
        }
    };
    const CgResult cg_v = conjugate_gradient(apply_v, ws.b, std::span<double>(ws.x),
                                             params.solver_tol, max_iters, ws.r, ws.p, ws.ap);
    stats.v_iterations = cg_v.iterations;
    stats.v_residual = cg_v.rel_residual;
    if (!cg_v.converged) {
        throw SolverError("step: v-stage CG failed (relative residual " +
                          std::to_string(cg_v.rel_residual) + " after " +
                          std::to_string(cg_v.iterations) + " iterations, tol " +
                          std::to_string(params.solver_tol) + ")");
    }
    std::copy(ws.x.begin(), ws.x.end(), state.v.begin());
    check_finite(state.v, "v", state.t);

    state.t += dt;
    return stats;
}

void validate_state(const SimState& state) {
    if (state.grid.total <= 0) {
        throw std::invalid_argument("step: state has an empty grid");
    }
    if (static_cast<std::int64_t>(state.u.size()) != state.grid.total ||
        static_cast<std::int64_t>(state.v.size()) != state.grid.total) {
        throw std::invalid_argument("step: state field sizes do not match the grid");
    }
    check_finite(state.u, "u (input)", state.t);
    check_finite(state.v, "v (input)", state.t);
}

}  // namespace

SimState make_state(const ProblemSpec& problem) {
    SimState state;
    state.grid = problem.grid;
    state.u = problem.u0;
    state.v = problem.v0;
    state.t = 0.0;
    return state;
}

StepStats step(SimState& state, const MotilitySpec& phi, const StepParams& params) {
    validate_params(params);
    validate_state(state);
    Workspace ws(state.grid);
    return step_with_workspace(state, phi, params, ws);
}

double suggest_dt(const ProblemSpec& problem, double safety) {
    if (!(safety > 0.0) || !std::isfinite(safety)) {
        throw std::invalid_argument("suggest_dt: safety must be positive and finite");
    }
    double sup_u = 0.0, sup_v = 0.0;
    for (double x : problem.u0) sup_u = std::max(sup_u, x);
    for (double x : problem.v0) sup_v = std::max(sup_v, x);
    const MotilityBounds bounds = certify_bounds(problem.motility, sup_v);
    double h_min = problem.grid.spacing[0];
    for (int a = 1; a < problem.grid.dim; ++a) h_min = std::min(h_min, problem.grid.spacing[a]);
    const double diffusive = h_min * h_min / (2.0 * problem.grid.dim * bounds.c2);
    const double reactive = 1.0 / (sup_u * sup_v + 1.0);
    return safety * std::min(diffusive, reactive);
}

std::int64_t plan_steps(double t_end, double dt) {
    if (!(t_end > 0.0) || !std::isfinite(t_end) || !(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("plan_steps: t_end and dt must be positive and finite");
    }
    const auto steps = static_cast<std::int64_t>(std::ceil(t_end / dt - 1e-9));
    return std::max<std::int64_t>(steps, 1);
}

RunSummary run(SimState state, const MotilitySpec& phi, const StepParams& params, double t_end,
               const StepObserver& observer) {
    validate_params(params);
    validate_state(state);
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument("run: t_end must be positive and finite");
    }
    const double t_start = state.t;
    const std::int64_t n_steps = plan_steps(t_end, params.dt);

    Workspace ws(state.grid);
    if (observer) observer(state, 0);
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        step_with_workspace(state, phi, params, ws);
        state.t = t_start + static_cast<double>(k) * params.dt;
        if (observer) observer(state, k);
    }
    RunSummary summary;
    summary.steps = n_steps;
    summary.final_state = std::move(state);
    return summary;
}

Trajectory run_recorded(const ProblemSpec& problem, double t_end, const StepParams& params,
                        std::int64_t cadence) {
    if (cadence < 1) {
        throw std::invalid_argument("run_recorded: cadence must be >= 1");
    }
    Trajectory traj;
    traj.grid = problem.grid;
    traj.epsilon = problem.epsilon;
    StepParams effective = params;
    effective.epsilon = problem.epsilon;
    RunSummary summary = run(make_state(problem), problem.motility, effective, t_end,
                             [&](const SimState& s, std::int64_t k) {
                                 if (k % cadence == 0) {
                                     traj.times.push_back(s.t);
                                     traj.u.push_back(s.u);
                                     traj.v.push_back(s.v);
                                 }
                             });
    traj.final_state = std::move(summary.final_state);
    return traj;
}

}  // namespace motlab
