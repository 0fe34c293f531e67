#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "motlab/grid.hpp"
#include "motlab/motility.hpp"
#include "motlab/problem.hpp"

namespace motlab {

/// Raised when a linear stage fails to reach its residual tolerance or a
/// state stops being finite.  The harness maps it to exit code 3.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimState {
    Grid grid;
    Field u;
    Field v;
    double t = 0.0;
};

SimState make_state(const ProblemSpec& problem);

struct StepParams {
    double dt = 0.0;
    double epsilon = 0.0;
    double solver_tol = 1e-11;  // relative residual for both linear stages
    int max_iters = 0;          // 0: defaults to 10x the cell count
};

struct StepStats {
    int u_iterations = 0;
    int v_iterations = 0;
    double u_residual = 0.0;
    double v_residual = 0.0;
};

/// One IMEX step of the regularized system.  Stage 1 solves the backward
/// Euler u-system (I - dt L D) u = u^n with D = diag(phi(v^n)) via CG on the
/// D^{1/2}-symmetrized form, then finalizes u+ = u^n + dt L(D u~) so the
/// discrete mass change is an exactly telescoping flux sum.  Stage 2 solves
/// the SPD v-system (I - dt L + dt diag(u+/(1+eps u+))) v = v^n.  Both system
/// matrices are M-matrices, which is what preserves positivity and the
/// sup-norm monotonicity of v without any clamping.
StepStats step(SimState& state, const MotilitySpec& phi, const StepParams& params);

/// Stability-motivated step suggestion:
///   safety * min(h_min^2 / (2 dim c2), 1 / (sup u0 * sup v0 + 1))
/// with c2 certified on [0, sup v0].
double suggest_dt(const ProblemSpec& problem, double safety = 0.9);

struct RunSummary {
    std::int64_t steps = 0;
    SimState final_state;
};

/// Called with the state at step index 0 (initial data) and after every step.
using StepObserver = std::function<void(const SimState& state, std::int64_t step_index)>;

/// Number of fixed steps run() takes for a horizon: max(ceil(t_end/dt - 1e-9), 1).
std::int64_t plan_steps(double t_end, double dt);

/// Advances ceil(t_end / dt) fixed steps from state.t.  The observer sees
/// every step so cadence policies live with the caller.
RunSummary run(SimState state, const MotilitySpec& phi, const StepParams& params, double t_end,
               const StepObserver& observer = {});

/// Trajectory recorded at a uniform step cadence (always includes the initial
/// state; the final state is a record iff the step count is a cadence
/// multiple).
struct Trajectory {
    Grid grid;
    double epsilon = 0.0;
    std::vector<double> times;
    std::vector<Field> u;
    std::vector<Field> v;
    SimState final_state;
};

Trajectory run_recorded(const ProblemSpec& problem, double t_end, const StepParams& params,
                        std::int64_t cadence);

}  // namespace motlab
