#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "motlab/diagnostics.hpp"
#include "motlab/grid.hpp"
#include "motlab/motility.hpp"
#include "motlab/problem.hpp"
#include "motlab/stepper.hpp"

namespace {

using namespace motlab;

Grid square_grid(int n) {
    const std::vector<double> extents = {1.0, 1.0};
    const std::vector<int> cells = {n, n};
    return build_grid(2, extents, cells);
}

Field bump_field(const Grid& grid, double mass) {
    InitialDataSpec spec;
    spec.kind = "gaussian";
    spec.bumps = {BumpSpec{{0.4, 0.6, 0.0}, 0.15, 1.0}};
    spec.mass = mass;
    return make_initial_data(grid, spec);
}

void BM_NeumannLaplacian(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const Field f = bump_field(grid, 1.0);
    Field out = make_field(grid);
    for (auto _ : state) {
        neumann_laplacian(grid, f, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.total);
}

void BM_GradientSq(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const Field f = bump_field(grid, 1.0);
    Field out = make_field(grid);
    for (auto _ : state) {
        gradient_sq(grid, f, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.total);
}

void BM_Integrate(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const Field f = bump_field(grid, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(grid, f));
    }
    state.SetItemsProcessed(state.iterations() * grid.total);
}

void BM_ApplyAInvSqrt(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const Field f = bump_field(grid, 1.0);
    Field out = make_field(grid);
    for (auto _ : state) {
        apply_A_inv_sqrt(grid, f, out);
        benchmark::DoNotOptimize(out.data());
    }
}

// One full IMEX step: the implicit u-stage (flux form) and the implicit
// v-stage, both solved by CG at tol 1e-11.  The state evolves across
// iterations, which matches the in-run cost profile.
void BM_FullStep(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const MotilitySpec phi = make_motility("exp_decay", {1.0, 0.5});
    ProblemSpec problem =
        make_problem(grid, phi, bump_field(grid, 1.0), make_field(grid, 1.0), 0.1);
    SimState sim = make_state(problem);
    const StepParams params{1e-3, problem.epsilon, 1e-11, 0};
    for (auto _ : state) {
        step(sim, phi, params);
        benchmark::DoNotOptimize(sim.u.data());
    }
}

void BM_DiagnosticsRecord(benchmark::State& state) {
    const Grid grid = square_grid(static_cast<int>(state.range(0)));
    const MotilitySpec phi = make_motility("exp_decay", {1.0, 0.5});
    const Field u = bump_field(grid, 1.0);
    const Field v = make_field(grid, 1.0);
    DiagnosticsConfig config;
    config.p_list = {2.0, 3.0};
    const double u0_mean = integrate(grid, u) / grid.volume;
    for (auto _ : state) {
        DiagnosticsRecord record =
            compute_record(grid, u, v, 0.0, config, u0_mean, std::nullopt, nullptr, 0.0);
        benchmark::DoNotOptimize(record.dual_norm_sq);
    }
}

}  // namespace

BENCHMARK(BM_NeumannLaplacian)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_GradientSq)->Arg(64)->Arg(256);
BENCHMARK(BM_Integrate)->Arg(64)->Arg(256);
BENCHMARK(BM_ApplyAInvSqrt)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_FullStep)->Arg(32)->Arg(64);
BENCHMARK(BM_DiagnosticsRecord)->Arg(64);

BENCHMARK_MAIN();
