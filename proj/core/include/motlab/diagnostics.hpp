#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "motlab/grid.hpp"
#include "motlab/motility.hpp"
#include "motlab/stepper.hpp"

namespace motlab {

struct DiagnosticsConfig {
    std::int64_t cadence = 1;          // record every k-th step (step 0 always)
    std::vector<double> p_list;        // exponents for the L^p moments, each > 1
    bool weighted = false;             // enable the weighted functional column
    double weighted_p = 2.0;

    bool operator==(const DiagnosticsConfig&) const = default;
};

/// One diagnostics sample.  v_t_sq is absent on the first record (no previous
/// state); weighted is present only when enabled and max(v) < delta strictly.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass_u = 0.0;        // integral of u
    double sup_v = 0.0;         // max of v
    double dual_norm_sq = 0.0;  // ||A^{-1/2} u||_{L2}^2, A = -Lap + I
    double l2_u_sq = 0.0;       // integral of u^2
    double grad_v_sq = 0.0;     // integral of |grad v|^2
    double lap_v_sq = 0.0;      // integral of (Lap v)^2
    double grad_v_4 = 0.0;      // integral of |grad v|^4
    std::optional<double> v_t_sq;  // integral of ((v - v_prev)/dt)^2
    std::vector<double> lp_u;      // integral of u^p per configured p
    double entropy_u = 0.0;        // integral of u ln u, 0 ln 0 := 0
    double fisher_u = 0.0;         // integral of |grad u|^2 / u over u >= floor
    double grad_u_43 = 0.0;        // integral of |grad u|^{4/3}
    std::optional<double> weighted;
    double stab_u = 0.0;  // ||u - mean(u0)||_inf
    double stab_v = 0.0;  // max of v
};

/// Parameters of the weighted functional  integral of u^p (delta - v)^{-kappa}.
struct WeightedParams {
    double p = 2.0;
    double kappa = 0.0;
    double delta = 0.0;
};

/// Extremal admissible parameters for the weighted functional given certified
/// motility bounds:
///   kappa = (p-1) c1 / (p (c2+1)^2)
///   delta = 0.99 * min(1/(2 p c3), kappa / ((p-1) c3 + kappa))
/// (the 1/(2 p c3) branch is +infinity when c3 = 0).  The returned pair
/// satisfies  p (c2+1)^2 kappa^2 / (2 (p-1) c1) <= kappa / 2,
/// p c3 delta <= 1/2  and  (p-1) c3 delta + kappa delta <= kappa.
WeightedParams choose_weighted_params(double p, const MotilityBounds& bounds);

/// Evaluates the weighted functional; requires max(v) < delta strictly.
double weighted_functional(const Grid& grid, std::span<const double> u,
                           std::span<const double> v, const WeightedParams& params);

DiagnosticsRecord compute_record(const Grid& grid, std::span<const double> u,
                                 std::span<const double> v, double t,
                                 const DiagnosticsConfig& config, double u0_mean,
                                 const std::optional<WeightedParams>& weighted_params,
                                 const double* v_prev, double dt_prev);

/// Streams simulation states (every step) and produces records on cadence
/// ticks.  Holds the previous v internally for the v_t backward difference.
class DiagnosticsRecorder {
  public:
    DiagnosticsRecorder(const Grid& grid, const MotilitySpec& phi, DiagnosticsConfig config,
                        const Field& u0, const Field& v0);

    /// Returns a record when step_index is a cadence multiple (including 0).
    std::optional<DiagnosticsRecord> observe(const SimState& state, std::int64_t step_index);

    const std::vector<DiagnosticsRecord>& records() const { return records_; }
    const std::optional<WeightedParams>& weighted_params() const { return weighted_params_; }

  private:
    Grid grid_;
    DiagnosticsConfig config_;
    double u0_mean_ = 0.0;
    std::optional<WeightedParams> weighted_params_;
    Field v_prev_;
    double t_prev_ = 0.0;
    bool have_prev_ = false;
    std::vector<DiagnosticsRecord> records_;
};

/// Sampled scalar time series with a sliding integration window.
struct WindowSeries {
    std::vector<double> times;   // strictly increasing, >= 2 samples
    std::vector<double> values;
    double window = 1.0;
};

/// Trapezoidal integral over [max(t_i - window, t_0), t_i]; the cut segment
/// is linearly interpolated.
std::vector<double> sliding_window_integrals(const WindowSeries& series);
double sliding_window_sup(const WindowSeries& series);

/// Separable space-time test function  psi(x, t) = amplitude * s(t) * X(x),
/// X = prod_a cos(pi m_a x_a / L_a)  (Neumann compatible) and
/// s(t) = (1 - (t/support_end)^2)^3 on [0, support_end], 0 beyond (C^2).
struct TestFunctionSpec {
    std::array<int, 3> modes{0, 0, 0};
    double support_end = 1.0;
    double amplitude = 1.0;
};

struct WeakResidual {
    double r_u = 0.0;
    double r_v = 0.0;
};

/// Residuals of the weak identities of the unregularized system against a
/// recorded trajectory (trapezoid in time, midpoint in space, centered
/// discrete gradients):
///   r_u = | -II[u psi_t] - I[u0 psi(.,0)] + II[grad(u phi(v)) . grad psi] |
///   r_v = |  II[v psi_t] + I[v0 psi(.,0)] - II[grad v . grad psi] - II[u v psi] |
/// The initial-data term of the v-identity pairs psi(.,0) with v0; the sign
/// convention is fixed by integrating v_t = Lap v - u v by parts in time.
WeakResidual weak_residual(const Trajectory& trajectory, const MotilitySpec& phi,
                           const TestFunctionSpec& psi);

struct CrossingTime {
    double threshold = 0.0;
    std::optional<double> time;  // first record time at or below threshold
};

struct StabilizationReport {
    std::vector<double> times;
    std::vector<double> stab_u;
    std::vector<double> stab_v;
    std::vector<CrossingTime> u_crossings;
    std::vector<CrossingTime> v_crossings;
};

StabilizationReport stabilization_metrics(std::span<const DiagnosticsRecord> records,
                                          std::span<const double> u_thresholds,
                                          std::span<const double> v_thresholds);

}  // namespace motlab
