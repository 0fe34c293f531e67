#include "motlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace motlab {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

double kahan_weighted_sum(std::span<const double> values, double weight) {
    double sum = 0.0, comp = 0.0;
    for (double x : values) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * weight;
}

void validate_config(const DiagnosticsConfig& config) {
    require(config.cadence >= 1, "diagnostics: cadence must be >= 1");
    for (double p : config.p_list) {
        require(p > 1.0 && std::isfinite(p), "diagnostics: every p in p_list must exceed 1");
    }
    if (config.weighted) {
        require(config.weighted_p > 1.0 && std::isfinite(config.weighted_p),
                "diagnostics: weighted_p must exceed 1");
    }
}

// Trapezoid weights for possibly nonuniform sample times.
std::vector<double> trapezoid_weights(std::span<const double> times) {
    const std::size_t n = times.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double half = 0.5 * (times[k + 1] - times[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

}  // namespace

WeightedParams choose_weighted_params(double p, const MotilityBounds& bounds) {
    require(p > 1.0 && std::isfinite(p), "choose_weighted_params: p must exceed 1");
    require(bounds.c1 > 0.0 && bounds.c2 >= bounds.c1 && bounds.c3 >= 0.0,
            "choose_weighted_params: invalid motility bounds");
    WeightedParams params;
    params.p = p;
    params.kappa = (p - 1.0) * bounds.c1 / (p * (bounds.c2 + 1.0) * (bounds.c2 + 1.0));
    const double branch_reaction =
        bounds.c3 > 0.0 ? 1.0 / (2.0 * p * bounds.c3) : std::numeric_limits<double>::infinity();
    const double branch_weight = params.kappa / ((p - 1.0) * bounds.c3 + params.kappa);
    params.delta = 0.99 * std::min(branch_reaction, branch_weight);

    // The selection is extremal, so re-verify the admissibility inequalities
    // it was derived from; failure here would be a programming error.
    const double lhs_kappa = p * (bounds.c2 + 1.0) * (bounds.c2 + 1.0) * params.kappa *
                             params.kappa / (2.0 * (p - 1.0) * bounds.c1);
    const double slack = 1.0 + 1e-12;
    if (!(lhs_kappa <= 0.5 * params.kappa * slack) ||
        !(p * bounds.c3 * params.delta <= 0.5 * slack) ||
        !((p - 1.0) * bounds.c3 * params.delta + params.kappa * params.delta <=
          params.kappa * slack)) {
        throw std::logic_error("choose_weighted_params: selected parameters fail admissibility");
    }
    return params;
}

double weighted_functional(const Grid& grid, std::span<const double> u,
                           std::span<const double> v, const WeightedParams& params) {
    require(static_cast<std::int64_t>(u.size()) == grid.total &&
                static_cast<std::int64_t>(v.size()) == grid.total,
            "weighted_functional: field sizes do not match the grid");
    require(params.p > 1.0 && params.kappa > 0.0 && params.delta > 0.0,
            "weighted_functional: invalid parameters");
    double sup_v = -std::numeric_limits<double>::infinity();
    for (double x : v) sup_v = std::max(sup_v, x);
    require(sup_v < params.delta,
            "weighted_functional: max(v) must lie strictly below delta");
    double sum = 0.0, comp = 0.0;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        const double ui = std::max(u[i], 0.0);
        const double x = std::pow(ui, params.p) * std::pow(params.delta - v[i], -params.kappa);
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * grid.cell_volume;
}

DiagnosticsRecord compute_record(const Grid& grid, std::span<const double> u,
                                 std::span<const double> v, double t,
                                 const DiagnosticsConfig& config, double u0_mean,
                                 const std::optional<WeightedParams>& weighted_params,
                                 const double* v_prev, double dt_prev) {
    validate_config(config);
    require(static_cast<std::int64_t>(u.size()) == grid.total &&
                static_cast<std::int64_t>(v.size()) == grid.total,
            "compute_record: field sizes do not match the grid");

    DiagnosticsRecord rec;
    rec.t = t;
    rec.mass_u = integrate(grid, u);

    double sup_v = -std::numeric_limits<double>::infinity();
    for (double x : v) sup_v = std::max(sup_v, x);
    rec.sup_v = sup_v;
    rec.stab_v = sup_v;

    double stab_u = 0.0;
    for (double x : u) stab_u = std::max(stab_u, std::abs(x - u0_mean));
    rec.stab_u = stab_u;

    Field work = apply_A_inv_sqrt(grid, u);
    for (double& x : work) x *= x;
    rec.dual_norm_sq = kahan_weighted_sum(work, grid.cell_volume);

    for (std::int64_t i = 0; i < grid.total; ++i) work[i] = u[i] * u[i];
    rec.l2_u_sq = kahan_weighted_sum(work, grid.cell_volume);

    Field gsq_v = gradient_sq(grid, v);
    rec.grad_v_sq = kahan_weighted_sum(gsq_v, grid.cell_volume);
    for (double& x : gsq_v) x *= x;
    rec.grad_v_4 = kahan_weighted_sum(gsq_v, grid.cell_volume);

    neumann_laplacian(grid, v, work);
    for (double& x : work) x *= x;
    rec.lap_v_sq = kahan_weighted_sum(work, grid.cell_volume);

    if (v_prev != nullptr) {
        require(dt_prev > 0.0 && std::isfinite(dt_prev),
                "compute_record: dt_prev must be positive when v_prev is given");
        for (std::int64_t i = 0; i < grid.total; ++i) {
            const double rate = (v[i] - v_prev[i]) / dt_prev;
            work[i] = rate * rate;
        }
        rec.v_t_sq = kahan_weighted_sum(work, grid.cell_volume);
    }

    rec.lp_u.reserve(config.p_list.size());
    for (double p : config.p_list) {
        for (std::int64_t i = 0; i < grid.total; ++i) {
            work[i] = std::pow(std::max(u[i], 0.0), p);
        }
        rec.lp_u.push_back(kahan_weighted_sum(work, grid.cell_volume));
    }

    // 0 ln 0 := 0; roundoff-negative cells contribute nothing.
    for (std::int64_t i = 0; i < grid.total; ++i) {
        work[i] = u[i] > 0.0 ? u[i] * std::log(u[i]) : 0.0;
    }
    rec.entropy_u = kahan_weighted_sum(work, grid.cell_volume);

    Field gsq_u = gradient_sq(grid, u);
    const double floor = 1e-12 * std::max(rec.mass_u, 0.0) / grid.volume;
    for (std::int64_t i = 0; i < grid.total; ++i) {
        work[i] = (u[i] > 0.0 && u[i] >= floor) ? gsq_u[i] / u[i] : 0.0;
    }
    rec.fisher_u = kahan_weighted_sum(work, grid.cell_volume);

    for (std::int64_t i = 0; i < grid.total; ++i) {
        work[i] = std::pow(gsq_u[i], 2.0 / 3.0);
    }
    rec.grad_u_43 = kahan_weighted_sum(work, grid.cell_volume);

    if (config.weighted && weighted_params.has_value() && sup_v < weighted_params->delta) {
        rec.weighted = weighted_functional(grid, u, v, *weighted_params);
    }
    return rec;
}

DiagnosticsRecorder::DiagnosticsRecorder(const Grid& grid, const MotilitySpec& phi,
                                         DiagnosticsConfig config, const Field& u0,
                                         const Field& v0)
    : grid_(grid), config_(std::move(config)) {
    validate_config(config_);
    require(static_cast<std::int64_t>(u0.size()) == grid.total &&
                static_cast<std::int64_t>(v0.size()) == grid.total,
            "DiagnosticsRecorder: initial data sizes do not match the grid");
    u0_mean_ = integrate(grid, u0) / grid.volume;
    if (config_.weighted) {
        double sup_v0 = 0.0;
        for (double x : v0) sup_v0 = std::max(sup_v0, x);
        weighted_params_ = choose_weighted_params(config_.weighted_p, certify_bounds(phi, sup_v0));
    }
    v_prev_ = make_field(grid);
}

std::optional<DiagnosticsRecord> DiagnosticsRecorder::observe(const SimState& state,
                                                              std::int64_t step_index) {
    require(state.grid.same_shape(grid_), "DiagnosticsRecorder: state grid changed");
    std::optional<DiagnosticsRecord> out;
    if (step_index % config_.cadence == 0) {
        const double* vp = have_prev_ ? v_prev_.data() : nullptr;
        out = compute_record(grid_, state.u, state.v, state.t, config_, u0_mean_,
                             weighted_params_, vp, state.t - t_prev_);
        records_.push_back(*out);
    }
    std::copy(state.v.begin(), state.v.end(), v_prev_.begin());
    t_prev_ = state.t;
    have_prev_ = true;
    return out;
}

std::vector<double> sliding_window_integrals(const WindowSeries& series) {
    const std::size_t n = series.times.size();
    require(n >= 2, "sliding window: need at least two samples");
    require(series.values.size() == n, "sliding window: times/values size mismatch");
    require(series.window > 0.0 && std::isfinite(series.window),
            "sliding window: window must be positive");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        require(series.times[i + 1] > series.times[i],
                "sliding window: times must be strictly increasing");
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double lower = std::max(series.times[i] - series.window, series.times.front());
        double acc = 0.0;
        for (std::size_t j = i; j-- > 0;) {
            const double t0 = series.times[j], t1 = series.times[j + 1];
            const double f0 = series.values[j], f1 = series.values[j + 1];
            if (t0 >= lower) {
                acc += 0.5 * (t1 - t0) * (f0 + f1);
            } else {
                const double fc = f0 + (f1 - f0) * (lower - t0) / (t1 - t0);
                acc += 0.5 * (t1 - lower) * (fc + f1);
                break;
            }
        }
        out[i] = acc;
    }
    return out;
}

double sliding_window_sup(const WindowSeries& series) {
    const std::vector<double> integrals = sliding_window_integrals(series);
    return *std::max_element(integrals.begin(), integrals.end());
}

WeakResidual weak_residual(const Trajectory& trajectory, const MotilitySpec& phi,
                           const TestFunctionSpec& psi) {
    const std::size_t n = trajectory.times.size();
    require(n >= 2, "weak_residual: trajectory needs at least two records");
    require(trajectory.u.size() == n && trajectory.v.size() == n,
            "weak_residual: trajectory field/time count mismatch");
    const Grid& grid = trajectory.grid;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        require(trajectory.times[k + 1] > trajectory.times[k],
                "weak_residual: trajectory times must be strictly increasing");
    }
    require(psi.support_end > 0.0 && std::isfinite(psi.support_end),
            "weak_residual: support_end must be positive");
    require(psi.support_end <= trajectory.times.back() * (1.0 + 1e-12),
            "weak_residual: test function support exceeds the trajectory horizon");
    require(std::isfinite(psi.amplitude), "weak_residual: amplitude must be finite");
    for (int a = 0; a < grid.dim; ++a) {
        require(psi.modes[a] >= 0, "weak_residual: modes must be >= 0");
    }

    // Spatial factor X and its analytic per-axis derivatives at cell centers.
    std::array<std::vector<double>, 3> cos_t, sin_t;
    for (int a = 0; a < grid.dim; ++a) {
        const double freq = std::numbers::pi * psi.modes[a] / grid.extents[a];
        cos_t[a].resize(grid.cells[a]);
        sin_t[a].resize(grid.cells[a]);
        for (int i = 0; i < grid.cells[a]; ++i) {
            cos_t[a][i] = std::cos(freq * grid.center(a, i));
            sin_t[a][i] = std::sin(freq * grid.center(a, i));
        }
    }
    Field X = make_field(grid, 1.0);
    std::array<Field, 3> dX;
    for (int a = 0; a < grid.dim; ++a) dX[a] = make_field(grid, 1.0);
    for (std::int64_t idx = 0; idx < grid.total; ++idx) {
        std::int64_t rest = idx;
        std::array<int, 3> c{0, 0, 0};
        for (int a = 0; a < grid.dim; ++a) {
            c[a] = static_cast<int>(rest / grid.strides[a]);
            rest -= static_cast<std::int64_t>(c[a]) * grid.strides[a];
        }
        for (int a = 0; a < grid.dim; ++a) X[idx] *= cos_t[a][c[a]];
        for (int a = 0; a < grid.dim; ++a) {
            const double freq = std::numbers::pi * psi.modes[a] / grid.extents[a];
            double g = -freq * sin_t[a][c[a]];
            for (int b = 0; b < grid.dim; ++b) {
                if (b != a) g *= cos_t[b][c[b]];
            }
            dX[a][idx] = g;
        }
    }

    auto s_of = [&](double t) {
        const double tau = t / psi.support_end;
        if (tau >= 1.0) return 0.0;
        const double q = 1.0 - tau * tau;
        return psi.amplitude * q * q * q;
    };
    auto sdot_of = [&](double t) {
        const double tau = t / psi.support_end;
        if (tau >= 1.0) return 0.0;
        const double q = 1.0 - tau * tau;
        return psi.amplitude * (-6.0 * tau * q * q / psi.support_end);
    };

    const std::vector<double> tw = trapezoid_weights(trajectory.times);
    Field g = make_field(grid), cg = make_field(grid);
    double t_u_time = 0.0;   // II[u psi_t]
    double t_u_flux = 0.0;   // II[grad(u phi(v)) . grad psi]
    double t_v_time = 0.0;   // II[v psi_t]
    double t_v_flux = 0.0;   // II[grad v . grad psi]
    double t_uv = 0.0;       // II[u v psi]
    for (std::size_t k = 0; k < n; ++k) {
        const double s = s_of(trajectory.times[k]);
        const double sdot = sdot_of(trajectory.times[k]);
        const Field& u = trajectory.u[k];
        const Field& v = trajectory.v[k];
        if (sdot != 0.0) {
            for (std::int64_t i = 0; i < grid.total; ++i) g[i] = u[i] * X[i];
            t_u_time += tw[k] * sdot * kahan_weighted_sum(g, grid.cell_volume);
            for (std::int64_t i = 0; i < grid.total; ++i) g[i] = v[i] * X[i];
            t_v_time += tw[k] * sdot * kahan_weighted_sum(g, grid.cell_volume);
        }
        if (s != 0.0) {
            for (std::int64_t i = 0; i < grid.total; ++i) g[i] = u[i] * phi.value(v[i]);
            double flux_u = 0.0, flux_v = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                centered_gradient(grid, g, a, cg);
                for (std::int64_t i = 0; i < grid.total; ++i) flux_u += cg[i] * dX[a][i];
            }
            for (int a = 0; a < grid.dim; ++a) {
                centered_gradient(grid, v, a, cg);
                for (std::int64_t i = 0; i < grid.total; ++i) flux_v += cg[i] * dX[a][i];
            }
            t_u_flux += tw[k] * s * flux_u * grid.cell_volume;
            t_v_flux += tw[k] * s * flux_v * grid.cell_volume;
            for (std::int64_t i = 0; i < grid.total; ++i) g[i] = u[i] * v[i] * X[i];
            t_uv += tw[k] * s * kahan_weighted_sum(g, grid.cell_volume);
        }
    }
    const double s0 = s_of(trajectory.times.front());
    for (std::int64_t i = 0; i < grid.total; ++i) g[i] = trajectory.u.front()[i] * X[i];
    const double iu0 = s0 * kahan_weighted_sum(g, grid.cell_volume);
    for (std::int64_t i = 0; i < grid.total; ++i) g[i] = trajectory.v.front()[i] * X[i];
    const double iv0 = s0 * kahan_weighted_sum(g, grid.cell_volume);

    WeakResidual res;
    res.r_u = std::abs(-t_u_time - iu0 + t_u_flux);
    res.r_v = std::abs(t_v_time + iv0 - t_v_flux - t_uv);
    return res;
}

StabilizationReport stabilization_metrics(std::span<const DiagnosticsRecord> records,
                                          std::span<const double> u_thresholds,
                                          std::span<const double> v_thresholds) {
    require(!records.empty(), "stabilization_metrics: no records");
    StabilizationReport report;
    report.times.reserve(records.size());
    for (const DiagnosticsRecord& rec : records) {
        report.times.push_back(rec.t);
        report.stab_u.push_back(rec.stab_u);
        report.stab_v.push_back(rec.stab_v);
    }
    auto first_crossing = [&](std::span<const double> series, double threshold) {
        CrossingTime out;
        out.threshold = threshold;
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (series[k] <= threshold) {
                out.time = report.times[k];
                break;
            }
        }
        return out;
    };
    for (double eta : u_thresholds) {
        require(eta > 0.0 && std::isfinite(eta), "stabilization_metrics: thresholds must be > 0");
        report.u_crossings.push_back(first_crossing(report.stab_u, eta));
    }
    for (double eta : v_thresholds) {
        require(eta > 0.0 && std::isfinite(eta), "stabilization_metrics: thresholds must be > 0");
        report.v_crossings.push_back(first_crossing(report.stab_v, eta));
    }
    return report;
}

}  // namespace motlab
