#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace motlab {

struct CgResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

/// Matrix-free conjugate gradients for SPD operators.  `apply(x, out)` must
/// write A*x into `out` without touching `x`.  `x` holds the initial guess on
/// entry and the solution on exit; r/p/ap are caller-owned scratch buffers of
/// the same size.  Convergence: ||b - A x||_2 <= rel_tol * ||b||_2.
template <typename Apply>
CgResult conjugate_gradient(const Apply& apply, std::span<const double> b, std::span<double> x,
                            double rel_tol, int max_iters, std::span<double> r,
                            std::span<double> p, std::span<double> ap) {
    const std::size_t n = b.size();
    auto dot = [n](std::span<const double> a, std::span<const double> c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i] * c[i];
        return acc;
    };

    const double b_norm = std::sqrt(dot(b, b));
    CgResult result;
    if (b_norm == 0.0) {
        for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
        result.converged = true;
        return result;
    }
    const double threshold = rel_tol * b_norm;

    apply(std::span<const double>(x.data(), n), r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i];
    double rr = dot(r, r);

    double best = std::sqrt(rr);
    int since_improvement = 0;
    for (int k = 0; k < max_iters; ++k) {
        const double res = std::sqrt(rr);
        result.iterations = k;
        result.rel_residual = res / b_norm;
        if (res <= threshold) {
            result.converged = true;
            return result;
        }
        // Stagnation guard: double precision has a floor; bail out instead of
        // burning the full iteration budget when rel_tol sits below it.
        if (res < 0.9999 * best) {
            best = res;
            since_improvement = 0;
        } else if (++since_improvement > 50) {
            return result;
        }
        apply(std::span<const double>(p.data(), n), ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) return result;  // lost positive-definiteness to roundoff
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        const double rr_next = dot(r, r);
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    result.iterations = max_iters;
    result.rel_residual = std::sqrt(rr) / b_norm;
    result.converged = std::sqrt(rr) <= threshold;
    return result;
}

}  // namespace motlab
