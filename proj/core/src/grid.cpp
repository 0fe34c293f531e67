#include "motlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace motlab {

namespace {

void check_shape(const Grid& grid, std::span<const double> f, const char* what) {
    if (static_cast<std::int64_t>(f.size()) != grid.total) {
        throw std::invalid_argument(std::string(what) + ": field size " +
                                    std::to_string(f.size()) + " does not match grid (" +
                                    std::to_string(grid.total) + " cells)");
    }
}

// Visits every 1-d line of cells along `axis`: calls fn(start, stride, count).
// Row-major layout means a line along axis a is an arithmetic progression of
// flat indices with stride strides[a].
template <typename Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn) {
    const std::int64_t n = grid.cells[axis];
    const std::int64_t stride = grid.strides[axis];
    const std::int64_t block = n * stride;       // span of one line's bounding block
    const std::int64_t outer = grid.total / block;
    for (std::int64_t o = 0; o < outer; ++o) {
        const std::int64_t base = o * block;
        for (std::int64_t inner = 0; inner < stride; ++inner) {
            fn(base + inner, stride, n);
        }
    }
}

// Cosine tables C[k*n + j] = cos(pi k (j + 1/2) / n), shared across calls.
std::shared_ptr<const std::vector<double>> cosine_table(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            (*table)[static_cast<std::size_t>(k) * n + j] =
                std::cos(std::numbers::pi * k * (j + 0.5) / n);
        }
    }
    cache.emplace(n, table);
    return table;
}

// In-place per-axis cosine analysis (to coefficients) or synthesis (back to
// cell values) applied line by line.  O(n^2) per line, which is fine at desk
// scale and keeps the transform dependency-free.
void transform_axis(const Grid& grid, int axis, bool forward, std::span<double> data) {
    const int n = grid.cells[axis];
    const auto table = cosine_table(n);
    const double* C = table->data();
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<double> out(static_cast<std::size_t>(n));
    for_each_line(grid, axis, [&](std::int64_t start, std::int64_t stride, std::int64_t count) {
        for (std::int64_t i = 0; i < count; ++i) in[i] = data[start + i * stride];
        if (forward) {
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                const double* row = C + static_cast<std::size_t>(k) * n;
                for (int j = 0; j < n; ++j) acc += row[j] * in[j];
                out[k] = acc * ((k == 0 ? 1.0 : 2.0) / n);
            }
        } else {
            for (int j = 0; j < n; ++j) out[j] = 0.0;
            for (int k = 0; k < n; ++k) {
                const double ck = in[k];
                if (ck == 0.0) continue;
                const double* row = C + static_cast<std::size_t>(k) * n;
                for (int j = 0; j < n; ++j) out[j] += ck * row[j];
            }
        }
        for (std::int64_t i = 0; i < count; ++i) data[start + i * stride] = out[i];
    });
}

}  // namespace

Grid build_grid(int dim, std::span<const double> extents, std::span<const int> cells) {
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("build_grid: dim must be 1, 2 or 3 (got " +
                                    std::to_string(dim) + ")");
    }
    if (extents.size() != static_cast<std::size_t>(dim) ||
        cells.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("build_grid: extents/cells must each have dim entries");
    }
    Grid grid;
    grid.dim = dim;
    grid.cell_volume = 1.0;
    grid.volume = 1.0;
    for (int a = 0; a < dim; ++a) {
        if (!(extents[a] > 0.0) || !std::isfinite(extents[a])) {
            throw std::invalid_argument("build_grid: extent of axis " + std::to_string(a) +
                                        " must be positive and finite");
        }
        if (cells[a] < 2) {
            throw std::invalid_argument("build_grid: axis " + std::to_string(a) +
                                        " needs at least 2 cells");
        }
        grid.extents[a] = extents[a];
        grid.cells[a] = cells[a];
        grid.spacing[a] = extents[a] / cells[a];
        grid.cell_volume *= grid.spacing[a];
        grid.volume *= extents[a];
    }
    grid.total = 1;
    for (int a = dim - 1; a >= 0; --a) {
        grid.strides[a] = grid.total;
        grid.total *= grid.cells[a];
    }
    return grid;
}

Field make_field(const Grid& grid, double value) {
    return Field(static_cast<std::size_t>(grid.total), value);
}

double integrate(const Grid& grid, std::span<const double> f) {
    check_shape(grid, f, "integrate");
    double sum = 0.0, comp = 0.0;  // Kahan compensation
    for (double x : f) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * grid.cell_volume;
}

void neumann_laplacian(const Grid& grid, std::span<const double> f, std::span<double> out) {
    check_shape(grid, f, "neumann_laplacian");
    check_shape(grid, std::span<const double>(out.data(), out.size()), "neumann_laplacian");
    if (out.data() == f.data()) {
        throw std::invalid_argument("neumann_laplacian: in-place application is not supported");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < grid.dim; ++a) {
        const double inv_h2 = 1.0 / (grid.spacing[a] * grid.spacing[a]);
        for_each_line(grid, a, [&](std::int64_t start, std::int64_t stride, std::int64_t n) {
            // Reflected ghosts: the missing neighbor at each end mirrors the
            // boundary cell, so the one-sided term is (f[1] - f[0]) / h^2.
            out[start] += (f[start + stride] - f[start]) * inv_h2;
            for (std::int64_t i = 1; i < n - 1; ++i) {
                const std::int64_t idx = start + i * stride;
                out[idx] += (f[idx - stride] - 2.0 * f[idx] + f[idx + stride]) * inv_h2;
            }
            const std::int64_t last = start + (n - 1) * stride;
            out[last] += (f[last - stride] - f[last]) * inv_h2;
        });
    }
}

Field neumann_laplacian(const Grid& grid, std::span<const double> f) {
    Field out = make_field(grid);
    neumann_laplacian(grid, f, out);
    return out;
}

void gradient_sq(const Grid& grid, std::span<const double> f, std::span<double> out) {
    check_shape(grid, f, "gradient_sq");
    check_shape(grid, std::span<const double>(out.data(), out.size()), "gradient_sq");
    if (out.data() == f.data()) {
        throw std::invalid_argument("gradient_sq: in-place application is not supported");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < grid.dim; ++a) {
        const double inv_h = 1.0 / grid.spacing[a];
        for_each_line(grid, a, [&](std::int64_t start, std::int64_t stride, std::int64_t n) {
            // Face gradients; the two boundary-normal faces carry zero flux.
            double left = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const std::int64_t idx = start + i * stride;
                const double right =
                    (i + 1 < n) ? (f[idx + stride] - f[idx]) * inv_h : 0.0;
                out[idx] += 0.5 * (left * left + right * right);
                left = right;
            }
        });
    }
}

Field gradient_sq(const Grid& grid, std::span<const double> f) {
    Field out = make_field(grid);
    gradient_sq(grid, f, out);
    return out;
}

void centered_gradient(const Grid& grid, std::span<const double> f, int axis,
                       std::span<double> out) {
    check_shape(grid, f, "centered_gradient");
    check_shape(grid, std::span<const double>(out.data(), out.size()), "centered_gradient");
    if (axis < 0 || axis >= grid.dim) {
        throw std::invalid_argument("centered_gradient: axis out of range");
    }
    if (out.data() == f.data()) {
        throw std::invalid_argument("centered_gradient: in-place application is not supported");
    }
    const double inv_2h = 0.5 / grid.spacing[axis];
    for_each_line(grid, axis, [&](std::int64_t start, std::int64_t stride, std::int64_t n) {
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int64_t idx = start + i * stride;
            const double lo = (i > 0) ? f[idx - stride] : f[idx];      // reflect
            const double hi = (i + 1 < n) ? f[idx + stride] : f[idx];  // reflect
            out[idx] = (hi - lo) * inv_2h;
        }
    });
}

double neumann_mode_eigenvalue(double spacing, int cells, int mode) {
    if (!(spacing > 0.0) || cells < 1 || mode < 0 || mode >= cells) {
        throw std::invalid_argument("neumann_mode_eigenvalue: invalid spacing/cells/mode");
    }
    return 2.0 / (spacing * spacing) * (1.0 - std::cos(std::numbers::pi * mode / cells));
}

void apply_A_inv_sqrt(const Grid& grid, std::span<const double> f, std::span<double> out) {
    check_shape(grid, f, "apply_A_inv_sqrt");
    check_shape(grid, std::span<const double>(out.data(), out.size()), "apply_A_inv_sqrt");
    std::copy(f.begin(), f.end(), out.begin());
    for (int a = 0; a < grid.dim; ++a) transform_axis(grid, a, /*forward=*/true, out);

    std::array<std::vector<double>, 3> lambda;
    for (int a = 0; a < grid.dim; ++a) {
        lambda[a].resize(static_cast<std::size_t>(grid.cells[a]));
        for (int k = 0; k < grid.cells[a]; ++k) {
            lambda[a][k] = neumann_mode_eigenvalue(grid.spacing[a], grid.cells[a], k);
        }
    }
    for (std::int64_t idx = 0; idx < grid.total; ++idx) {
        std::int64_t rest = idx;
        double lam = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            const std::int64_t k = rest / grid.strides[a];
            rest -= k * grid.strides[a];
            lam += lambda[a][static_cast<std::size_t>(k)];
        }
        out[idx] /= std::sqrt(1.0 + lam);
    }
    for (int a = 0; a < grid.dim; ++a) transform_axis(grid, a, /*forward=*/false, out);
}

Field apply_A_inv_sqrt(const Grid& grid, std::span<const double> f) {
    Field out = make_field(grid);
    apply_A_inv_sqrt(grid, f, out);
    return out;
}

}  // namespace motlab
