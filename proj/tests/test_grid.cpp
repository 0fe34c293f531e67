#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "motlab/grid.hpp"
#include "support/dense_oracle.hpp"

using namespace motlab;
using motlab::testing::dense_neumann_laplacian;
using motlab::testing::pseudo_random_field;

namespace {

Field cosine_mode(const Grid& grid, const std::array<int, 3>& modes) {
    Field f(static_cast<std::size_t>(grid.total));
    for (std::int64_t i = 0; i < grid.total; ++i) {
        std::int64_t rest = i;
        double value = 1.0;
        for (int a = 0; a < grid.dim; ++a) {
            const std::int64_t k = rest / grid.strides[a];
            rest %= grid.strides[a];
            value *= std::cos(std::numbers::pi * modes[a] * grid.center(a, static_cast<int>(k)) /
                              grid.extents[a]);
        }
        f[static_cast<std::size_t>(i)] = value;
    }
    return f;
}

}  // namespace

TEST_CASE("build_grid computes spacing, strides and volumes") {
    const std::vector<double> extents{2.0, 1.0, 0.5};
    const std::vector<int> cells{4, 8, 5};
    const Grid g = build_grid(3, extents, cells);
    CHECK(g.dim == 3);
    CHECK(g.total == 4 * 8 * 5);
    CHECK(g.spacing[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.spacing[1] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.spacing[2] == doctest::Approx(0.1).epsilon(1e-15));
    // Row-major, axis 0 slowest.
    CHECK(g.strides[0] == 8 * 5);
    CHECK(g.strides[1] == 5);
    CHECK(g.strides[2] == 1);
    CHECK(g.volume == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.cell_volume == doctest::Approx(1.0 / 160.0).epsilon(1e-15));
    // Cell centers at (k + 1/2) h.
    CHECK(g.center(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.center(1, 7) == doctest::Approx(0.9375).epsilon(1e-15));
}

TEST_CASE("build_grid rejects invalid shapes") {
    const std::vector<double> ext1{1.0};
    const std::vector<int> cells1{8};
    CHECK_THROWS_AS(build_grid(0, ext1, cells1), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(4, ext1, cells1), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(2, ext1, cells1), std::invalid_argument);  // span mismatch
    const std::vector<double> bad_ext{-1.0};
    CHECK_THROWS_AS(build_grid(1, bad_ext, cells1), std::invalid_argument);
    const std::vector<int> bad_cells{1};
    CHECK_THROWS_AS(build_grid(1, ext1, bad_cells), std::invalid_argument);
}

TEST_CASE("midpoint integration is exact for its quadrature identity") {
    const std::vector<double> ext{1.0};
    const std::vector<int> cells{32};
    const Grid g = build_grid(1, ext, cells);

    CHECK(integrate(g, make_field(g, 3.5)) == doctest::Approx(3.5).epsilon(1e-15));

    Field f(32);
    for (int i = 0; i < 32; ++i) f[i] = g.center(0, i) * g.center(0, i);
    // Midpoint rule on x^2 over [0,1] evaluates exactly to 1/3 - h^2/12.
    const double h = 1.0 / 32.0;
    const double expected = 1.0 / 3.0 - h * h / 12.0;
    CHECK(integrate(g, f) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(integrate(g, f) - 1.0 / 3.0) < 1e-4);
}

TEST_CASE("Laplacian annihilates constants and conserves mass") {
    const std::vector<double> ext{1.0, 2.0};
    const std::vector<int> cells{12, 9};
    const Grid g = build_grid(2, ext, cells);

    const Field lap_const = neumann_laplacian(g, make_field(g, 4.0));
    for (double x : lap_const) CHECK(x == 0.0);

    const Field f = pseudo_random_field(g, -1.0, 3.0);
    const Field lap = neumann_laplacian(g, f);
    // Discrete divergence form: the Laplacian integrates to zero exactly up
    // to roundoff (telescoping flux sum).
    const double scale = 1.0 / (g.spacing[0] * g.spacing[0]);
    CHECK(std::abs(integrate(g, lap)) < 1e-12 * scale * g.volume);
}

TEST_CASE("Laplacian matches a dense independent assembly in 1D/2D/3D") {
    const std::vector<std::vector<double>> extents{{1.0}, {1.0, 0.7}, {1.0, 0.7, 1.3}};
    const std::vector<std::vector<int>> cells{{9}, {5, 4}, {3, 4, 5}};
    for (std::size_t c = 0; c < extents.size(); ++c) {
        const Grid g = build_grid(static_cast<int>(c) + 1, extents[c], cells[c]);
        const Eigen::MatrixXd L = dense_neumann_laplacian(g);
        const Field f = pseudo_random_field(g, -2.0, 2.0, 7 + c);
        const Field lap = neumann_laplacian(g, f);
        Eigen::VectorXd fv(g.total);
        for (std::int64_t i = 0; i < g.total; ++i) fv(i) = f[static_cast<std::size_t>(i)];
        const Eigen::VectorXd ref = L * fv;
        double scale = 0.0;
        for (std::int64_t i = 0; i < g.total; ++i) scale = std::max(scale, std::abs(ref(i)));
        for (std::int64_t i = 0; i < g.total; ++i) {
            CHECK(std::abs(lap[static_cast<std::size_t>(i)] - ref(i)) <= 1e-13 * (1.0 + scale));
        }
    }
}

TEST_CASE("Laplacian is symmetric against the quadrature inner product") {
    const std::vector<double> ext{1.0, 1.0};
    const std::vector<int> cells{6, 7};
    const Grid g = build_grid(2, ext, cells);
    const Field f = pseudo_random_field(g, 0.0, 1.0, 1);
    const Field h = pseudo_random_field(g, 0.0, 1.0, 2);
    const Field lf = neumann_laplacian(g, f);
    const Field lh = neumann_laplacian(g, h);
    double a = 0.0, b = 0.0;
    for (std::int64_t i = 0; i < g.total; ++i) {
        a += lf[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)];
        b += f[static_cast<std::size_t>(i)] * lh[static_cast<std::size_t>(i)];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("cosine modes are exact eigenvectors") {
    const std::vector<double> ext{1.0};
    const std::vector<int> cells{8};
    const Grid g = build_grid(1, ext, cells);
    const double lambda = neumann_mode_eigenvalue(g.spacing[0], g.cells[0], 1);
    // lambda_1 = (2/h^2)(1 - cos(pi/8)), frozen value.
    CHECK(lambda == doctest::Approx(9.7434198385552952).epsilon(1e-13));

    const Field f = cosine_mode(g, {1, 0, 0});
    const Field lap = neumann_laplacian(g, f);
    for (std::int64_t i = 0; i < g.total; ++i) {
        CHECK(std::abs(lap[static_cast<std::size_t>(i)] +
                       lambda * f[static_cast<std::size_t>(i)]) < 1e-12 * lambda);
    }
}

TEST_CASE("Laplacian converges at second order on a smooth field") {
    // On the exact discrete eigenvector cos(pi x), the error is purely the
    // eigenvalue defect lambda_N - pi^2 = O(N^-2).
    std::vector<double> errors;
    for (int n : {16, 32, 64, 128}) {
        const std::vector<double> ext{1.0};
        const std::vector<int> cells{n};
        const Grid g = build_grid(1, ext, cells);
        const Field f = cosine_mode(g, {1, 0, 0});
        const Field lap = neumann_laplacian(g, f);
        double err = 0.0;
        for (std::int64_t i = 0; i < g.total; ++i) {
            const double exact = -std::numbers::pi * std::numbers::pi *
                                 f[static_cast<std::size_t>(i)];
            err = std::max(err, std::abs(lap[static_cast<std::size_t>(i)] - exact));
        }
        errors.push_back(err);
    }
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const double rate = std::log2(errors[k] / errors[k + 1]);
        CHECK(rate > 1.8);
        CHECK(rate < 2.2);
    }
}

TEST_CASE("in-place stencil application is rejected") {
    const std::vector<double> ext{1.0};
    const std::vector<int> cells{8};
    const Grid g = build_grid(1, ext, cells);
    Field f = make_field(g, 1.0);
    CHECK_THROWS_AS(neumann_laplacian(g, f, f), std::invalid_argument);
    CHECK_THROWS_AS(gradient_sq(g, f, f), std::invalid_argument);
}

TEST_CASE("gradient_sq averages face gradients with zero-flux boundary faces") {
    const std::vector<double> ext{1.0};
    const std::vector<int> cells{10};
    const Grid g = build_grid(1, ext, cells);
    Field f(10);
    for (int i = 0; i < 10; ++i) f[i] = 2.0 * g.center(0, i);  // slope 2
    const Field gsq = gradient_sq(g, f);
    CHECK(gsq[0] == doctest::Approx(2.0).epsilon(1e-13));   // 0.5*(0 + 4)
    CHECK(gsq[5] == doctest::Approx(4.0).epsilon(1e-13));   // interior
    CHECK(gsq[9] == doctest::Approx(2.0).epsilon(1e-13));   // 0.5*(4 + 0)

    // integral of |grad cos(pi x)|^2 = pi^2/2; the discrete value converges.
    const std::vector<int> cells2{64};
    const Grid g2 = build_grid(1, ext, cells2);
    const Field c = cosine_mode(g2, {1, 0, 0});
    const double value = integrate(g2, gradient_sq(g2, c));
    CHECK(value == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(0.02));
}

TEST_CASE("apply_A_inv_sqrt fixes constants and scales modes by (1+lambda)^{-1/2}") {
    const std::vector<double> ext{1.0, 1.0};
    const std::vector<int> cells{8, 8};
    const Grid g = build_grid(2, ext, cells);

    const Field c = apply_A_inv_sqrt(g, make_field(g, 2.0));
    for (double x : c) CHECK(x == doctest::Approx(2.0).epsilon(1e-13));

    const Field mode = cosine_mode(g, {2, 1, 0});
    const double lambda = neumann_mode_eigenvalue(g.spacing[0], g.cells[0], 2) +
                          neumann_mode_eigenvalue(g.spacing[1], g.cells[1], 1);
    const Field scaled = apply_A_inv_sqrt(g, mode);
    const double factor = 1.0 / std::sqrt(1.0 + lambda);
    for (std::int64_t i = 0; i < g.total; ++i) {
        CHECK(scaled[static_cast<std::size_t>(i)] ==
              doctest::Approx(factor * mode[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }
}

TEST_CASE("apply_A_inv_sqrt squares to the dense inverse of -Lap + I") {
    const std::vector<std::vector<double>> extents{{1.0}, {1.0, 0.8}};
    const std::vector<std::vector<int>> cells{{16}, {6, 5}};
    for (std::size_t c = 0; c < extents.size(); ++c) {
        const Grid g = build_grid(static_cast<int>(c) + 1, extents[c], cells[c]);
        const Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(g.total, g.total) - dense_neumann_laplacian(g);
        const Field f = pseudo_random_field(g, -1.0, 1.0, 11 + c);
        const Field once = apply_A_inv_sqrt(g, f);
        const Field twice = apply_A_inv_sqrt(g, once);
        Eigen::VectorXd rhs(g.total);
        for (std::int64_t i = 0; i < g.total; ++i) rhs(i) = f[static_cast<std::size_t>(i)];
        const Eigen::VectorXd ref = A.ldlt().solve(rhs);
        for (std::int64_t i = 0; i < g.total; ++i) {
            CHECK(twice[static_cast<std::size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-10));
        }
        // Applying A to the twice-transformed field recovers f.
        const Field lap = neumann_laplacian(g, twice);
        for (std::int64_t i = 0; i < g.total; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            CHECK(twice[iu] - lap[iu] == doctest::Approx(f[iu]).epsilon(1e-9));
        }
    }
}
