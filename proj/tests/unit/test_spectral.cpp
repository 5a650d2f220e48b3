#include "doctest.h"

#include "fracthin/error.hpp"
#include "fracthin/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracthin;

namespace {

SpectralField random_field(const BasisPtr& b, std::mt19937_64& rng, double decay = 0.0) {
    std::normal_distribution<double> nd;
    std::vector<double> c(b->size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double lam = b->eigenvalues()[k];
        c[k] = nd(rng) * std::exp(-decay * std::sqrt(lam));
    }
    return SpectralField(b, std::move(c));
}

// phi_k by direct evaluation of the cosine product.
double phi_direct(const DomainGeometry& g, std::span<const int> k, std::span<const double> x) {
    double v = 1.0;
    for (int a = 0; a < g.dimension(); ++a) {
        const double L = g.axis(a).length;
        v *= k[a] == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L) * std::cos(k[a] * std::numbers::pi * x[a] / L);
    }
    return v;
}

}  // namespace

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(DomainGeometry::interval(0.0, 8), ConfigError);
    CHECK_THROWS_AS(DomainGeometry::interval(1.0, 1), ConfigError);
    CHECK_THROWS_AS(DomainGeometry::interval(1.0, 8, 11), ConfigError);
    CHECK_NOTHROW(DomainGeometry::interval(1.0, 8, 12));
    CHECK_THROWS_AS(DomainGeometry::box({1, 1, 1, 1}, {4, 4, 4, 4}), ConfigError);
    const auto g = DomainGeometry::interval(2.0, 9);
    CHECK(g.axis(0).points == 14);
    CHECK(g.coordinate(0, 0) == doctest::Approx(1.0 / 14.0));
}

TEST_CASE("eigenvalues") {
    auto b1 = build_basis(DomainGeometry::interval(std::numbers::pi, 4));
    const int k1[] = {1};
    CHECK(b1->eigenvalue(k1) == doctest::Approx(1.0).epsilon(1e-15));
    const int k0[] = {0};
    CHECK(b1->eigenvalue(k0) == 0.0);
    CHECK(b1->normalization(0, 0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)));

    auto b2 = build_basis(DomainGeometry::box({std::numbers::pi, std::numbers::pi}, {4, 4}));
    const int k12[] = {1, 2};
    CHECK(b2->eigenvalue(k12) == doctest::Approx(5.0).epsilon(1e-14));
    const auto mi = b2->multi_index(b2->flat_index(k12));
    CHECK(mi == std::vector<int>{1, 2});
    // Nondecreasing along each axis.
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j + 1 < 4; ++j) {
            const int a[] = {i, j}, c[] = {i, j + 1}, e[] = {j, i}, f[] = {j + 1, i};
            CHECK(b2->eigenvalue(a) <= b2->eigenvalue(c));
            CHECK(b2->eigenvalue(e) <= b2->eigenvalue(f));
        }
    }
}

TEST_CASE("basis functions sample to unit coefficients") {
    for (const auto& g : {DomainGeometry::interval(1.7, 12), DomainGeometry::box({1.0, 2.5}, {6, 5}),
                          DomainGeometry::box({1.0, 0.5, 2.0}, {3, 4, 3})}) {
        auto b = build_basis(g);
        for (std::size_t flat = 0; flat < b->size(); ++flat) {
            const auto k = b->multi_index(flat);
            const GridField gf = sample(g, [&](std::span<const double> x) { return phi_direct(g, k, x); });
            const SpectralField c = to_coefficients(gf, b);
            for (std::size_t j = 0; j < b->size(); ++j) {
                CHECK(std::abs(c[j] - (j == flat ? 1.0 : 0.0)) <= 1e-12);
            }
            const GridField back = to_grid(basis_function(b, k));
            double err = 0.0;
            for (std::size_t i = 0; i < back.size(); ++i) err = std::max(err, std::abs(back[i] - gf[i]));
            CHECK(err <= 1e-12);
        }
    }
}

TEST_CASE("constant field") {
    const double L = 2.3, a = 1.7;
    auto b = build_basis(DomainGeometry::interval(L, 10));
    const GridField g(b->geometry(), std::vector<double>(b->geometry().point_count(), a));
    const auto c = to_coefficients(g, b);
    CHECK(c[0] == doctest::Approx(a * std::sqrt(L)).epsilon(1e-14));
    for (std::size_t k = 1; k < c.size(); ++k) CHECK(std::abs(c[k]) <= 1e-13);
    CHECK(seminorm(c, 0.7) == 0.0);
    for (const auto& gr : gradient(c)) CHECK(gr.max_abs() <= 1e-12);
    CHECK(to_grid(SpectralField(b)).max_abs() == 0.0);
}

TEST_CASE("round trip and Parseval on random fields") {
    std::mt19937_64 rng(11);
    for (const auto& g : {DomainGeometry::interval(2.0, 33), DomainGeometry::box({1.0, 1.5}, {9, 12})}) {
        auto b = build_basis(g);
        for (int trial = 0; trial < 20; ++trial) {
            const auto u = random_field(b, rng);
            const auto grid = to_grid(u);
            const auto back = to_coefficients(grid, b);
            double err = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) {
                err = std::max(err, std::abs(back[k] - u[k]));
                scale = std::max(scale, std::abs(u[k]));
            }
            CHECK(err <= 1e-12 * scale);
            // Direct quadrature of u^2 on the grid.
            double q = 0.0;
            for (double v : grid.values()) q += v * v;
            q *= g.cell_volume();
            const double l2 = inner_product(u, u);
            CHECK(std::abs(q - l2) <= 1e-10 * l2);
            CHECK(l2_norm(u) * l2_norm(u) == doctest::Approx(l2).epsilon(1e-14));
        }
    }
}

TEST_CASE("grid to grid round trip for band-limited data") {
    std::mt19937_64 rng(3);
    const auto g = DomainGeometry::interval(1.0, 16);
    auto b = build_basis(g);
    const auto u = random_field(b, rng);
    const auto grid = to_grid(u);
    const auto grid2 = to_grid(to_coefficients(grid, b));
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(grid2[i] - grid[i]) <= 1e-12 * grid.max_abs());
}

TEST_CASE("fractional powers") {
    std::mt19937_64 rng(5);
    auto b = build_basis(DomainGeometry::box({1.0, 2.0}, {7, 6}));
    const auto u = random_field(b, rng);
    const auto v = random_field(b, rng);
    CHECK_THROWS_AS(frac_laplacian(u, -0.1), DomainError);
    const auto id = frac_laplacian(u, 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(id[k] == u[k]);
    CHECK(frac_laplacian(u, 0.3)[0] == 0.0);

    for (double r1 : {0.25, 0.5, 0.9}) {
        for (double r2 : {0.1, 0.75, 1.5}) {
            const auto a = frac_laplacian(frac_laplacian(u, r1), r2);
            const auto c = frac_laplacian(u, r1 + r2);
            for (std::size_t k = 0; k < u.size(); ++k) CHECK(std::abs(a[k] - c[k]) <= 1e-12 * (1.0 + std::abs(c[k])));
            // (-Delta)^{r1} u . (-Delta)^{r2} v = ((-Delta)^{r1+r2} u) . v, both as grid quadratures.
            const auto ga = to_grid(frac_laplacian(u, r1));
            const auto gb = to_grid(frac_laplacian(v, r2));
            const auto gc = to_grid(c);
            const auto gv = to_grid(v);
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t i = 0; i < ga.size(); ++i) {
                lhs += ga[i] * gb[i];
                rhs += gc[i] * gv[i];
            }
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)) * 1e2);
            // ||(-Delta)^r u|| = seminorm(u, 2r)
            CHECK(l2_norm(frac_laplacian(u, r1)) == doctest::Approx(seminorm(u, 2.0 * r1)).epsilon(1e-12));
        }
    }
    const int k[] = {2, 3};
    const auto phi = basis_function(b, k);
    const double lam = b->eigenvalue(k);
    CHECK(seminorm(phi, 0.6) == doctest::Approx(std::pow(lam, 0.3)).epsilon(1e-14));
}

TEST_CASE("gradient") {
    SUBCASE("phi_1 on [0, pi]") {
        auto b = build_basis(DomainGeometry::interval(std::numbers::pi, 8));
        const int k[] = {1};
        const auto gr = gradient(basis_function(b, k));
        const auto& g = b->geometry();
        for (int j = 0; j < g.axis(0).points; ++j) {
            const double x = g.coordinate(0, j);
            CHECK(gr[0][static_cast<std::size_t>(j)] ==
                  doctest::Approx(-std::sqrt(2.0 / std::numbers::pi) * std::sin(x)).epsilon(1e-13));
        }
    }
    SUBCASE("finite-difference oracle in 2D") {
        std::mt19937_64 rng(17);
        auto b = build_basis(DomainGeometry::box({1.0, 1.3}, {8, 6}));
        const auto u = random_field(b, rng, 0.1);
        const auto gr = gradient(u);
        const auto& g = b->geometry();
        const double h = 1e-5;
        double err = 0.0, scale = 0.0;
        for (std::size_t flat = 0; flat < g.point_count(); ++flat) {
            const auto x = g.node(flat);
            for (int a = 0; a < 2; ++a) {
                auto xp = x, xm = x;
                xp[static_cast<std::size_t>(a)] += h;
                xm[static_cast<std::size_t>(a)] -= h;
                const double fd = (evaluate(u, xp) - evaluate(u, xm)) / (2.0 * h);
                err = std::max(err, std::abs(fd - gr[static_cast<std::size_t>(a)][flat]));
                scale = std::max(scale, std::abs(fd));
            }
            const auto pg = evaluate_gradient(u, x);
            CHECK(pg[0] == doctest::Approx(gr[0][flat]).epsilon(1e-10).scale(scale + 1.0));
        }
        CHECK(err <= 1e-6 * scale);
    }
    SUBCASE("Neumann trace") {
        std::mt19937_64 rng(19);
        auto b = build_basis(DomainGeometry::box({1.0, 2.0}, {9, 7}));
        const auto u = random_field(b, rng);
        for (double y : {0.1, 0.77, 1.9}) {
            const double x0[] = {0.0, y};
            const double x1[] = {1.0, y};
            CHECK(std::abs(evaluate_gradient(u, x0)[0]) <= 1e-8);
            CHECK(std::abs(evaluate_gradient(u, x1)[0]) <= 1e-8);
        }
    }
}

TEST_CASE("H1 Parseval and Dirichlet form") {
    std::mt19937_64 rng(23);
    for (const auto& g : {DomainGeometry::interval(1.5, 40), DomainGeometry::box({1.0, 2.0}, {10, 8}),
                          DomainGeometry::box({1.0, 1.0, 0.7}, {5, 4, 6})}) {
        auto b = build_basis(g);
        const auto u = random_field(b, rng);
        double q = 0.0;
        for (const auto& gr : gradient(u)) {
            for (double v : gr.values()) q += v * v;
        }
        q *= g.cell_volume();
        const double s1 = seminorm(u, 1.0);
        CHECK(std::abs(q - s1 * s1) <= 1e-10 * s1 * s1);

        // accumulate_derivative_projection is the adjoint of synthesize_derivative.
        const auto v = random_field(b, rng);
        std::vector<double> proj(b->size(), 0.0);
        for (int a = 0; a < g.dimension(); ++a) {
            std::vector<double> w(g.point_count());
            b->synthesize_derivative(a, u.coefficients(), w);
            b->accumulate_derivative_projection(a, w, proj);
        }
        // sum_j v_j int grad u . grad phi_j = (u, v) in H^1
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < b->size(); ++k) {
            lhs += proj[k] * v[k];
            rhs += b->eigenvalues()[k] * u[k] * v[k];
        }
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(rhs) + seminorm(u, 1) * seminorm(v, 1)));
    }
}

TEST_CASE("perturbed eigenvalue breaks the H1 identity") {
    const auto g = DomainGeometry::interval(1.0, 16);
    auto b = EigenBasis::with_perturbed_eigenvalue(g, 3, 1.01);
    const int k[] = {3};
    const auto u = basis_function(b, k);
    double q = 0.0;
    for (double v : gradient(u)[0].values()) q += v * v;
    q *= g.cell_volume();
    CHECK(std::abs(q - seminorm(u, 1.0) * seminorm(u, 1.0)) > 1e-3 * q);
}

TEST_CASE("errors") {
    auto b1 = build_basis(DomainGeometry::interval(1.0, 8));
    auto b2 = build_basis(DomainGeometry::interval(2.0, 8));
    CHECK_THROWS_AS(SpectralField(b1, std::vector<double>(7)), ConfigError);
    std::vector<double> bad(8, 0.0);
    bad[2] = std::nan("");
    CHECK_THROWS_AS(SpectralField(b1, bad), DomainError);
    CHECK_THROWS_AS(inner_product(SpectralField(b1), SpectralField(b2)), ConfigError);
    CHECK_THROWS_AS(to_coefficients(GridField(b2->geometry()), b1), ConfigError);
    CHECK_THROWS_AS(GridField(b1->geometry(), std::vector<double>(3)), ConfigError);
}

TEST_CASE("grid product") {
    auto b = build_basis(DomainGeometry::interval(std::numbers::pi, 8));
    const int k1[] = {1};
    // phi_1^2 = (1 + cos 2x) / pi = phi_0 / sqrt(pi) + phi_2 / sqrt(2 pi)
    const auto p = grid_product(basis_function(b, k1), basis_function(b, k1));
    CHECK(p[0] == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK(p[2] == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-13));
    CHECK(std::abs(p[1]) <= 1e-14);
}
