#include "doctest.h"

#include "fracthin/error.hpp"
#include "fracthin/solver.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracthin;

namespace {

SolverConfig base_config(const DomainGeometry& g, double n = 1.5) {
    SolverConfig cfg;
    cfg.geometry = g;
    cfg.s = 0.5;
    cfg.mobility = MobilityParams::make(n, 0.5, g.dimension(), 1e-6, 1e-6, 1e-8);
    cfg.final_time = 0.01;
    cfg.record_samples = 10;
    return cfg;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("config validation") {
    auto cfg = base_config(DomainGeometry::interval(1.0, 8));
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.final_time = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.rtol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.s = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("rhs diagonal action and stationary states") {
    const auto g = DomainGeometry::interval(2.0, 16);
    auto b = build_basis(g);
    auto cfg = base_config(g);
    cfg.linear_mode = true;
    cfg.mobility.gamma = 0.3;
    const int k[] = {5};
    const auto r = rhs(basis_function(b, k), cfg);
    for (std::size_t j = 0; j < r.size(); ++j) {
        const double expect = j == 5 ? -0.3 * std::pow(b->eigenvalues()[5], 1.5) : 0.0;
        CHECK(r[j] == doctest::Approx(expect).epsilon(1e-14));
    }
    cfg.linear_mode = false;
    SpectralField c(b);
    c.coefficients()[0] = 0.8;
    const auto rc = rhs(c, cfg);
    for (std::size_t j = 0; j < rc.size(); ++j) CHECK(rc[j] == 0.0);
}

TEST_CASE("rhs against dense Galerkin assembly") {
    // Large quadrature grid so the pseudospectral integral is resolved.
    const double L = 1.3;
    const int N = 8;
    const auto g = DomainGeometry::interval(L, N, 64);
    auto b = build_basis(g);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<double> c(N);
    c[0] = 1.0 * std::sqrt(L);
    for (int k = 1; k < N; ++k) c[static_cast<std::size_t>(k)] = 0.15 * nd(rng) / k;
    const SpectralField u(b, c);
    auto cfg = base_config(g);
    cfg.mobility = MobilityParams::make(1.5, 0.5, 1, 1e-2, 1e-2, 1e-2);
    const auto r = rhs(u, cfg);

    // Oracle: direct evaluation on a 10x finer midpoint grid of int f(u) phi_k' phi_j'.
    const int Q = 10 * 64;
    const double h = L / Q;
    auto phi = [&](int k, double x) { return k == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L) * std::cos(k * std::numbers::pi * x / L); };
    auto dphi = [&](int k, double x) {
        const double w = k * std::numbers::pi / L;
        return k == 0 ? 0.0 : -std::sqrt(2.0 / L) * w * std::sin(w * x);
    };
    const auto& p = cfg.mobility;
    std::vector<double> expect(N, 0.0);
    for (int q = 0; q < Q; ++q) {
        const double x = (q + 0.5) * h;
        double uu = 0.0, dp = 0.0;
        for (int k = 0; k < N; ++k) {
            uu += c[static_cast<std::size_t>(k)] * phi(k, x);
            dp += b->multiplier(static_cast<std::size_t>(k), 0.5) * c[static_cast<std::size_t>(k)] * dphi(k, x);
        }
        const double f = mobility(uu, p);  // includes gamma
        for (int j = 0; j < N; ++j) expect[static_cast<std::size_t>(j)] -= h * f * dp * dphi(j, x);
    }
    double scale = 0.0;
    for (double e : expect) scale = std::max(scale, std::abs(e));
    CHECK(r[0] == 0.0);
    CHECK(max_diff(r.coefficients(), expect) <= 1e-8 * scale);
}

TEST_CASE("integrating factor step is exact in linear mode") {
    const auto g = DomainGeometry::interval(1.0, 32);
    auto b = build_basis(g);
    auto cfg = base_config(g);
    cfg.linear_mode = true;
    cfg.mobility.gamma = 1.0;
    std::vector<double> c(b->size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = 1.0 / (1.0 + static_cast<double>(k));
    SolverState st(SpectralField(b, c), 1e-3);
    const auto next = step(st, cfg);
    const double dt = next.t;
    CHECK(dt > 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double exact = c[k] * std::exp(-std::pow(b->eigenvalues()[k], 1.5) * dt);
        CHECK(std::abs(next.u[k] - exact) <= 1e-14 * std::max(1e-300, std::abs(c[k])) + 1e-300);
    }
    const auto fixed = step_fixed(st, cfg, 0.05);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double exact = c[k] * std::exp(-std::pow(b->eigenvalues()[k], 1.5) * 0.05);
        CHECK(std::abs(fixed.u[k] - exact) <= 1e-14 * std::abs(c[k]));
    }
}

TEST_CASE("zero field stays zero") {
    const auto g = DomainGeometry::interval(1.0, 16);
    auto b = build_basis(g);
    auto cfg = base_config(g);
    SolverState st(SpectralField(b), 1e-4);
    const auto next = step(st, cfg);
    for (double v : next.u.coefficients()) CHECK(v == 0.0);
    CHECK(next.t > 0.0);
}

TEST_CASE("step halving contracts with third order") {
    for (auto kind : {StepperKind::Imex, StepperKind::ExplicitAdaptive}) {
        const auto g = DomainGeometry::interval(2.0, 8);
        auto b = build_basis(g);
        auto cfg = base_config(g);
        cfg.stepper = kind;
        cfg.mobility = MobilityParams::make(1.5, 0.5, 1, 1e-6, 1e-6, 0.05);
        const auto u0 = to_coefficients(
            sample(g, [](std::span<const double> x) { return 1.0 + 0.4 * std::cos(std::numbers::pi * x[0] / 2.0); }), b);
        const double T = 0.02;
        auto integrate = [&](int steps) {
            SolverState st(u0);
            for (int i = 0; i < steps; ++i) st = step_fixed(st, cfg, T / steps);
            return std::vector<double>(st.u.coefficients().begin(), st.u.coefficients().end());
        };
        const auto ref = integrate(2560);
        const double e1 = max_diff(integrate(40), ref);
        const double e2 = max_diff(integrate(80), ref);
        const double e3 = max_diff(integrate(160), ref);
        const double order1 = std::log2(e1 / e2);
        const double order2 = std::log2(e2 / e3);
        CHECK(order1 > 2.6);
        CHECK(order2 > 2.6);
        CHECK(order2 < 3.4);
    }
}

TEST_CASE("linear run matches analytic decay") {
    const auto g = DomainGeometry::interval(1.0, 64);
    auto b = build_basis(g);
    auto cfg = base_config(g);
    cfg.linear_mode = true;
    cfg.mobility.gamma = 1.0;
    cfg.final_time = 0.1;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    std::vector<double> c(b->size(), 0.0);
    c[0] = 1.0;
    c[3] = 1.0;
    const SpectralField u0(b, c);
    const auto rec = run(u0, cfg);
    REQUIRE(rec.size() == 11);
    const auto& last = rec.snapshots.back();
    CHECK(last.t == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(last.coefficients[0] == doctest::Approx(1.0).epsilon(1e-15));
    const double exact3 = std::exp(-std::pow(b->eigenvalues()[3], 1.5) * 0.1);
    CHECK(std::abs(last.coefficients[3] - exact3) <= 1e-8 * exact3);

    // Energy identity with f = gamma.
    const auto rep = verify_identities(rec, cfg);
    CHECK(rep.energy_residual <= 1e-6);
}

TEST_CASE("constant datum is stationary") {
    const auto g = DomainGeometry::interval(1.0, 16);
    auto cfg = base_config(g);
    cfg.mobility.gamma = 1e-3;
    const GridField u0(g, std::vector<double>(g.point_count(), 1.0));
    const auto rec = run(u0, cfg);
    const auto rep = verify_identities(rec, cfg);
    CHECK(rep.energy_residual <= 1e-12);
    CHECK(rep.entropy_residual <= 1e-12);
    CHECK(rec.mass.back() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("nonlinear run conserves mass and dissipates energy") {
    const auto g = DomainGeometry::interval(2.0, 32);
    auto cfg = base_config(g);
    cfg.final_time = 0.02;
    cfg.record_samples = 20;
    cfg.snapshot_stride = 5;
    const auto u0 = sample(g, [](std::span<const double> x) {
        const double r = std::abs(x[0] - 1.0) / 0.4;
        return r < 1.0 ? std::pow(1.0 - r * r, 3) + 0.01 : 0.01;
    });
    std::size_t calls = 0;
    const auto rec = run(u0, cfg, [&](std::size_t, double, const SpectralField&) { ++calls; });
    CHECK(calls == 21);
    CHECK(rec.snapshots.size() == 5);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        CHECK(std::abs(rec.mass[i] - rec.mass[0]) <= 1e-12 * rec.mass[0]);
        if (i > 0) {
            CHECK(rec.times[i] > rec.times[i - 1]);
            CHECK(rec.energy[i] <= rec.energy[i - 1] * (1.0 + 1e-8));
            CHECK(rec.dissipation[i] >= rec.dissipation[i - 1]);
        }
    }
    const auto rep = verify_identities(rec, cfg);
    CHECK(rep.energy_residual <= 1e-4);
    CHECK(rec.stats.accepted > 0);
}

TEST_CASE("errors") {
    const auto g = DomainGeometry::interval(2.0, 64);
    auto cfg = base_config(g);
    cfg.dt_min = 1.0;
    cfg.dt_initial = 1.0;
    const auto u0 = sample(g, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(std::numbers::pi * x[0]); });
    CHECK_THROWS_AS(run(u0, cfg), StiffnessError);

    auto ok = base_config(g);
    std::vector<double> neg(g.point_count(), 1.0);
    neg[4] = -0.1;
    CHECK_THROWS_AS(run(GridField(g, neg), ok), DomainError);
    auto other = base_config(DomainGeometry::interval(1.0, 64));
    CHECK_THROWS_AS(run(u0, other), ConfigError);
}
