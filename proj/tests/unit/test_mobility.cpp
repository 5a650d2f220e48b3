#include "doctest.h"

#include "fracthin/error.hpp"
#include "fracthin/mobility.hpp"

#include <cmath>
#include <numbers>

using namespace fracthin;

namespace {

// Composite Simpson with a fixed, fine partition.
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// G(z) = int_1^z (z - t) / f(t) dt on a substituted variable t = tau^2.
double entropy_oracle(double z, const MobilityParams& p) {
    auto g = [&](double tau) {
        const double t = tau * tau;
        return (z - t) * 2.0 * tau / mobility(t, p);
    };
    return simpson(g, 1.0, std::sqrt(z), 400000);
}

}  // namespace

TEST_CASE("parameter validation") {
    auto p = MobilityParams::make(1.5, 0.5, 1, 1e-6, 1e-6, 1e-8);
    CHECK(p.alpha == doctest::Approx(3.5));
    CHECK_NOTHROW(p.validate());
    p.alpha = 3.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    auto q = MobilityParams::make(0.5, 0.5, 1);
    CHECK_THROWS_AS(q.validate(), ConfigError);
    auto r = MobilityParams::make(1.5, 1.0, 1);
    CHECK_THROWS_AS(r.validate(), ConfigError);
    auto neg = MobilityParams::make(1.5, 0.5, 1, -1.0);
    CHECK_THROWS_AS(neg.validate(), ConfigError);
    CHECK(MobilityParams::existence_exponent_bound(0.5, 1) == std::numeric_limits<double>::infinity());
    CHECK(MobilityParams::existence_exponent_bound(0.25, 2) == doctest::Approx((2 + 1.5) / 1.5));
    CHECK(MobilityParams::alpha_lower_bound(1.5, 0.5, 2) == doctest::Approx(2.0 + 4.0 / 1.0));

    const auto lift = LiftParams::defaults(MobilityParams::make(1.5, 0.5, 1, 1e-6));
    CHECK(lift.theta1 == doctest::Approx(1.0 / 3.0));
    CHECK(lift.theta2 == 1.0);
    LiftParams bad{0.7, 1.0};
    CHECK_THROWS_AS(bad.validate(MobilityParams::make(1.5, 0.5, 1, 1e-6)), ConfigError);
}

TEST_CASE("mobility values and bounds") {
    const auto pure = MobilityParams::make(1.5, 0.5, 1);
    CHECK(mobility(2.0, pure) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(mobility(-1.0, pure) == 0.0);
    CHECK_THROWS_AS(mobility(std::nan(""), pure), DomainError);

    const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-3, 1e-2, 1e-4);
    CHECK(mobility(-1.0, p) == p.gamma);
    // Direct (unsimplified) formula as oracle.
    for (double z : {1e-3, 0.1, 0.9, 3.0, 40.0}) {
        const double direct = std::pow(z, p.n + p.alpha) /
                                  (std::pow(z, p.alpha) + p.epsilon * std::pow(z, p.n) +
                                   p.delta * std::pow(z, p.n + p.alpha)) +
                              p.gamma;
        CHECK(mobility(z, p) == doctest::Approx(direct).epsilon(1e-13));
    }
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const double z = -5.0 + 1e4 * std::pow(static_cast<double>(i) / 9999.0, 3.0);
        const double f = mobility(z, p);
        if (f < p.gamma || f > 1.0 / p.delta + p.gamma) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("mobility derivative") {
    const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-3, 1e-2, 1e-4);
    CHECK(mobility_prime(0.0, p) == 0.0);
    CHECK(mobility_prime(-2.0, p) == 0.0);
    for (double z = 0.01; z <= 10.0; z *= 1.37) {
        const double h = 1e-5 * z;
        const double fd = (mobility(z + h, p) - mobility(z - h, p)) / (2.0 * h);
        CHECK(mobility_prime(z, p) == doctest::Approx(fd).epsilon(1e-7));
    }
    // Near 0: f' ~ alpha z^{alpha-1} / eps.
    const double z = 1e-6;
    CHECK(mobility_prime(z, p) == doctest::Approx(p.alpha * std::pow(z, p.alpha - 1.0) / p.epsilon).epsilon(1e-6));

    // f'/z^{n-1} stays below twice its large-z value (n/(1+delta z^n)^2 ... taken at z -> infinity of the eps-free part).
    const auto q = MobilityParams::make(1.5, 0.5, 1, 1e-3, 0.0, 0.0);
    double ratio_max = 0.0;
    for (double zz = 1e-4; zz <= 100.0; zz *= 1.05) ratio_max = std::max(ratio_max, mobility_prime(zz, q) / std::pow(zz, q.n - 1.0));
    CHECK(std::isfinite(ratio_max));
    CHECK(ratio_max <= 2.0 * q.n * 1.0 + 2.0 * q.alpha);
}

TEST_CASE("convergence to the power law") {
    const double z = 0.7;
    double prev = 1.0;
    for (double e : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const auto p = MobilityParams::make(1.5, 0.5, 1, e, e, e);
        const double err = std::abs(mobility(z, p) - std::pow(z, 1.5));
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev <= 1e-6);
}

TEST_CASE("entropy G0") {
    for (double n : {1.0, 1.3, 1.5, 2.0, 2.7}) CHECK(entropy_G0(1.0, n) == doctest::Approx(0.0).scale(1.0));
    CHECK(entropy_G0(std::numbers::e, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(entropy_G0(0.0, 1.5) == 2.0);
    CHECK(entropy_G0(0.0, 1.0) == 1.0);
    CHECK(std::isinf(entropy_G0(0.0, 2.0)));
    CHECK(std::isinf(entropy_G0(-0.1, 1.5)));
    // The closed form tends to the limit value.
    CHECK(entropy_G0(1e-12, 1.5) == doctest::Approx(2.0).epsilon(1e-5));
    // G0'' = z^{-n}
    for (double n : {1.0, 1.4, 2.0, 2.5}) {
        for (double z : {0.2, 1.0, 3.5}) {
            const double h = 1e-4 * z;
            const double d2 = (entropy_G0(z + h, n) - 2.0 * entropy_G0(z, n) + entropy_G0(z - h, n)) / (h * h);
            CHECK(d2 == doctest::Approx(std::pow(z, -n)).epsilon(1e-5));
        }
    }
}

TEST_CASE("regularized entropy") {
    SUBCASE("gamma = 0 correction terms") {
        const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-2, 3e-2, 0.0);
        CHECK(entropy_reg(1.0, p) == 0.0);
        CHECK(std::isinf(entropy_reg(0.0, p)));
        for (double z : {0.05, 0.4, 2.0, 9.0}) {
            // Oracle: quadrature of (z - t)/f_{eps,delta}(t).
            const double g = entropy_oracle(z, p);
            CHECK(entropy_reg(z, p) == doctest::Approx(g).epsilon(1e-10));
            const double a = p.alpha;
            const double corr = p.epsilon / (a - 1.0) * (std::pow(z, 2.0 - a) / (a - 2.0) - 1.0 / (a - 2.0) + z - 1.0) +
                                0.5 * p.delta * (z - 1.0) * (z - 1.0);
            CHECK(entropy_reg(z, p) - entropy_G0(z, p.n) == doctest::Approx(corr).epsilon(1e-10));
        }
    }
    SUBCASE("gamma > 0 against composite Simpson") {
        const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-6, 1e-6, 1e-3);
        CHECK(entropy_reg(1.0, p) == 0.0);
        for (double z : {0.1, 2.0, 10.0}) {
            const double g = entropy_oracle(z, p);
            CHECK(std::abs(entropy_reg(z, p) - g) <= 1e-8 * std::max(1.0, std::abs(g)));
        }
        // Below zero f = gamma: G(z) = G(0) + G'(0) z + z^2 / (2 gamma).
        const double g0 = entropy_reg(0.0, p);
        const double h = 1e-4;
        const double gp0 = (entropy_reg(h, p) - entropy_reg(-h, p)) / (2.0 * h);
        CHECK(entropy_reg(-0.5, p) == doctest::Approx(g0 - 0.5 * gp0 + 0.125 / p.gamma).epsilon(1e-6));
    }
    SUBCASE("second derivative equals 1/f") {
        const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-4, 1e-4, 1e-3);
        for (double z = 0.1; z <= 10.0; z *= 1.6) {
            const double h = 1e-3 * z;
            const double zs[] = {z - h, z, z + h};
            double g[3];
            for (int i = 0; i < 3; ++i) g[i] = entropy_reg(zs[i], p);
            const double d2 = (g[0] - 2.0 * g[1] + g[2]) / (h * h);
            CHECK(d2 == doctest::Approx(1.0 / mobility(z, p)).epsilon(1e-6 * 1e2));
        }
    }
    SUBCASE("convexity") {
        const auto p = MobilityParams::make(1.3, 0.5, 1, 1e-4, 1e-4, 1e-4);
        for (double z = 0.05; z < 20.0; z *= 1.3) {
            const double h = 0.05 * z;
            CHECK(entropy_reg(z - h, p) + entropy_reg(z + h, p) - 2.0 * entropy_reg(z, p) >= 0.0);
            CHECK(entropy_G0(z - h, 1.3) + entropy_G0(z + h, 1.3) - 2.0 * entropy_G0(z, 1.3) >= 0.0);
        }
    }
}

TEST_CASE("entropy integral") {
    const auto g = DomainGeometry::box({1.0, 2.0}, {4, 4});
    const auto p = MobilityParams::make(1.5, 0.5, 2, 1e-4, 1e-4, 1e-3);
    const GridField ones(g, std::vector<double>(g.point_count(), 1.0));
    CHECK(entropy_integral(ones, p, EntropyKind::Regularized) == doctest::Approx(0.0).scale(1.0));
    CHECK(entropy_integral(ones, p, EntropyKind::G0) == 0.0);
    const GridField zeros(g);
    CHECK(entropy_integral(zeros, p, EntropyKind::G0) == doctest::Approx(2.0 * 2.0).epsilon(1e-14));
    const GridField threes(g, std::vector<double>(g.point_count(), 3.0));
    CHECK(entropy_integral(threes, p, EntropyKind::G0) == doctest::Approx(2.0 * entropy_G0(3.0, 1.5)).epsilon(1e-13));
    CHECK(entropy_integral(threes, p, EntropyKind::Regularized) ==
          doctest::Approx(2.0 * entropy_reg(3.0, p)).epsilon(1e-10));
    std::vector<double> v(g.point_count(), 1.0);
    v[3] = -0.01;
    CHECK(std::isinf(entropy_integral(GridField(g, v), p, EntropyKind::G0)));
    auto p0 = p;
    p0.gamma = 0.0;
    CHECK(std::isinf(entropy_integral(GridField(g, v), p0, EntropyKind::Regularized)));
    CHECK(std::isfinite(entropy_integral(GridField(g, v), p, EntropyKind::Regularized)));
}

TEST_CASE("lifted initial datum") {
    const auto g = DomainGeometry::interval(1.0, 8);
    const GridField u0 = sample(g, [](std::span<const double> x) { return x[0] * x[0]; });
    const auto none = MobilityParams::make(1.5, 0.5, 1);
    const auto same = lift_initial_datum(u0, none, LiftParams::defaults(none));
    for (std::size_t i = 0; i < u0.size(); ++i) CHECK(same[i] == u0[i]);

    const auto p = MobilityParams::make(1.5, 0.5, 1, 1e-4, 0.0);
    const auto lifted = lift_initial_datum(u0, p, LiftParams{1.0, 1.0});
    CHECK(lifted.min() == doctest::Approx(u0.min() + 1e-4).epsilon(1e-14));

    const auto q = MobilityParams::make(1.5, 0.5, 1, 1e-6, 1e-5);
    const LiftParams l = LiftParams::defaults(q);
    const auto lq = lift_initial_datum(u0, q, l);
    for (std::size_t i = 0; i < u0.size(); ++i) CHECK(lq[i] >= u0[i] + std::pow(1e-6, l.theta1) + 1e-5 - 1e-15);

    std::vector<double> v(g.point_count(), 0.5);
    v[0] = -1e-3;
    CHECK_THROWS_AS(lift_initial_datum(GridField(g, v), p, LiftParams{}), DomainError);
}

TEST_CASE("adaptive simpson") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return x < 0.5 ? 0.0 : 1.0 / (x - 0.5); }, 0.0, 1.0, 1e-10, 12),
                    NumericError);
}
