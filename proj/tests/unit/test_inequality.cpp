#include "doctest.h"

#include "fracthin/error.hpp"
#include "fracthin/inequality.hpp"

#include <cmath>
#include <random>

using namespace fracthin;

namespace {

// (1-x)_+^p satisfies the classical recurrence with alpha = p(beta-1) and this C, with equality.
double matched_constant(double p, double alpha) {
    return std::pow(p, p) * std::pow(alpha, alpha) / std::pow(p + alpha, p + alpha);
}

DecreasingSampler power_family(double p, double hi, std::size_t count = 64) {
    return DecreasingSampler([p](double x) { return x < 1.0 ? std::pow(1.0 - x, p) : 0.0; }, geometric_grid(0.0, hi, count));
}

double example_gamma(double s, double f0, double d) {
    return s < d ? f0 * std::exp(-s / (d * (d - s))) : 0.0;
}

SpectralField random_field(const BasisPtr& b, std::mt19937_64& rng, double decay) {
    std::normal_distribution<double> nd;
    std::vector<double> c(b->size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = nd(rng) * std::pow(1.0 + static_cast<double>(k), -decay);
    return SpectralField(b, c);
}

}  // namespace

TEST_CASE("sampler validation") {
    CHECK_THROWS_AS(DecreasingSampler([](double x) { return x; }, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(DecreasingSampler([](double) { return -1.0; }, {0.0}), DomainError);
    CHECK_THROWS_AS(DecreasingSampler([](double) { return 1.0; }, {1.0, 0.0}), DomainError);
    const auto g = geometric_grid(0.0, 2.0, 64);
    CHECK(g.size() == 64);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    for (std::size_t i = 2; i < g.size(); ++i) CHECK(g[i] - g[i - 1] > g[i - 1] - g[i - 2]);
}

TEST_CASE("classical lemma, beta > 1") {
    const double p = 2.0, beta = 2.0, alpha = p * (beta - 1.0);
    const double C = matched_constant(p, alpha);
    const auto f = power_family(p, 3.0);
    const auto rep = stampacchia_classic(f, 0.0, C, alpha, beta);
    REQUIRE(rep.hypotheses_hold());
    CHECK(rep.prediction_emitted);
    CHECK(rep.predicted == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.predicted >= 1.0 - 1e-12);
    CHECK(rep.asserted);

    for (double q : {1.5, 3.0}) {
        const double a = q * (beta - 1.0);
        const auto r = stampacchia_classic(power_family(q, 3.0), 0.0, matched_constant(q, a), a, beta);
        CHECK(r.hypotheses_hold());
        CHECK(r.predicted >= 1.0);
        CHECK(r.asserted);
    }

    // Constant too small: recurrence fails, no prediction.
    const auto bad = stampacchia_classic(f, 0.0, 0.5 * C, alpha, beta);
    CHECK_FALSE(bad.hypotheses_hold());
    CHECK_FALSE(bad.prediction_emitted);
    CHECK_FALSE(bad.asserted);

    const DecreasingSampler zero([](double) { return 0.0; }, geometric_grid(0.0, 1.0));
    const auto z = stampacchia_classic(zero, 0.0, 1.0, 1.0, 2.0);
    CHECK(z.asserted);
    CHECK(z.predicted == 0.0);

    CHECK(classic_vanishing_distance(1.0, 2.0, 2.0, 2.0) > classic_vanishing_distance(1.0, 1.0, 2.0, 2.0));
    CHECK(classic_vanishing_distance(2.0, 1.0, 2.0, 2.0) > classic_vanishing_distance(1.0, 1.0, 2.0, 2.0));
}

TEST_CASE("classical lemma, beta = 1 and beta < 1") {
    // e^{-x}: sup_t t e^{-t} = 1/e.
    const DecreasingSampler ex([](double x) { return std::exp(-x); }, geometric_grid(0.0, 20.0));
    const auto r1 = stampacchia_classic(ex, 0.0, std::exp(-1.0), 1.0, 1.0);
    REQUIRE(r1.hypotheses_hold());
    CHECK(r1.prediction_kind == "exponential-envelope");
    CHECK(r1.predicted == doctest::Approx(1.0));
    CHECK(r1.asserted);
    CHECK(r1.max_observed <= 1.0);

    // x^-2 with alpha = 1, beta = 1/2: (y-x)/y^2 <= 1/(4x).
    const DecreasingSampler pw([](double x) { return 1.0 / (x * x); }, geometric_grid(0.5, 50.0));
    const auto r2 = stampacchia_classic(pw, 0.5, 0.25, 1.0, 0.5);
    REQUIRE(r2.hypotheses_hold());
    CHECK(r2.prediction_kind == "power-envelope");
    CHECK(r2.predicted == doctest::Approx(2.0));
    CHECK(r2.asserted);

    const DecreasingSampler pw0([](double x) { return 1.0 / (1.0 + x * x); }, geometric_grid(0.0, 50.0));
    const auto r3 = stampacchia_classic(pw0, 0.0, 0.25, 1.0, 0.5);
    CHECK_FALSE(r3.hypotheses_hold());
    CHECK_FALSE(r3.prediction_emitted);
}

TEST_CASE("geometric lemma on the vanishing example") {
    const double nu = 2.0;
    for (double d : {1.0, 0.5, 0.25}) {
        const double f0 = 1.0;
        const DecreasingSampler f([&](double s) { return example_gamma(s, f0, d); }, geometric_grid(0.0, 3.0));
        const auto rep = stampacchia_geometric(f, 0.5 * std::pow(f0, 1.0 - nu), nu);
        REQUIRE(rep.hypotheses_hold());
        CHECK(rep.asserted);
        CHECK(rep.predicted == doctest::Approx(2.0));
        for (std::size_t i = 0; i < f.points().size(); ++i) {
            const double s = f.points()[i];
            if (s >= d) CHECK(f.values()[i] <= 1e-12 * f0);
            CHECK(f.values()[i] <= f0 / d * std::max(d - s, 0.0) + 1e-15);
        }
    }
    const DecreasingSampler decay([](double s) { return std::exp(-s); }, geometric_grid(0.0, 5.0));
    const auto rep = stampacchia_geometric(decay, 0.5, 2.0);
    CHECK_FALSE(rep.hypotheses_hold());
    CHECK_FALSE(rep.asserted);

    const DecreasingSampler f1([](double s) { return example_gamma(s, 1.0, 1.0); }, geometric_grid(0.0, 3.0));
    CHECK_FALSE(stampacchia_geometric(f1, 1.5, 2.0).hypotheses_hold());
    CHECK_FALSE(stampacchia_geometric(f1, 0.5, 1.0).prediction_emitted);

    const DecreasingSampler zero([](double) { return 0.0; }, geometric_grid(0.0, 1.0));
    const auto z = stampacchia_geometric(zero, 0.5, 2.0);
    CHECK(z.asserted);
    CHECK(z.predicted == 0.0);
}

TEST_CASE("inhomogeneous lemma") {
    const double p = 2.0, beta = 2.0, alpha = p * (beta - 1.0);
    const double c0 = matched_constant(p, alpha);
    const double d = classic_vanishing_distance(1.0, c0, alpha, beta);
    const double Rstar = std::pow(2.0, beta / alpha) * d;
    const double a = alpha / (beta - 1.0);
    auto sampler = [&](double R) { return power_family(p, R); };

    const auto at = stampacchia_inhomogeneous(sampler(Rstar * 1.01), Rstar * 1.01, c0, alpha, beta, 0.0);
    CHECK(at.predicted == doctest::Approx(Rstar).epsilon(1e-12));
    const auto cl = stampacchia_classic(sampler(3.0), 0.0, c0, alpha, beta);
    CHECK(at.asserted);
    CHECK(cl.asserted);
    CHECK(at.predicted == doctest::Approx(std::pow(2.0, beta / alpha) * cl.predicted).epsilon(1e-12));

    const double R2 = Rstar * std::pow(2.0, 1.0 / a);
    const auto margin = stampacchia_inhomogeneous(sampler(R2), R2, c0, alpha, beta, 0.0);
    CHECK(margin.hypotheses_hold());
    CHECK(margin.asserted);
    CHECK(margin.deficit == 0.0);

    const double R09 = Rstar * std::pow(0.9, 1.0 / a);
    const auto short_r = stampacchia_inhomogeneous(sampler(R09), R09, c0, alpha, beta, 0.0);
    CHECK_FALSE(short_r.prediction_emitted);
    CHECK_FALSE(short_r.asserted);
    CHECK(short_r.deficit == doctest::Approx(0.1).epsilon(1e-9));

    // A positive source only weakens the recurrence but raises the threshold.
    const auto src = stampacchia_inhomogeneous(sampler(R2), R2, c0, alpha, beta, 0.01);
    CHECK(src.predicted > Rstar);
    CHECK(src.hypotheses[3].passed);
}

TEST_CASE("Gagliardo-Nirenberg ratio") {
    CHECK(gn_theta(1.0, 0.5, 1) == doctest::Approx(0.25));
    for (double b : {0.3, 1.0, 1.7}) {
        for (int d : {1, 2, 3}) {
            const double t = gn_theta(b, 0.5, d);
            CHECK(t >= 0.0);
            CHECK(t < 1.0);
        }
    }
    const auto g = DomainGeometry::interval(2.0, 64);
    auto b = build_basis(g);
    CHECK_THROWS_AS(gn_ratio(SpectralField(b), 1.0, 0.5), DegenerateInputError);
    CHECK_THROWS_AS(gn_ratio(SpectralField(b), 2.0, 0.5), DomainError);
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const auto r = gn_ratio(random_field(b, rng, 0.5 + 0.005 * i), 1.0, 0.5);
        CHECK(std::isfinite(r.ratio));
        worst = std::max(worst, r.ratio);
    }
    MESSAGE("max GN ratio over 500 fields: " << worst);
    CHECK(worst < 10.0);
}

TEST_CASE("interpolation inequalities on random fields") {
    const auto g = DomainGeometry::interval(1.5, 48);
    auto b = build_basis(g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double s = 0.5;
    std::size_t violations = 0;
    for (int i = 0; i < 500; ++i) {
        const auto u = random_field(b, rng, 2.0 * uni(rng));
        const double r0 = 1.5 * uni(rng), r1 = r0 + 0.1 + 2.0 * uni(rng);
        const double r = r0 + (r1 - r0) * uni(rng);
        const double scale = seminorm(u, r);
        if (seminorm_interpolation_gap(u, r0, r, r1) > 1e-10 * scale) ++violations;
        const double beta = 0.5 * (s + 1.0) * uni(rng);
        if (fractional_interpolation_gap(u, beta, s) > 1e-10 * seminorm(u, 2.0 * beta)) ++violations;
    }
    CHECK(violations == 0);
}
