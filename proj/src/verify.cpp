#include "fracthin/error.hpp"
#include "fracthin/experiment.hpp"
#include "fracthin/inequality.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace fracthin {

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

VerifyCheck make(std::string name, double value, double tol, std::string detail = {}) {
    return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

SpectralField random_field(const BasisPtr& b, std::mt19937_64& rng, double decay) {
    std::normal_distribution<double> nd;
    std::vector<double> c(b->size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        double w = 1.0;
        for (int m : b->multi_index(k)) w += m * m;
        c[k] = nd(rng) * std::pow(w, -0.5 * decay);
    }
    return SpectralField(b, c);
}

double grid_dot(const GridField& a, const GridField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.geometry().cell_volume();
}

// Cosine eigenfunction sampled from its closed form.
GridField sampled_mode(const DomainGeometry& g, const std::vector<int>& k) {
    return sample(g, [&](std::span<const double> x) {
        double v = 1.0;
        for (int a = 0; a < g.dimension(); ++a) {
            const double L = g.axis(a).length;
            const int m = k[static_cast<std::size_t>(a)];
            v *= m == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L) * std::cos(m * std::numbers::pi * x[static_cast<std::size_t>(a)] / L);
        }
        return v;
    });
}

VerifyCheck check_eigen(const VerifyOptions& opt) {
    double worst = 0.0;
    const double s = 0.37;
    for (const auto& g : {DomainGeometry::interval(1.3, 32), DomainGeometry::box({1.0, 1.5}, {8, 8})}) {
        auto b = opt.perturb_eigenvalue ? EigenBasis::with_perturbed_eigenvalue(g, 3, 1.01) : build_basis(g);
        for (std::size_t flat = 0; flat < 20; ++flat) {
            const auto k = b->multi_index(flat);
            double lam = 0.0;
            for (int a = 0; a < g.dimension(); ++a) {
                const double w = k[static_cast<std::size_t>(a)] * std::numbers::pi / g.axis(a).length;
                lam += w * w;
            }
            const GridField phi = sampled_mode(g, k);
            const GridField got = to_grid(frac_laplacian(to_coefficients(phi, b), s));
            const double scale = std::pow(lam, s);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                worst = std::max(worst, std::abs(got[i] - scale * phi[i]) / std::max(1.0, scale));
            }
        }
    }
    return make("spectral.eigenfunctions", worst, 1e-12, "20 modes, d = 1 and 2");
}

VerifyCheck check_parseval(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 1);
    double worst = 0.0;
    int i = 0;
    for (const auto& g : {DomainGeometry::interval(1.7, 40), DomainGeometry::box({1.0, 2.0}, {12, 10})}) {
        auto b = opt.perturb_eigenvalue ? EigenBasis::with_perturbed_eigenvalue(g, 3, 1.01) : build_basis(g);
        for (int rep = 0; rep < 50; ++rep, ++i) {
            const auto u = random_field(b, rng, 2.0);
            const GridField w = to_grid(u);
            worst = std::max(worst, rel(grid_dot(w, w), l2_norm(u) * l2_norm(u)));
            double grad2 = 0.0;
            for (const auto& gi : gradient(u)) grad2 += grid_dot(gi, gi);
            worst = std::max(worst, rel(grad2, seminorm(u, 1.0) * seminorm(u, 1.0)));
        }
    }
    return make("spectral.parseval", worst, 1e-10, "L2 and H1 on 100 random fields");
}

VerifyCheck check_ibp(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 2);
    double worst = 0.0;
    for (const auto& g : {DomainGeometry::interval(1.1, 40), DomainGeometry::box({1.0, 1.0}, {10, 12})}) {
        auto b = build_basis(g);
        for (int rep = 0; rep < 50; ++rep) {
            const auto u = random_field(b, rng, 2.0), v = random_field(b, rng, 2.0);
            const double s = 0.2 + 0.012 * rep;
            const double lhs = grid_dot(to_grid(frac_laplacian(u, s)), to_grid(v));
            const double rhs = inner_product(frac_laplacian(u, 0.5 * s), frac_laplacian(v, 0.5 * s));
            worst = std::max(worst, std::abs(lhs - rhs) / (seminorm(u, s) * seminorm(v, s) + 1e-300));
        }
    }
    return make("spectral.integration_by_parts", worst, 1e-10, "100 random pairs");
}

VerifyCheck check_entropy() {
    double worst = 0.0;
    for (double n : {1.2, 1.5, 2.5}) {
        const auto p = MobilityParams::make(n, 0.5, 1, 1e-3, 1e-2, 1e-4);
        for (double z = 0.05; z < 5.0; z *= 1.6) {
            const double h = 1e-3 * z;
            const double g2 = (entropy_reg(z + h, p) - 2.0 * entropy_reg(z, p) + entropy_reg(z - h, p)) / (h * h);
            worst = std::max(worst, rel(g2, 1.0 / mobility(z, p)));
        }
    }
    return make("mobility.entropy_second_derivative", worst, 1e-4, "G'' = 1/f by central differences");
}

std::vector<VerifyCheck> check_lemmas() {
    std::vector<VerifyCheck> out;
    {
        const double p = 2.0, beta = 2.0, alpha = 2.0;
        const double C = std::pow(p, p) * std::pow(alpha, alpha) / std::pow(p + alpha, p + alpha);
        const DecreasingSampler f([](double x) { return x < 1.0 ? (1.0 - x) * (1.0 - x) : 0.0; }, geometric_grid(0.0, 3.0));
        const auto rep = stampacchia_classic(f, 0.0, C, alpha, beta);
        const bool ok = rep.hypotheses_hold() && rep.asserted && rep.predicted >= 1.0 - 1e-12;
        out.push_back({"lemma.classic", ok, rep.predicted, 1.0, "predicted vanishing point vs true point 1"});

        const auto inh = stampacchia_inhomogeneous(f, 2.0 * 1.01, C, alpha, beta, 0.0);
        const double expect = std::pow(2.0, beta / alpha) * rep.predicted;
        const bool ok2 = inh.asserted && std::abs(inh.predicted - expect) <= 1e-12 * expect;
        out.push_back({"lemma.inhomogeneous", ok2, inh.predicted, expect, "threshold at zero source vs classical distance"});
    }
    {
        const DecreasingSampler f([](double s) { return s < 1.0 ? std::exp(-s / (1.0 - s)) : 0.0; }, geometric_grid(0.0, 3.0));
        const auto rep = stampacchia_geometric(f, 0.5, 2.0);
        double beyond = 0.0;
        for (std::size_t i = 0; i < f.points().size(); ++i) {
            if (f.points()[i] >= 1.0) beyond = std::max(beyond, f.values()[i]);
        }
        const bool ok = rep.hypotheses_hold() && rep.asserted && beyond <= 1e-12;
        out.push_back({"lemma.geometric", ok, beyond, 1e-12, "example vanishes beyond d = 1"});
    }
    return out;
}

std::vector<VerifyCheck> check_interpolation(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto g = DomainGeometry::interval(1.5, 48);
    auto b = build_basis(g);
    double w1 = -1.0, w2 = -1.0;
    for (int i = 0; i < 500; ++i) {
        const auto u = random_field(b, rng, 2.0 * uni(rng));
        const double r0 = 1.5 * uni(rng), r1 = r0 + 0.1 + 2.0 * uni(rng);
        const double r = r0 + (r1 - r0) * uni(rng);
        w1 = std::max(w1, seminorm_interpolation_gap(u, r0, r, r1) / seminorm(u, r));
        const double beta = 0.75 * uni(rng);
        w2 = std::max(w2, fractional_interpolation_gap(u, beta, 0.5) / seminorm(u, 2.0 * beta));
    }
    return {make("interp.seminorm", w1, 1e-10, "500 random fields"), make("interp.fractional", w2, 1e-10, "500 random fields")};
}

VerifyCheck check_linear_decay() {
    SolverConfig cfg;
    cfg.geometry = DomainGeometry::interval(1.0, 64);
    cfg.mobility = MobilityParams::make(1.5, 0.5, 1, 0.0, 0.0, 1.0);
    cfg.linear_mode = true;
    cfg.final_time = 0.1;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    cfg.record_samples = 4;
    auto b = build_basis(cfg.geometry);
    std::vector<double> c(b->size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = 1.0 / (1.0 + static_cast<double>(k));
    const auto rec = run(SpectralField(b, c), cfg);
    double worst = 0.0;
    const auto& last = rec.snapshots.back().coefficients;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double exact = c[k] * std::exp(-std::pow(b->eigenvalues()[k], 1.5) * 0.1);
        if (exact > 1e-250) worst = std::max(worst, std::abs(last[k] - exact) / exact);
    }
    return make("solver.linear_decay", worst, 1e-8, "N = 64, T = 0.1, all modes");
}

ExperimentConfig reference_config(int N, double T, double gamma) {
    ExperimentConfig c;
    c.lengths = {2.0};
    c.modes = {N};
    c.n = 1.5;
    c.s = 0.5;
    c.epsilon = 1e-6;
    c.delta = 1e-6;
    c.gamma = gamma;
    c.solver.final_time = T;
    c.solver.record_samples = 50;
    c.solver.snapshot_stride = 50;
    c.initial.family = "compact-bump";
    c.initial.radius = 0.1;
    c.initial.power = 3.0;
    c.resolve();
    return c;
}

std::vector<VerifyCheck> check_nonlinear(bool full) {
    std::vector<VerifyCheck> out;
    const auto small = execute_run(reference_config(32, 0.02, 1e-8));
    if (small.status != "ok") {
        out.push_back({"solver.mass_energy", false, 0.0, 0.0, small.error_message});
        return out;
    }
    out.push_back(make("solver.mass", small.mass_drift, 1e-10, "N = 32 bump run"));
    out.push_back(make("solver.energy_monotone", small.energy_max_increase, 1e-8, "N = 32 bump run"));
    if (full) {
        const auto a = execute_run(reference_config(128, 0.05, 1e-8));
        const auto b = execute_run(reference_config(256, 0.05, 1e-8));
        if (a.status != "ok" || b.status != "ok") {
            out.push_back({"solver.resolution", false, 0.0, 1e-4, a.error_message + b.error_message});
        } else {
            out.push_back(make("solver.resolution", rel(a.record.energy.back(), b.record.energy.back()), 1e-4,
                               "energy(T) at N = 128 vs 256, T = 0.05"));
        }
        const auto g = execute_run(reference_config(64, 0.05, 1e-3));
        out.push_back(make("solver.entropy_identity", g.status == "ok" ? g.identities.entropy_residual : INFINITY, 1e-2,
                           "gamma = 1e-3, N = 64"));
    }
    return out;
}

}  // namespace

std::vector<VerifyCheck> run_verify(const VerifyOptions& opt) {
    std::vector<VerifyCheck> out;
    auto guarded = [&](const std::string& name, const std::function<void()>& f) {
        try {
            f();
        } catch (const std::exception& e) {
            out.push_back({name, false, 0.0, 0.0, std::string("exception: ") + e.what()});
        }
    };
    guarded("spectral.eigenfunctions", [&] { out.push_back(check_eigen(opt)); });
    guarded("spectral.parseval", [&] { out.push_back(check_parseval(opt)); });
    guarded("spectral.integration_by_parts", [&] { out.push_back(check_ibp(opt)); });
    guarded("mobility.entropy_second_derivative", [&] { out.push_back(check_entropy()); });
    guarded("lemma", [&] {
        for (auto& c : check_lemmas()) out.push_back(std::move(c));
    });
    guarded("interp", [&] {
        for (auto& c : check_interpolation(opt)) out.push_back(std::move(c));
    });
    guarded("solver.linear_decay", [&] { out.push_back(check_linear_decay()); });
    guarded("solver", [&] {
        for (auto& c : check_nonlinear(opt.level == VerifyLevel::Full)) out.push_back(std::move(c));
    });
    return out;
}

}  // namespace fracthin
