#include "fracthin/solver.hpp"

#include "fracthin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracthin {

namespace {

// Negative real-axis stability interval of the Bogacki-Shampine third-order method.
constexpr double kStabilityInterval = 2.5;

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("solver config: " + what);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

void SolverConfig::validate() const {
    require(final_time > 0.0 && std::isfinite(final_time), "final_time must be positive");
    require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
    require(rtol > 0.0 && atol > 0.0, "tolerances must be positive");
    require(dt_initial > 0.0 && dt_min > 0.0 && dt_min <= dt_initial, "need 0 < dt_min <= dt_initial");
    require(safety > 0.0 && safety <= 1.0, "safety must lie in (0,1]");
    require(record_samples >= 1, "record_samples must be >= 1");
    require(snapshot_stride >= 1, "snapshot_stride must be >= 1");
    require(mobility.s == s, "mobility.s differs from s");
    require(mobility.dimension == geometry.dimension(), "mobility.dimension differs from the geometry");
    mobility.validate();
}

double explicit_step_limit(double max_mobility, const EigenBasis& basis, double s, double safety) {
    const double rho = max_mobility * std::pow(basis.max_eigenvalue(), s + 1.0);
    if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
    return safety * kStabilityInterval / rho;
}

GalerkinOperator::GalerkinOperator(BasisPtr basis, const SolverConfig& cfg)
    : basis_(std::move(basis)), cfg_(cfg) {
    if (!(basis_->geometry() == cfg_.geometry)) throw ConfigError("GalerkinOperator: basis does not match geometry");
    const std::size_t n = basis_->size();
    const std::size_t m = cfg_.geometry.point_count();
    diagonal_.resize(n);
    frac_multiplier_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        diagonal_[k] = -cfg_.mobility.gamma * basis_->multiplier(k, cfg_.s + 1.0);
        frac_multiplier_[k] = basis_->multiplier(k, cfg_.s);
    }
    p_.resize(n);
    u_grid_.resize(m);
    mob_grid_.resize(m);
    grad_p_.assign(static_cast<std::size_t>(cfg_.geometry.dimension()), std::vector<double>(m));
}

void GalerkinOperator::flux(std::span<const double> c, std::span<double> out, double t) {
    std::fill(out.begin(), out.end(), 0.0);
    last_max_mobility_ = 0.0;
    last_flux_dissipation_ = 0.0;
    if (cfg_.linear_mode) return;

    basis_->synthesize(c, u_grid_);
    for (std::size_t k = 0; k < p_.size(); ++k) p_[k] = frac_multiplier_[k] * c[k];
    double fmax = 0.0;
    for (std::size_t i = 0; i < u_grid_.size(); ++i) {
        const double z = u_grid_[i];
        if (!std::isfinite(z)) throw BlowUpError(t, max_abs(u_grid_), "solver: non-finite state");
        mob_grid_[i] = mobility_degenerate(z, cfg_.mobility);
        fmax = std::max(fmax, mob_grid_[i]);
    }
    double diss = 0.0;
    const int d = cfg_.geometry.dimension();
    for (int a = 0; a < d; ++a) {
        auto& g = grad_p_[static_cast<std::size_t>(a)];
        basis_->synthesize_derivative(a, p_, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            diss += mob_grid_[i] * g[i] * g[i];
            g[i] *= -mob_grid_[i];
        }
        basis_->accumulate_derivative_projection(a, g, out);
    }
    last_max_mobility_ = fmax;
    last_flux_dissipation_ = diss * cfg_.geometry.cell_volume();
    if (!all_finite(out) || !std::isfinite(last_flux_dissipation_)) {
        throw BlowUpError(t, max_abs(u_grid_), "solver: non-finite flux");
    }
}

SpectralField rhs(const SpectralField& u, const SolverConfig& cfg) {
    GalerkinOperator op(u.basis_ptr(), cfg);
    std::vector<double> out(u.size());
    op.flux(u.coefficients(), out, 0.0);
    const auto diag = op.diagonal();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += diag[k] * u[k];
    out[0] = 0.0;
    return SpectralField(u.basis_ptr(), std::move(out));
}

namespace {

// Bogacki-Shampine 3(2) with FSAL. In IMEX mode the diagonal part is removed by
// the integrating factor exp(D t) (Lawson form); in explicit mode it stays in the
// stage derivatives.
class Stepper {
public:
    Stepper(BasisPtr basis, const SolverConfig& cfg)
        : op_(std::move(basis), cfg), cfg_(cfg), n_(op_.basis().size()) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &y_, &yn_, &e1_, &e2_, &e3_, &e4_}) v->resize(n_);
        imex_ = cfg.stepper == StepperKind::Imex;
    }

    GalerkinOperator& op() noexcept { return op_; }

    // Stage derivative N(y) at time t: flux plus, in explicit mode, the diagonal.
    void eval(std::span<const double> y, std::span<double> k, double t, StepStatistics& stats) {
        op_.flux(y, k, t);
        if (!imex_) {
            const auto diag = op_.diagonal();
            for (std::size_t i = 0; i < n_; ++i) k[i] += diag[i] * y[i];
        }
        k[0] = 0.0;
        ++stats.rhs_evaluations;
    }

    // Prepares k1 = N(c) at the current state.
    void start(std::span<const double> c, double t, StepStatistics& stats) {
        eval(c, k1_, t, stats);
        mob_at_start_ = op_.last_max_mobility();
        flux_diss_ = op_.last_flux_dissipation();
    }

    double step_limit() const {
        double fmax = mob_at_start_;
        if (!imex_) fmax += cfg_.mobility.gamma;
        return explicit_step_limit(fmax, op_.basis(), cfg_.s, cfg_.safety);
    }

    double flux_dissipation() const noexcept { return flux_diss_; }

    // Attempts one step of size h from c (k1 must hold N(c)). Writes the candidate
    // into yn_ and returns the scaled error norm. k4 = N(yn) is computed for FSAL.
    double attempt(std::span<const double> c, double t, double h, StepStatistics& stats) {
        const auto diag = op_.diagonal();
        for (std::size_t i = 0; i < n_; ++i) {
            const double dd = imex_ ? diag[i] : 0.0;
            e1_[i] = std::exp(dd * 0.5 * h);
            e2_[i] = std::exp(dd * 0.75 * h);
            e3_[i] = std::exp(dd * 0.25 * h);
            e4_[i] = std::exp(dd * h);
        }
        // Y2 = E(h/2) (c + h/2 k1)
        for (std::size_t i = 0; i < n_; ++i) y_[i] = e1_[i] * (c[i] + 0.5 * h * k1_[i]);
        eval(y_, k2_, t + 0.5 * h, stats);
        // Y3 = E(3h/4) c + 3h/4 E(h/4) k2
        for (std::size_t i = 0; i < n_; ++i) y_[i] = e2_[i] * c[i] + 0.75 * h * e3_[i] * k2_[i];
        eval(y_, k3_, t + 0.75 * h, stats);
        // y_{n+1} = E(h) c + h (2/9 E(h) k1 + 1/3 E(h/2) k2 + 4/9 E(h/4) k3)
        for (std::size_t i = 0; i < n_; ++i) {
            yn_[i] = e4_[i] * c[i] +
                     h * (2.0 / 9.0 * e4_[i] * k1_[i] + 1.0 / 3.0 * e1_[i] * k2_[i] + 4.0 / 9.0 * e3_[i] * k3_[i]);
        }
        yn_[0] = c[0];
        if (!all_finite(yn_)) return std::numeric_limits<double>::infinity();
        try {
            eval(yn_, k4_, t + h, stats);
        } catch (const BlowUpError&) {
            return std::numeric_limits<double>::infinity();
        }
        // Difference to the embedded second-order solution.
        double acc = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * ((2.0 / 9.0 - 7.0 / 24.0) * e4_[i] * k1_[i] + (1.0 / 3.0 - 1.0 / 4.0) * e1_[i] * k2_[i] +
                                  (4.0 / 9.0 - 1.0 / 3.0) * e3_[i] * k3_[i] - 1.0 / 8.0 * k4_[i]);
            const double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(c[i]), std::abs(yn_[i]));
            acc += (e / sc) * (e / sc);
        }
        return std::sqrt(acc / static_cast<double>(n_));
    }

    // Promotes the candidate after acceptance.
    void accept(std::span<double> c) {
        std::copy(yn_.begin(), yn_.end(), c.begin());
        std::swap(k1_, k4_);
        mob_at_start_ = op_.last_max_mobility();
        flux_diss_ = op_.last_flux_dissipation();
    }

private:
    GalerkinOperator op_;
    SolverConfig cfg_;
    std::size_t n_;
    bool imex_ = true;
    double mob_at_start_ = 0.0;
    double flux_diss_ = 0.0;
    std::vector<double> k1_, k2_, k3_, k4_, y_, yn_, e1_, e2_, e3_, e4_;
};

// Mean of c(t)^2 over a step from its end values. Exact when c decays
// exponentially; the trapezoid rule is used when c changes sign.
double step_mean_square(double c0, double c1) {
    const double a = c0 * c0;
    const double b = c1 * c1;
    if (!(c0 * c1 > 0.0)) return 0.5 * (a + b);
    const double x = 2.0 * std::log(std::abs(c0 / c1));
    if (x == 0.0) return a;
    return b * std::expm1(x) / x;
}

double next_factor(double err) {
    if (err == 0.0) return 5.0;
    if (!std::isfinite(err)) return 0.25;
    return std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.2, 5.0);
}

// Advances by one accepted step no longer than `hmax`; updates t, c, dt and stats.
// Returns the step actually taken.
double advance(Stepper& st, std::vector<double>& c, double& t, double& dt, double hmax, StepStatistics& stats) {
    double h = std::min({dt, hmax, st.step_limit()});
    for (;;) {
        if (h < st.op().config().dt_min && h < hmax) {
            throw StiffnessError(t, h, "solver: step size " + std::to_string(h) + " below dt_min at t = " +
                                           std::to_string(t));
        }
        const double err = st.attempt(c, t, h, stats);
        if (err <= 1.0) {
            st.accept(c);
            t += h;
            ++stats.accepted;
            // Keep the proposal when the step was shortened only to hit hmax.
            const double proposed = h * next_factor(err);
            dt = (h < dt) ? std::max(dt, proposed) : proposed;
            return h;
        }
        ++stats.rejected;
        h *= next_factor(err);
        dt = h;
    }
}

}  // namespace

SolverState step(const SolverState& state, const SolverConfig& cfg) {
    cfg.validate();
    Stepper st(state.u.basis_ptr(), cfg);
    SolverState out = state;
    std::vector<double> c(state.u.coefficients().begin(), state.u.coefficients().end());
    st.start(c, out.t, out.stats);
    double dt = state.dt > 0.0 ? state.dt : cfg.dt_initial;
    advance(st, c, out.t, dt, std::numeric_limits<double>::infinity(), out.stats);
    out.dt = dt;
    out.u = SpectralField(state.u.basis_ptr(), std::move(c));
    return out;
}

SolverState step_fixed(const SolverState& state, const SolverConfig& cfg, double dt) {
    if (!(dt > 0.0)) throw ConfigError("step_fixed: dt must be positive");
    Stepper st(state.u.basis_ptr(), cfg);
    SolverState out = state;
    std::vector<double> c(state.u.coefficients().begin(), state.u.coefficients().end());
    st.start(c, out.t, out.stats);
    const double err = st.attempt(c, out.t, dt, out.stats);
    if (!std::isfinite(err)) throw BlowUpError(out.t, max_abs(c), "step_fixed: non-finite state");
    st.accept(c);
    out.t += dt;
    out.dt = dt;
    ++out.stats.accepted;
    out.u = SpectralField(state.u.basis_ptr(), std::move(c));
    return out;
}

RunRecord run(const GridField& u0, const SolverConfig& cfg, const SampleObserver& observer) {
    if (u0.min() < 0.0) throw DomainError("run: initial datum has negative nodes");
    return run(to_coefficients(u0, build_basis(cfg.geometry)), cfg, observer);
}

RunRecord run(const SpectralField& u0, const SolverConfig& cfg, const SampleObserver& observer) {
    cfg.validate();
    if (!(u0.basis().geometry() == cfg.geometry)) throw ConfigError("run: initial field is not on the configured geometry");
    const BasisPtr basis = u0.basis_ptr();
    const EigenBasis& B = *basis;
    const std::size_t n = B.size();
    const double gamma = cfg.mobility.gamma;

    std::vector<double> w_s(n), w_s1(n), w_2s1(n);
    for (std::size_t k = 0; k < n; ++k) {
        w_s[k] = B.multiplier(k, cfg.s);
        w_s1[k] = B.multiplier(k, cfg.s + 1.0);
        w_2s1[k] = B.multiplier(k, 2.0 * cfg.s + 1.0);
    }
    auto weighted = [&](const std::vector<double>& w, std::span<const double> c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += w[k] * c[k] * c[k];
        return acc;
    };

    RunRecord rec;
    const std::size_t samples = static_cast<std::size_t>(cfg.record_samples);
    for (auto* v : {&rec.times, &rec.mass, &rec.energy, &rec.entropy, &rec.dissipation, &rec.flux_dissipation,
                    &rec.gamma_dissipation, &rec.min_u, &rec.max_u}) {
        v->reserve(samples + 1);
    }

    Stepper st(basis, cfg);
    std::vector<double> c(u0.coefficients().begin(), u0.coefficients().end());
    double t = 0.0;
    double dt = cfg.dt_initial;
    StepStatistics stats;
    st.start(c, t, stats);

    const double sqrt_vol = std::sqrt(cfg.geometry.volume());
    // The spectral dissipation integrals use the per-mode rule of
    // step_mean_square; the grid flux term uses the trapezoid rule.
    double flux_prev = st.flux_dissipation();
    double D = 0.0, FD = 0.0, GD = 0.0;
    std::vector<double> c_prev = c;

    auto record = [&](std::size_t idx) {
        SpectralField u(basis, c);
        const GridField g = to_grid(u);
        rec.times.push_back(t);
        rec.mass.push_back(c[0] * sqrt_vol);
        rec.energy.push_back(weighted(w_s, c));
        rec.entropy.push_back(entropy_integral(g, cfg.mobility, cfg.entropy));
        rec.dissipation.push_back(D);
        rec.flux_dissipation.push_back(FD);
        rec.gamma_dissipation.push_back(GD);
        rec.min_u.push_back(g.min());
        rec.max_u.push_back(g.max());
        if (g.min() <= 0.0) rec.positivity_warning = true;
        if (idx % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || idx == samples) {
            rec.snapshots.push_back(Snapshot{idx, t, c});
        }
        if (observer) observer(idx, t, u);
    };

    record(0);
    for (std::size_t idx = 1; idx <= samples; ++idx) {
        const double target = (idx == samples) ? cfg.final_time
                                               : cfg.final_time * static_cast<double>(idx) / static_cast<double>(samples);
        while (t < target) {
            const double h = advance(st, c, t, dt, target - t, stats);
            if (target - t < 1e-12 * std::max(1.0, target)) t = target;
            double d_inc = 0.0, g_inc = 0.0;
            for (std::size_t k = 1; k < n; ++k) {
                const double m = step_mean_square(c_prev[k], c[k]);
                d_inc += w_s1[k] * m;
                g_inc += w_2s1[k] * m;
            }
            D += h * d_inc;
            GD += h * gamma * g_inc;
            FD += 0.5 * h * (flux_prev + st.flux_dissipation()) + h * gamma * g_inc;
            flux_prev = st.flux_dissipation();
            c_prev = c;
        }
        record(idx);
    }
    rec.stats = stats;
    if (!cfg.flux_dissipation_includes_gamma) {
        for (std::size_t i = 0; i < rec.size(); ++i) rec.flux_dissipation[i] -= rec.gamma_dissipation[i];
    }
    return rec;
}

IdentityReport verify_identities(const RunRecord& record, const SolverConfig& cfg) {
    IdentityReport r;
    if (record.size() == 0) return r;
    const std::size_t last = record.size() - 1;
    r.energy_initial = record.energy.front();
    r.entropy_initial = record.entropy.front();
    // The energy identity needs the full f_{eps,delta,gamma} dissipation.
    double flux = record.flux_dissipation[last];
    if (!cfg.flux_dissipation_includes_gamma) flux += record.gamma_dissipation[last];
    const double e_res = std::abs(record.energy[last] + 2.0 * flux - r.energy_initial);
    r.energy_residual = r.energy_initial != 0.0 ? e_res / std::abs(r.energy_initial) : e_res;
    const double s_res = std::abs(record.entropy[last] + record.dissipation[last] - r.entropy_initial);
    if (!std::isfinite(s_res)) {
        r.entropy_residual = std::numeric_limits<double>::infinity();
    } else {
        r.entropy_residual = r.entropy_initial != 0.0 ? s_res / std::abs(r.entropy_initial) : s_res;
    }
    return r;
}

}  // namespace fracthin
