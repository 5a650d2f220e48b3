#include "fracthin/inequality.hpp"

#include "fracthin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracthin {

DecreasingSampler::DecreasingSampler(std::function<double(double)> f, std::vector<double> points)
    : f_(std::move(f)), points_(std::move(points)) {
    if (!f_) throw ConfigError("DecreasingSampler: empty callback");
    if (points_.empty()) throw DomainError("DecreasingSampler: no sample points");
    values_.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i]) || (i > 0 && !(points_[i] > points_[i - 1]))) {
            throw DomainError("DecreasingSampler: points must be finite and strictly increasing");
        }
        const double v = f_(points_[i]);
        if (!std::isfinite(v) || v < 0.0) {
            throw DomainError("DecreasingSampler: f(" + std::to_string(points_[i]) + ") = " + std::to_string(v));
        }
        if (i > 0 && v > values_.back()) {
            throw DomainError("DecreasingSampler: f increases at x = " + std::to_string(points_[i]));
        }
        values_.push_back(v);
    }
}

std::vector<double> geometric_grid(double a, double b, std::size_t count, double ratio) {
    if (!(b > a) || count < 2 || !(ratio >= 1.0)) throw DomainError("geometric_grid: need a < b, count >= 2, ratio >= 1");
    std::vector<double> x(count);
    const auto m = static_cast<double>(count - 1);
    const double total = ratio == 1.0 ? m : (std::pow(ratio, m) - 1.0) / (ratio - 1.0);
    double acc = 0.0, gap = 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        x[i] = a + (b - a) * acc / total;
        acc += gap;
        gap *= ratio;
    }
    x.back() = b;
    return x;
}

bool LemmaReport::hypotheses_hold() const {
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const HypothesisCheck& h) { return h.passed; });
}

double gn_theta(double b, double s, int d) {
    const double ib = 1.0 / b;
    return (ib - 0.5) / (ib + (s + 1.0) / d - 0.5);
}

GnRatio gn_ratio(const SpectralField& v, double b, double s) {
    if (!(b > 0.0 && b < 2.0)) throw DomainError("gn_ratio: b must lie in (0,2)");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("gn_ratio: s must lie in (0,1)");
    const auto& g = v.basis().geometry();
    const GridField w = to_grid(v);
    double acc = 0.0;
    for (double x : w.values()) acc += std::pow(std::abs(x), b);
    const double lb = std::pow(acc * g.cell_volume(), 1.0 / b);
    if (!(lb > 0.0)) throw DegenerateInputError("gn_ratio: ||v||_b vanishes");
    GnRatio out;
    out.theta = gn_theta(b, s, g.dimension());
    const double top = seminorm(v, s + 1.0);
    const double den = std::pow(top, out.theta) * std::pow(lb, 1.0 - out.theta) + lb;
    out.ratio = l2_norm(v) / den;
    return out;
}

double seminorm_interpolation_gap(const SpectralField& u, double r0, double r, double r1) {
    if (!(r0 >= 0.0 && r0 <= r && r <= r1 && r0 < r1)) throw DomainError("seminorm_interpolation_gap: need 0 <= r0 <= r <= r1, r0 < r1");
    const double t = (r - r0) / (r1 - r0);
    return seminorm(u, r) - std::pow(seminorm(u, r0), 1.0 - t) * std::pow(seminorm(u, r1), t);
}

double fractional_interpolation_gap(const SpectralField& v, double beta, double s) {
    if (!(beta >= 0.0 && 2.0 * beta <= s + 1.0)) throw DomainError("fractional_interpolation_gap: need 0 <= 2 beta <= s + 1");
    const double t = 2.0 * beta / (s + 1.0);
    return seminorm(v, 2.0 * beta) - std::pow(seminorm(v, s + 1.0), t) * std::pow(l2_norm(v), 1.0 - t);
}

double classic_vanishing_distance(double f0, double C, double alpha, double beta) {
    return std::pow(C * std::pow(f0, beta - 1.0) * std::pow(2.0, alpha * beta / (beta - 1.0)), 1.0 / alpha);
}

namespace {

// Pairs x < y among samples in [lo, hi]; rhs(x, y) must bound f(y).
template <class Rhs>
HypothesisCheck check_pairs(const DecreasingSampler& f, double lo, double hi, const std::string& name, double slack,
                            double zero, Rhs rhs) {
    HypothesisCheck h{name, true, 0, 0.0};
    const auto& x = f.points();
    const auto& v = f.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) continue;
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            if (x[j] > hi) break;
            const double bound = rhs(x[i], v[i], x[j]);
            ++h.samples;
            if (v[j] > bound * (1.0 + slack) + zero) h.passed = false;
            if (bound > 0.0) {
                h.worst = std::max(h.worst, v[j] / bound);
            } else if (v[j] > 0.0) {
                h.worst = std::numeric_limits<double>::infinity();
            }
        }
    }
    return h;
}

HypothesisCheck scalar_check(const std::string& name, bool ok, double margin) { return {name, ok, 1, margin}; }

}  // namespace

LemmaReport stampacchia_classic(const DecreasingSampler& f, double x0, double C, double alpha, double beta,
                                const LemmaTolerance& tol) {
    LemmaReport rep;
    rep.lemma = "stampacchia_classic";
    const double f0 = f(x0);
    rep.zero_tolerance = tol.zero_relative * f0;
    rep.hypotheses.push_back(scalar_check("positive constants", C > 0.0 && alpha > 0.0 && beta > 0.0, 0.0));
    rep.hypotheses.push_back(scalar_check("x0 within samples", x0 >= f.points().front() && x0 <= f.points().back(), 0.0));
    if (beta < 1.0) rep.hypotheses.push_back(scalar_check("x0 > 0", x0 > 0.0, x0));
    if (!rep.hypotheses_hold()) return rep;
    rep.hypotheses.push_back(check_pairs(f, x0, std::numeric_limits<double>::infinity(), "recurrence", tol.hypothesis_slack,
                                         rep.zero_tolerance, [&](double x, double fx, double y) {
                                             return C * std::pow(y - x, -alpha) * std::pow(fx, beta);
                                         }));
    if (!rep.hypotheses_hold()) return rep;

    rep.prediction_emitted = true;
    const auto& x = f.points();
    const auto& v = f.values();
    if (beta > 1.0) {
        rep.prediction_kind = "vanishing";
        rep.predicted = x0 + classic_vanishing_distance(f0, C, alpha, beta);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < rep.predicted) continue;
            rep.max_observed = std::max(rep.max_observed, v[i]);
            if (v[i] > rep.zero_tolerance) ++rep.violations;
        }
    } else {
        std::function<double(double)> envelope;
        if (beta == 1.0) {
            rep.prediction_kind = "exponential-envelope";
            rep.predicted = std::pow(std::exp(1.0) * C, -1.0 / alpha);
            envelope = [&](double y) { return std::exp(1.0 - rep.predicted * (y - x0)) * f0; };
        } else {
            rep.prediction_kind = "power-envelope";
            const double mu = alpha / (1.0 - beta);
            rep.predicted = mu;
            const double K = std::pow(2.0, mu / (1.0 - beta)) *
                             (std::pow(C, 1.0 / (1.0 - beta)) + std::pow(2.0 * x0, mu) * f0);
            envelope = [K, mu](double y) { return K * std::pow(y, -mu); };
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < x0) continue;
            const double e = envelope(x[i]);
            if (e > 0.0) rep.max_observed = std::max(rep.max_observed, v[i] / e);
            if (v[i] > e * (1.0 + tol.zero_relative) + rep.zero_tolerance) ++rep.violations;
        }
    }
    rep.asserted = rep.violations == 0;
    return rep;
}

LemmaReport stampacchia_geometric(const DecreasingSampler& f, double eps, double nu, const LemmaTolerance& tol) {
    LemmaReport rep;
    rep.lemma = "stampacchia_geometric";
    const double f0 = f(0.0);
    rep.zero_tolerance = tol.zero_relative * f0;
    rep.hypotheses.push_back(scalar_check("nu > 1", nu > 1.0, nu));
    rep.hypotheses.push_back(scalar_check("samples start at 0", f.points().front() == 0.0, f.points().front()));
    const double A = eps * std::pow(f0, nu - 1.0);
    rep.hypotheses.push_back(scalar_check("eps in (0, f(0)^{1-nu})", eps > 0.0 && (f0 == 0.0 || A < 1.0), A));
    if (!rep.hypotheses_hold()) return rep;

    HypothesisCheck chain{"recurrence on iteration chain", true, 0, 0.0};
    if (f0 > 0.0) {
        double s = 0.0, fs = f0, step = f0;
        for (int k = 0; k < 400 && step > 1e-15 * f0; ++k) {
            const double next = f(s + step);
            const double bound = eps * std::pow(fs, nu);
            ++chain.samples;
            if (next > bound * (1.0 + tol.hypothesis_slack) + rep.zero_tolerance) chain.passed = false;
            if (bound > 0.0) chain.worst = std::max(chain.worst, next / bound);
            s += step;
            fs = next;
            step *= A;
        }
    }
    rep.hypotheses.push_back(chain);
    if (!chain.passed) return rep;

    rep.prediction_emitted = true;
    rep.prediction_kind = "vanishing";
    rep.predicted = f0 / (1.0 - A);
    const auto& x = f.points();
    const auto& v = f.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < rep.predicted) continue;
        rep.max_observed = std::max(rep.max_observed, v[i]);
        if (v[i] > rep.zero_tolerance) ++rep.violations;
    }
    rep.asserted = rep.violations == 0;
    return rep;
}

LemmaReport stampacchia_inhomogeneous(const DecreasingSampler& f, double R, double c0, double alpha, double beta,
                                      double S_tilde, const LemmaTolerance& tol) {
    LemmaReport rep;
    rep.lemma = "stampacchia_inhomogeneous";
    const double f0 = f(0.0);
    rep.zero_tolerance = tol.zero_relative * f0;
    rep.prediction_kind = "vanishing";
    rep.hypotheses.push_back(scalar_check("beta > 1", beta > 1.0, beta));
    rep.hypotheses.push_back(scalar_check("positive constants", c0 > 0.0 && alpha > 0.0 && R > 0.0 && S_tilde >= 0.0, 0.0));
    rep.hypotheses.push_back(scalar_check("samples start at 0", f.points().front() == 0.0, f.points().front()));
    if (!rep.hypotheses_hold()) return rep;

    const double a = alpha / (beta - 1.0);
    rep.hypotheses.push_back(check_pairs(f, 0.0, R, "recurrence", tol.hypothesis_slack, rep.zero_tolerance,
                                         [&](double eta, double feta, double xi) {
                                             return c0 * std::pow(xi - eta, -alpha) *
                                                    std::pow(feta + S_tilde * std::pow(R - eta, a), beta);
                                         }));

    const double K = std::pow(std::pow(2.0, beta * (alpha + beta - 1.0) / (beta - 1.0)) * c0, 1.0 / (beta - 1.0));
    const double lhs = std::pow(R, a);
    const double rhs = K * (f0 + S_tilde * lhs);
    rep.predicted = K * S_tilde < 1.0 ? std::pow(K * f0 / (1.0 - K * S_tilde), 1.0 / a)
                                      : std::numeric_limits<double>::infinity();
    const bool threshold = lhs >= rhs;
    rep.deficit = threshold ? 0.0 : 1.0 - lhs / rhs;
    rep.hypotheses.push_back(scalar_check("threshold on R", threshold, rhs > 0.0 ? lhs / rhs : 0.0));
    if (!rep.hypotheses_hold()) return rep;

    rep.prediction_emitted = true;
    const double fR = f(R);
    rep.max_observed = fR;
    rep.violations = fR > rep.zero_tolerance ? 1 : 0;
    rep.asserted = rep.violations == 0;
    return rep;
}

}  // namespace fracthin
