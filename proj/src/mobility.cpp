#include "fracthin/mobility.hpp"

#include "fracthin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fracthin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEntropyQuadTol = 1e-10;

}  // namespace

double MobilityParams::alpha_lower_bound(double n, double s, int d) {
    const double denom = 2.0 * (s + 1.0) - d;
    const double geometric = denom > 0.0 ? 2.0 + 2.0 * d / denom : kInf;
    return std::max(geometric, n);
}

double MobilityParams::default_alpha(double n, double s, int d) { return alpha_lower_bound(n, s, d) + 0.5; }

MobilityParams MobilityParams::make(double n, double s, int d, double epsilon, double delta, double gamma) {
    MobilityParams p;
    p.n = n;
    p.s = s;
    p.dimension = d;
    p.epsilon = epsilon;
    p.delta = delta;
    p.gamma = gamma;
    p.alpha = default_alpha(n, s, d);
    return p;
}

void MobilityParams::validate() const {
    if (!(n >= 1.0)) throw ConfigError("mobility: n must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("mobility: s must lie in (0,1)");
    if (!(epsilon >= 0.0 && delta >= 0.0 && gamma >= 0.0)) {
        throw ConfigError("mobility: epsilon, delta, gamma must be nonnegative");
    }
    if (dimension < 1 || dimension > 3) throw ConfigError("mobility: dimension must be 1, 2 or 3");
    if (epsilon > 0.0 && !(alpha > alpha_lower_bound(n, s, dimension))) {
        throw ConfigError("mobility: alpha = " + std::to_string(alpha) + " must exceed " +
                          std::to_string(alpha_lower_bound(n, s, dimension)) + " when epsilon > 0");
    }
}

double MobilityParams::existence_exponent_bound(double s, int d) {
    const double denom = d - 2.0 * s;
    return denom > 0.0 ? (d + 2.0 * (1.0 - s)) / denom : kInf;
}

bool MobilityParams::within_existence_range() const { return n < existence_exponent_bound(s, dimension); }

LiftParams LiftParams::defaults(const MobilityParams& p) {
    LiftParams l;
    const double cap = p.alpha > 2.0 ? 1.0 / (p.alpha - 2.0) : 1.0;
    l.theta1 = 0.5 * std::min(1.0, cap);
    l.theta2 = 1.0;
    return l;
}

void LiftParams::validate(const MobilityParams& p) const {
    if (!(theta1 > 0.0)) throw ConfigError("lift: theta1 must be positive");
    if (p.alpha > 2.0 && !(theta1 < 1.0 / (p.alpha - 2.0))) {
        throw ConfigError("lift: theta1 must be below 1/(alpha-2)");
    }
    if (!(theta2 > 0.0)) throw ConfigError("lift: theta2 must be positive");
}

double mobility_degenerate(double z, const MobilityParams& p) {
    if (std::isnan(z)) throw DomainError("mobility: NaN argument");
    if (z <= 0.0) return 0.0;
    // z^{n+a} / (z^a + eps z^n + delta z^{n+a}) divided through by z^a.
    const double zn = std::pow(z, p.n);
    double denom = 1.0 + p.delta * zn;
    if (p.epsilon > 0.0) denom += p.epsilon * std::pow(z, p.n - p.alpha);
    return zn / denom;
}

double mobility(double z, const MobilityParams& p) { return mobility_degenerate(z, p) + p.gamma; }

double mobility_prime(double z, const MobilityParams& p) {
    if (std::isnan(z)) throw DomainError("mobility_prime: NaN argument");
    if (z <= 0.0) return 0.0;
    // z^{n-1} (n + alpha eps z^{n-a}) / (1 + eps z^{n-a} + delta z^n)^2
    const double zn = std::pow(z, p.n);
    const double e = p.epsilon > 0.0 ? p.epsilon * std::pow(z, p.n - p.alpha) : 0.0;
    if (std::isinf(e)) return 0.0;
    const double denom = 1.0 + e + p.delta * zn;
    return std::pow(z, p.n - 1.0) * (p.n + p.alpha * e) / (denom * denom);
}

double entropy_G0_at_zero(double n) {
    if (n == 1.0) return 1.0;
    if (n < 2.0) return 1.0 / (2.0 - n);
    return kInf;
}

double entropy_G0(double z, double n) {
    if (std::isnan(z)) throw DomainError("entropy_G0: NaN argument");
    if (z < 0.0) return kInf;
    if (z == 0.0) return entropy_G0_at_zero(n);
    if (n == 1.0) return z * std::log(z) - z + 1.0;
    if (n == 2.0) return -std::log(z) + z - 1.0;
    return std::pow(z, 2.0 - n) / ((n - 2.0) * (n - 1.0)) + z / (n - 1.0) - 1.0 / (n - 2.0);
}

double entropy_correction(double z, const MobilityParams& p) {
    double g = 0.0;
    if (p.epsilon > 0.0) {
        const double a = p.alpha;
        g += p.epsilon / (a - 1.0) * (std::pow(z, 2.0 - a) / (a - 2.0) - 1.0 / (a - 2.0) + z - 1.0);
    }
    if (p.delta > 0.0) g += 0.5 * p.delta * (z - 1.0) * (z - 1.0);
    return g;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth) {
    struct Rec {
        const std::function<double(double)>& f;
        int max_depth;
        double go(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double diff = left + right - whole;
            if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
            if (depth >= max_depth) {
                throw NumericError("adaptive_simpson: no convergence on [" + std::to_string(a) + ", " +
                                   std::to_string(b) + "]");
            }
            return go(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
                   go(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        }
    };
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    Rec rec{f, max_depth};
    // Start from one level of splitting so symmetric integrands do not fool the first test.
    const double m = 0.5 * (a + b);
    const double fl = f(0.5 * (a + m));
    const double fr = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
    return rec.go(a, m, fa, fl, fm, left, 0.5 * abs_tol, 1) + rec.go(m, b, fm, fr, fb, right, 0.5 * abs_tol, 1);
}

namespace {

// Antiderivatives A(z) = int_1^z dt/f, B(z) = int_1^z t dt/f of the regularized
// mobility with gamma > 0, evaluated at several sorted points at once.
// On [0, inf) the integration variable is t = tau^2, which spreads out the sharp
// transition of 1/f near 0 when eps > 0. On (-inf, 0] f = gamma exactly.
class RegularizedAntiderivatives {
public:
    explicit RegularizedAntiderivatives(const MobilityParams& p) : p_(p) {}

    // G(z) = z A(z) - B(z) at each requested z.
    std::vector<double> entropy(std::span<const double> zs) const {
        std::vector<double> pts;
        pts.reserve(zs.size() + 2);
        for (double z : zs) pts.push_back(std::max(z, 0.0));
        pts.push_back(0.0);
        pts.push_back(1.0);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        // Cumulative integrals from 0 in the tau variable.
        std::vector<double> cumA(pts.size(), 0.0), cumB(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double ta = std::sqrt(pts[i - 1]);
            const double tb = std::sqrt(pts[i]);
            cumA[i] = cumA[i - 1] + integrate(ta, tb, false);
            cumB[i] = cumB[i - 1] + integrate(ta, tb, true);
        }
        auto at = [&](const std::vector<double>& cum, double z) {
            auto it = std::lower_bound(pts.begin(), pts.end(), z);
            return cum[static_cast<std::size_t>(it - pts.begin())];
        };
        const double A1 = at(cumA, 1.0);
        const double B1 = at(cumB, 1.0);

        std::vector<double> out;
        out.reserve(zs.size());
        for (double z : zs) {
            double A, B;
            if (z >= 0.0) {
                A = at(cumA, z) - A1;
                B = at(cumB, z) - B1;
            } else {
                A = -A1 + z / p_.gamma;
                B = -B1 + 0.5 * z * z / p_.gamma;
            }
            out.push_back(z * A - B);
        }
        return out;
    }

private:
    double integrate(double ta, double tb, bool weighted) const {
        auto g = [this, weighted](double tau) {
            const double t = tau * tau;
            const double w = 2.0 * tau / mobility(t, p_);
            return weighted ? t * w : w;
        };
        return adaptive_simpson(g, ta, tb, kEntropyQuadTol);
    }

    const MobilityParams& p_;
};

}  // namespace

double entropy_reg(double z, const MobilityParams& p) {
    if (std::isnan(z)) throw DomainError("entropy_reg: NaN argument");
    if (p.gamma == 0.0) {
        if (z <= 0.0) return kInf;
        return entropy_G0(z, p.n) + entropy_correction(z, p);
    }
    if (z == 1.0) return 0.0;
    const double zs[] = {z};
    return RegularizedAntiderivatives(p).entropy(zs).front();
}

double entropy_integral(const GridField& u, const MobilityParams& p, EntropyKind kind) {
    const double cell = u.geometry().cell_volume();
    double sum = 0.0;
    if (kind == EntropyKind::G0) {
        for (double z : u.values()) sum += entropy_G0(z, p.n);
    } else if (p.gamma == 0.0) {
        for (double z : u.values()) sum += entropy_reg(z, p);
    } else {
        for (double g : RegularizedAntiderivatives(p).entropy(u.values())) sum += g;
    }
    return std::isinf(sum) ? kInf : sum * cell;
}

double entropy_integral(const SpectralField& u, const MobilityParams& p, EntropyKind kind) {
    return entropy_integral(to_grid(u), p, kind);
}

double lift_offset(const MobilityParams& p, const LiftParams& l) {
    double off = 0.0;
    if (p.epsilon > 0.0) off += std::pow(p.epsilon, l.theta1);
    if (p.delta > 0.0) off += std::pow(p.delta, l.theta2);
    return off;
}

GridField lift_initial_datum(const GridField& u0, const MobilityParams& p, const LiftParams& l) {
    std::vector<double> v(u0.values().begin(), u0.values().end());
    const double off = lift_offset(p, l);
    for (double& x : v) {
        if (x < 0.0) throw DomainError("lift_initial_datum: initial datum has negative nodes");
        x += off;
    }
    return GridField(u0.geometry(), std::move(v));
}

}  // namespace fracthin
