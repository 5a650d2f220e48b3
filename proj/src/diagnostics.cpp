#include "fracthin/diagnostics.hpp"

#include "fracthin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fracthin {

namespace {

std::vector<double> resolve_center(const DomainGeometry& g, std::span<const double> center) {
    if (center.empty()) return g.center();
    if (static_cast<int>(center.size()) != g.dimension()) {
        throw ConfigError("center has " + std::to_string(center.size()) + " coordinates for a " +
                          std::to_string(g.dimension()) + "-dimensional box");
    }
    return {center.begin(), center.end()};
}

std::vector<double> node_distances(const DomainGeometry& g, std::span<const double> center) {
    std::vector<double> r(g.point_count());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = support_distance(g.node(i), center, SupportMetric::Radial);
    return r;
}

}  // namespace

double support_distance(std::span<const double> x, std::span<const double> c, SupportMetric metric) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::abs(x[i] - c[i]);
        if (metric == SupportMetric::Radial) {
            acc += d * d;
        } else {
            acc = std::max(acc, d);
        }
    }
    return metric == SupportMetric::Radial ? std::sqrt(acc) : acc;
}

double support_radius(const GridField& u, double threshold, SupportMetric metric, std::span<const double> center) {
    if (!(threshold > 0.0)) throw DomainError("support_radius: threshold must be positive");
    const auto& g = u.geometry();
    const auto c = resolve_center(g, center);
    double r = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) >= threshold) r = std::max(r, support_distance(g.node(i), c, metric));
    }
    return r;
}

SupportSeries support_series(std::span<const Snapshot> snapshots, const BasisPtr& basis, const SupportSpec& spec) {
    SupportSeries out;
    out.grid_spacing = basis->geometry().grid_spacing();
    double initial_max = 0.0;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const GridField g = to_grid(SpectralField(basis, snapshots[i].coefficients));
        if (i == 0) initial_max = g.max_abs();
        double thr = spec.threshold;
        if (spec.mode == ThresholdMode::InitialMax) thr *= initial_max;
        if (spec.mode == ThresholdMode::CurrentMax) thr *= g.max_abs();
        out.times.push_back(snapshots[i].t);
        out.thresholds.push_back(thr);
        out.radii.push_back(thr > 0.0 ? support_radius(g, thr, spec.metric, spec.center) : 0.0);
    }
    return out;
}

double predicted_propagation_exponent(double n, double s, int d) { return 1.0 / (n * d + 2.0 * (s + 1.0)); }

ExponentFit fit_propagation_exponent(const SupportSeries& series, double r0, std::size_t min_points) {
    const std::size_t m = std::min(series.times.size(), series.radii.size());
    const double activation = r0 + 2.0 * series.grid_spacing;
    std::size_t start = m;
    for (std::size_t i = 0; i < m; ++i) {
        if (series.times[i] > 0.0 && series.radii[i] > activation) {
            start = i;
            break;
        }
    }
    std::vector<double> lx, ly;
    for (std::size_t i = start; i < m; ++i) {
        if (series.times[i] > 0.0 && series.radii[i] > r0) {
            lx.push_back(std::log(series.times[i]));
            ly.push_back(std::log(series.radii[i] - r0));
        }
    }
    if (lx.size() < std::max<std::size_t>(min_points, 2)) {
        throw InsufficientDataError("fit_propagation_exponent: " + std::to_string(lx.size()) +
                                    " activated samples, need " + std::to_string(min_points));
    }
    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("fit_propagation_exponent: all samples at one time");
    ExponentFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (fit.intercept + fit.exponent * lx[i]);
        rss += e * e;
    }
    fit.residual = std::sqrt(rss / k);
    fit.points = lx.size();
    fit.window_start = series.times[start];
    return fit;
}

WaitingTime detect_waiting_time(const SupportSeries& series, double r0, double tol_r) {
    if (series.radii.empty()) throw InsufficientDataError("detect_waiting_time: empty series");
    if (series.radii.front() > r0 + tol_r) {
        throw InconsistentSupportError("detect_waiting_time: initial radius " + std::to_string(series.radii.front()) +
                                       " exceeds r0 + tol_r = " + std::to_string(r0 + tol_r));
    }
    WaitingTime w;
    for (std::size_t i = 0; i < series.radii.size(); ++i) {
        if (series.radii[i] > r0 + tol_r) {
            w.t0 = series.times[i];
            w.index = i;
            w.moved = true;
            return w;
        }
    }
    w.t0 = series.times.back();
    w.index = series.radii.size();
    return w;
}

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_prime(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = t * (1.0 - t);
    return 30.0 * a * a;
}

double max_distance(const DomainGeometry& geometry, std::span<const double> center) {
    const auto c = resolve_center(geometry, center);
    double acc = 0.0;
    for (int i = 0; i < geometry.dimension(); ++i) {
        const double far = std::max(c[static_cast<std::size_t>(i)], geometry.axis(i).length - c[static_cast<std::size_t>(i)]);
        acc += far * far;
    }
    return std::sqrt(acc);
}

CutoffFunction build_cutoff(double S, double sigma, const DomainGeometry& geometry, std::span<const double> center) {
    const auto c = resolve_center(geometry, center);
    const double R = max_distance(geometry, c);
    if (!(S > 0.0 && sigma > 0.0 && S + sigma < R)) {
        throw DomainError("build_cutoff: need 0 < S < S + sigma < " + std::to_string(R));
    }
    std::vector<double> v(geometry.point_count());
    double gmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = support_distance(geometry.node(i), c, SupportMetric::Radial);
        const double t = (r - S) / sigma;
        v[i] = smoothstep5(t);
        gmax = std::max(gmax, smoothstep5_prime(t) / sigma);
    }
    CutoffFunction psi{S, sigma, 5, 15.0 / 8.0, c, GridField(geometry, std::move(v)), gmax};
    return psi;
}

double local_entropy_exponent(double n, double s, int d) {
    return std::min({s / (2.0 * s + 1.0), 1.0 - (n - 1.0) * (s + 1.0), (2.0 * n * s - d * (n - 1.0)) / (4.0 * s)});
}

LocalEntropyReport local_entropy_report(std::span<const Snapshot> snapshots, const BasisPtr& basis, double n, double s,
                                        double S, double sigma, std::span<const double> center) {
    if (snapshots.empty()) throw InsufficientDataError("local_entropy_report: no snapshots");
    const auto& g = basis->geometry();
    const CutoffFunction psi = build_cutoff(S, sigma, g, center);
    const auto r = node_distances(g, psi.center);
    const double cell = g.cell_volume();
    const double g00 = entropy_G0_at_zero(n);

    LocalEntropyReport rep;
    rep.S = S;
    rep.sigma = sigma;
    rep.varpi = local_entropy_exponent(n, s, g.dimension());
    rep.sigma_factor = std::pow(sigma, -2.0 * (s + 1.0));

    // Entropy over an annulus; negative nodes count as zero.
    auto annular_entropy = [&](const GridField& u, double inner, double& excess) {
        double total = 0.0, ex = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (r[i] <= inner) continue;
            const double z = u[i];
            if (z < 0.0) ++rep.negative_nodes;
            const double gz = entropy_G0(std::max(z, 0.0), n);
            total += gz;
            ex += gz - g00;
        }
        excess = ex * cell;
        return total * cell;
    };

    std::vector<double> diss(snapshots.size()), l2(snapshots.size());
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const SpectralField u(basis, snapshots[k].coefficients);
        const GridField ug = to_grid(u);
        std::vector<double> prod(ug.size());
        double a = 0.0;
        for (std::size_t i = 0; i < ug.size(); ++i) {
            prod[i] = ug[i] * psi.values[i];
            if (r[i] > S) a += ug[i] * ug[i];
        }
        l2[k] = a * cell;
        const GridField w = to_grid(frac_laplacian(to_coefficients(GridField(g, std::move(prod)), basis), 0.5 * (s + 1.0)));
        double d = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (r[i] > S + sigma) d += w[i] * w[i];
        }
        diss[k] = d * cell;
        if (k == 0) rep.entropy_initial = annular_entropy(ug, S, rep.entropy_initial_excess);
        if (k + 1 == snapshots.size()) rep.entropy_final = annular_entropy(ug, S + sigma, rep.entropy_final_excess);
    }
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
        const double h = snapshots[k].t - snapshots[k - 1].t;
        rep.dissipation += 0.25 * h * (diss[k] + diss[k - 1]);
        rep.a_t += 0.5 * h * (l2[k] + l2[k - 1]);
    }
    rep.a_t_power = rep.a_t > 0.0 ? std::pow(rep.a_t, rep.varpi) : 0.0;
    rep.lhs = rep.entropy_final + rep.dissipation;
    rep.rhs_without_constant = rep.entropy_initial + rep.sigma_factor * (rep.a_t + rep.a_t_power);
    rep.ratio = rep.rhs_without_constant > 0.0 ? rep.lhs / rep.rhs_without_constant
                                               : (rep.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return rep;
}

LeibnizRemainder leibniz_remainder(const SpectralField& u, const SpectralField& v, double beta) {
    if (!(beta > 0.0 && beta < 2.0)) throw DomainError("leibniz_remainder: beta must lie in (0,2)");
    const SpectralField fu = frac_laplacian(u, beta);
    const SpectralField fv = frac_laplacian(v, beta);
    SpectralField rem = frac_laplacian(grid_product(u, v), beta);
    rem += -1.0 * grid_product(u, fv);
    rem += -1.0 * grid_product(v, fu);
    const double num = l2_norm(rem);
    const double den = l2_norm(u) * to_grid(fv).max_abs();
    double ratio = 0.0;
    if (den > 0.0) {
        ratio = num / den;
    } else if (num > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
    }
    return {std::move(rem), ratio};
}

TailEstimate tail_estimate_check(const CutoffFunction& psi, const BasisPtr& basis, double alpha, double delta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("tail_estimate_check: alpha must lie in (0,1)");
    const auto& g = basis->geometry();
    const double R = max_distance(g, psi.center);
    if (!(delta > 0.0 && delta < R - psi.S)) throw DomainError("tail_estimate_check: delta must lie in (0, R - S)");
    const SpectralField c = to_coefficients(psi.values, basis);
    const GridField w = to_grid(frac_laplacian(c, alpha));
    const auto r = node_distances(g, psi.center);
    double full = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        full += w[i] * w[i];
        if (r[i] > psi.S + delta) outer += w[i] * w[i];
    }
    TailEstimate t;
    t.norm_full = std::sqrt(full * g.cell_volume());
    t.norm_outer = std::sqrt(outer * g.cell_volume());
    t.norm_psi = l2_norm(c);
    t.constant = t.norm_psi > 0.0 ? std::pow(delta, 2.0 * alpha) * (t.norm_full - t.norm_outer) / t.norm_psi : 0.0;
    return t;
}

DensityReport flatness_density(const GridField& u0, double r0, double gamma_exponent, double n, int levels,
                               std::span<const double> center) {
    if (!(n >= 1.0 && n < 2.0)) throw DomainError("flatness_density: requires 1 <= n < 2");
    if (!(r0 > 0.0) || levels < 1) throw DomainError("flatness_density: need r0 > 0 and levels >= 1");
    const auto& g = u0.geometry();
    const auto c = resolve_center(g, center);
    const auto r = node_distances(g, c);
    const double g00 = entropy_G0_at_zero(n);
    DensityReport rep;
    double delta = r0;
    for (int k = 0; k < levels; ++k, delta *= 0.5) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < u0.size(); ++i) {
            if (r[i] > r0 - delta && r[i] <= r0) {
                sum += std::abs(entropy_G0(std::max(u0[i], 0.0), n) - g00);
                ++count;
            }
        }
        if (count == 0) continue;
        const double mean = sum / static_cast<double>(count);
        rep.points.push_back({delta, std::pow(delta, -gamma_exponent * (2.0 - n)) * mean, count});
    }
    for (const auto& p : rep.points) rep.supremum = std::max(rep.supremum, p.value);
    const std::size_t m = rep.points.size();
    for (std::size_t i = m > 3 ? m - 3 : 0; i < m; ++i) rep.tail_maximum = std::max(rep.tail_maximum, rep.points[i].value);
    rep.waiting_time_scale = rep.supremum > 0.0 ? std::pow(rep.supremum, -n / (2.0 - n))
                                                : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace fracthin
