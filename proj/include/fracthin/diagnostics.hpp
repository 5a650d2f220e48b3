#pragma once

// Free-boundary observables computed from solver output.

#include "fracthin/mobility.hpp"
#include "fracthin/solver.hpp"
#include "fracthin/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace fracthin {

enum class SupportMetric { Radial, SupBox };

/// Distance of x from c in the chosen metric.
double support_distance(std::span<const double> x, std::span<const double> c, SupportMetric metric);

/// Largest distance from `center` of a node with |u| >= threshold; 0 when no node qualifies.
/// An empty center means the box center. Throws DomainError unless threshold > 0.
double support_radius(const GridField& u, double threshold, SupportMetric metric = SupportMetric::Radial,
                      std::span<const double> center = {});

enum class ThresholdMode {
    Absolute,    // the value itself
    InitialMax,  // value * max|u(0)|
    CurrentMax,  // value * max|u(t)|
};

struct SupportSpec {
    double threshold = 1e-6;
    ThresholdMode mode = ThresholdMode::InitialMax;
    SupportMetric metric = SupportMetric::Radial;
    std::vector<double> center;  // empty: box center
};

struct SupportSeries {
    std::vector<double> times;
    std::vector<double> radii;
    std::vector<double> thresholds;  // absolute threshold used at each time
    double grid_spacing = 0.0;
};

/// Support radius of every snapshot.
SupportSeries support_series(std::span<const Snapshot> snapshots, const BasisPtr& basis, const SupportSpec& spec);

struct ExponentFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS residual of the log-log fit
    std::size_t points = 0;
    double window_start = 0.0;
};

/// Least-squares slope of log(d - r0) against log t from the first time with
/// d > r0 + 2h to the end of the series. Throws InsufficientDataError with fewer
/// than `min_points` usable samples.
ExponentFit fit_propagation_exponent(const SupportSeries& series, double r0, std::size_t min_points = 10);

/// 1 / (n d + 2 (s + 1)).
double predicted_propagation_exponent(double n, double s, int d);

struct WaitingTime {
    double t0 = 0.0;
    std::size_t index = 0;  // first sample beyond r0 + tol_r, or size() when none
    bool moved = false;
};

/// First sampled time with d(t) > r0 + tol_r; the final time when that never happens.
/// Throws InconsistentSupportError when d(0) > r0 + tol_r.
WaitingTime detect_waiting_time(const SupportSeries& series, double r0, double tol_r);

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0,1], and its derivative.
double smoothstep5(double t);
double smoothstep5_prime(double t);

struct CutoffFunction {
    double S = 0.0;
    double sigma = 0.0;
    int order = 5;
    double gradient_constant = 15.0 / 8.0;  // max |grad psi| <= gradient_constant / sigma
    std::vector<double> center;
    GridField values;
    /// max over the nodes of |grad psi| from the analytic radial derivative.
    double max_gradient = 0.0;
};

/// Radial cutoff: 0 for |x - c| <= S, 1 for |x - c| >= S + sigma.
/// Throws DomainError unless 0 < S < S + sigma < largest distance from the center to the box.
CutoffFunction build_cutoff(double S, double sigma, const DomainGeometry& geometry, std::span<const double> center = {});

/// Largest distance from `center` to a point of the box.
double max_distance(const DomainGeometry& geometry, std::span<const double> center);

/// Exponent min{s/(2s+1), 1 - (n-1)(s+1), (2ns - d(n-1))/(4s)}.
double local_entropy_exponent(double n, double s, int d);

struct LocalEntropyReport {
    double S = 0.0;
    double sigma = 0.0;
    double entropy_final = 0.0;         // int_{Omega(S+sigma)} G0(u(T))
    double entropy_final_excess = 0.0;  // same with G0 - G0(0)
    double dissipation = 0.0;           // 1/2 int_0^T int_{Omega(S+sigma)} |(-Delta)^{(s+1)/2}(u psi)|^2
    double entropy_initial = 0.0;       // int_{Omega(S)} G0(u0)
    double entropy_initial_excess = 0.0;
    double a_t = 0.0;                   // int_0^T ||u||^2_{L2(Omega(S))}
    double varpi = 0.0;
    double a_t_power = 0.0;             // a_t^varpi
    double sigma_factor = 0.0;          // sigma^{-2(s+1)}
    double lhs = 0.0;
    double rhs_without_constant = 0.0;  // entropy_initial + sigma_factor (a_t + a_t^varpi)
    double ratio = 0.0;                 // lhs / rhs_without_constant
    std::size_t negative_nodes = 0;     // nodes with u < 0, evaluated as u = 0
};

/// Terms of the local entropy estimate on the annuli around `center`.
LocalEntropyReport local_entropy_report(std::span<const Snapshot> snapshots, const BasisPtr& basis, double n, double s,
                                        double S, double sigma, std::span<const double> center = {});

struct LeibnizRemainder {
    SpectralField remainder;
    double ratio = 0.0;  // ||R|| / (||u|| max|(-Delta)^beta v|); 0 when R and the denominator both vanish
};

/// (-Delta)^beta(uv) - u (-Delta)^beta v - v (-Delta)^beta u with grid products.
/// Throws DomainError unless beta in (0,2).
LeibnizRemainder leibniz_remainder(const SpectralField& u, const SpectralField& v, double beta);

struct TailEstimate {
    double norm_full = 0.0;   // ||(-Delta)^alpha psi||_{L2(Omega)}
    double norm_outer = 0.0;  // same over Omega(S + delta)
    double norm_psi = 0.0;
    double constant = 0.0;    // delta^{2 alpha} (norm_full - norm_outer) / norm_psi, 0 for psi = 0
};

/// Tail decomposition of (-Delta)^alpha psi for a cutoff supported in Omega(S).
/// Throws DomainError unless alpha in (0,1) and delta in (0, R - S).
TailEstimate tail_estimate_check(const CutoffFunction& psi, const BasisPtr& basis, double alpha, double delta);

struct DensityPoint {
    double delta = 0.0;
    double value = 0.0;  // delta^{-gamma(2-n)} mean over the annulus of |G0(u0) - G0(0)|
    std::size_t nodes = 0;
};

struct DensityReport {
    std::vector<DensityPoint> points;
    double supremum = 0.0;
    double tail_maximum = 0.0;        // max over the smallest three resolved deltas
    double waiting_time_scale = 0.0;  // supremum^{-n/(2-n)}
};

/// Density of the flatness condition over dyadic delta = r0 2^{-k}, k = 0 .. levels-1,
/// restricted to annuli that contain at least one node. Requires 1 <= n < 2.
DensityReport flatness_density(const GridField& u0, double r0, double gamma_exponent, double n, int levels,
                               std::span<const double> center = {});

}  // namespace fracthin
