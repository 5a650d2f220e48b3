#pragma once

// Numeric oracles for interpolation inequalities and Stampacchia-type iteration lemmas.

#include "fracthin/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fracthin {

/// Relative numerical zero shared by the lemma oracles: tolerance = zero_relative * f(x0).
struct LemmaTolerance {
    double zero_relative = 1e-12;
    double hypothesis_slack = 1e-9;  // relative slack on recurrence right-hand sides
};

/// Nonnegative nonincreasing function sampled at strictly increasing points.
/// Throws DomainError when the samples are negative, non-finite or increasing.
class DecreasingSampler {
public:
    DecreasingSampler(std::function<double(double)> f, std::vector<double> points);

    double operator()(double x) const { return f_(x); }
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::function<double(double)> f_;
    std::vector<double> points_;
    std::vector<double> values_;
};

/// `count` points from a to b whose gaps grow by a constant factor `ratio`.
std::vector<double> geometric_grid(double a, double b, std::size_t count = 64, double ratio = 1.05);

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::size_t samples = 0;
    double worst = 0.0;  // largest lhs/rhs seen (or the scalar margin for single conditions)
};

struct LemmaReport {
    std::string lemma;
    std::vector<HypothesisCheck> hypotheses;
    bool prediction_emitted = false;
    std::string prediction_kind;  // vanishing | exponential-envelope | power-envelope
    double predicted = 0.0;       // vanishing point, or zeta / mu for envelopes
    double zero_tolerance = 0.0;
    bool asserted = false;        // conclusion verified on the samples
    std::size_t violations = 0;   // samples contradicting the conclusion
    double max_observed = 0.0;    // largest f beyond the vanishing point, or largest f / envelope
    double deficit = 0.0;         // relative shortfall of a threshold condition, 0 when met

    bool hypotheses_hold() const;
};

/// Ratio ||v||_2 / (||(-Delta)^{(s+1)/2} v||^theta ||v||_b^{1-theta} + ||v||_b) and theta.
struct GnRatio {
    double ratio = 0.0;
    double theta = 0.0;
};
double gn_theta(double b, double s, int d);
/// Throws DomainError unless b in (0,2) and s in (0,1); DegenerateInputError when ||v||_b = 0.
GnRatio gn_ratio(const SpectralField& v, double b, double s);

/// seminorm(u,r) - seminorm(u,r0)^{1-t} seminorm(u,r1)^t with t = (r-r0)/(r1-r0); <= 0 when the inequality holds.
double seminorm_interpolation_gap(const SpectralField& u, double r0, double r, double r1);
/// ||(-Delta)^beta v|| - ||(-Delta)^{(s+1)/2} v||^t ||v||^{1-t} with t = 2 beta/(s+1). Requires 0 <= 2 beta <= s+1.
double fractional_interpolation_gap(const SpectralField& v, double beta, double s);

/// f(y) <= C (y-x)^-alpha f(x)^beta checked on sampled pairs x0 <= x < y.
LemmaReport stampacchia_classic(const DecreasingSampler& f, double x0, double C, double alpha, double beta,
                                const LemmaTolerance& tol = {});

/// Vanishing from f(s+delta) <= eps f(s)^nu, with the recurrence checked along s_{k+1} = s_k + f(0) A^k.
LemmaReport stampacchia_geometric(const DecreasingSampler& f, double eps, double nu, const LemmaTolerance& tol = {});

/// f(R) = 0 under the inhomogeneous recurrence and the threshold condition on R. `predicted` is the
/// smallest R satisfying the threshold condition (+inf when none does).
LemmaReport stampacchia_inhomogeneous(const DecreasingSampler& f, double R, double c0, double alpha, double beta,
                                      double S_tilde, const LemmaTolerance& tol = {});

/// Vanishing distance d with d^alpha = C f0^{beta-1} 2^{alpha beta/(beta-1)}.
double classic_vanishing_distance(double f0, double C, double alpha, double beta);

}  // namespace fracthin
