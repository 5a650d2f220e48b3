#pragma once

// Power-law mobility, its (eps, delta, gamma) regularizations and the
// associated entropies.

#include "fracthin/spectral.hpp"

namespace fracthin {

struct MobilityParams {
    double n = 1.5;
    double epsilon = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double alpha = 3.5;  // degeneracy exponent of the eps-regularization
    double s = 0.5;      // fractional order, carried for the alpha constraint
    int dimension = 1;

    /// max{2 + 2d/(2(s+1) - d), n}.
    static double alpha_lower_bound(double n, double s, int d);
    /// alpha_lower_bound + 0.5.
    static double default_alpha(double n, double s, int d);
    /// Parameters with alpha set to default_alpha.
    static MobilityParams make(double n, double s, int d, double epsilon = 0.0, double delta = 0.0,
                               double gamma = 0.0);

    /// Throws ConfigError unless n >= 1, s in (0,1), eps/delta/gamma >= 0 and,
    /// when eps > 0, alpha exceeds alpha_lower_bound.
    void validate() const;

    /// Upper end of the existence range (d + 2(1-s)) / (d - 2s)_+ (infinite when d <= 2s).
    static double existence_exponent_bound(double s, int d);
    bool within_existence_range() const;
};

struct LiftParams {
    double theta1 = 1.0 / 3.0;
    double theta2 = 1.0;

    /// theta1 = min(1, 1/(alpha-2)) / 2, theta2 = 1.
    static LiftParams defaults(const MobilityParams& p);
    /// Throws ConfigError unless theta1 in (0, 1/(alpha-2)) and theta2 > 0.
    void validate(const MobilityParams& p) const;
};

/// f_{eps,delta}(z) + gamma; with eps = delta = gamma = 0 this is z_+^n.
double mobility(double z, const MobilityParams& p);
/// f_{eps,delta}(z), without the gamma shift.
double mobility_degenerate(double z, const MobilityParams& p);
/// d/dz f_{eps,delta,gamma}(z); 0 for z <= 0.
double mobility_prime(double z, const MobilityParams& p);

/// G0 with G0'' = z^{-n}, G0(1) = G0'(1) = 0; +inf for z < 0 and for z = 0 when n >= 2.
double entropy_G0(double z, double n);
/// G0(0): 1 for n = 1, 1/(2-n) for n in (1,2), +inf for n >= 2.
double entropy_G0_at_zero(double n);

/// Regularized entropy G'' = 1/f_{eps,delta,gamma}, G(1) = G'(1) = 0.
/// Closed form for gamma = 0 (+inf for z <= 0); adaptive quadrature otherwise.
double entropy_reg(double z, const MobilityParams& p);

/// Closed-form G_{eps,delta}(z) - G0(z).
double entropy_correction(double z, const MobilityParams& p);

enum class EntropyKind { G0, Regularized };

/// Midpoint quadrature of the selected entropy over the grid.
/// Returns +inf when any node lies outside the entropy's finite domain.
double entropy_integral(const GridField& u, const MobilityParams& p, EntropyKind kind);
double entropy_integral(const SpectralField& u, const MobilityParams& p, EntropyKind kind);

/// u0 + eps^theta1 + delta^theta2 at every node. Throws DomainError on negative nodes.
GridField lift_initial_datum(const GridField& u0, const MobilityParams& p, const LiftParams& l);
double lift_offset(const MobilityParams& p, const LiftParams& l);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance.
/// Throws NumericError when the recursion depth is exhausted.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth = 48);

}  // namespace fracthin
