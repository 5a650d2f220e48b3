#pragma once

// Faedo-Galerkin integration of d_t u = div(f_{eps,delta,gamma}(u) grad (-Delta)^s u)
// on the span of the retained Neumann eigenfunctions.

#include "fracthin/mobility.hpp"
#include "fracthin/spectral.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fracthin {

enum class StepperKind {
    ExplicitAdaptive,  // Bogacki-Shampine 3(2) on the full right-hand side
    Imex,              // same pair on the flux, exact integrating factor for -gamma lambda^{s+1}
};

struct SolverConfig {
    double s = 0.5;
    MobilityParams mobility;
    DomainGeometry geometry = DomainGeometry::interval(1.0, 8);
    double final_time = 1.0;
    StepperKind stepper = StepperKind::Imex;
    double dt_initial = 1e-8;
    double dt_min = 1e-16;
    double safety = 0.9;
    double rtol = 1e-7;
    double atol = 1e-10;
    /// Number of equally spaced RunRecord samples on (0, T]; sample 0 is t = 0.
    int record_samples = 200;
    /// Keep a coefficient snapshot every this many record samples.
    int snapshot_stride = 1;
    /// Drop the nonlinear flux; only -gamma lambda^{s+1} c remains.
    bool linear_mode = false;
    /// Report the flux dissipation with f_{eps,delta,gamma} (true) or f_{eps,delta} (false).
    bool flux_dissipation_includes_gamma = true;
    EntropyKind entropy = EntropyKind::Regularized;

    /// Throws ConfigError on T <= 0, nonpositive tolerances, s outside (0,1) and
    /// inconsistent mobility parameters.
    void validate() const;
};

struct StepStatistics {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t rhs_evaluations = 0;
};

struct SolverState {
    double t = 0.0;
    SpectralField u;
    double dt = 0.0;  // proposal for the next step
    StepStatistics stats;

    explicit SolverState(SpectralField field, double dt0 = 0.0) : u(std::move(field)), dt(dt0) {}
};

struct Snapshot {
    std::size_t sample = 0;
    double t = 0.0;
    std::vector<double> coefficients;
};

/// Sampled time series of the monitored quantities.
struct RunRecord {
    std::vector<double> times;
    std::vector<double> mass;               // int u = c_0 sqrt|Omega|
    std::vector<double> energy;             // ||u||^2 in H^s
    std::vector<double> entropy;            // int G(u), +inf when undefined
    std::vector<double> dissipation;        // int_0^t ||u||^2 in H^{s+1}
    std::vector<double> flux_dissipation;   // int_0^t int f |grad p|^2
    std::vector<double> gamma_dissipation;  // int_0^t gamma ||u||^2 in H^{2s+1}
    std::vector<double> min_u;
    std::vector<double> max_u;
    std::vector<Snapshot> snapshots;
    StepStatistics stats;
    bool positivity_warning = false;  // min_u <= 0 at some sample

    std::size_t size() const noexcept { return times.size(); }
};

/// Called at every record sample with the sample index, time and state.
using SampleObserver = std::function<void(std::size_t, double, const SpectralField&)>;

/// Owns the work buffers of the pseudospectral right-hand side.
class GalerkinOperator {
public:
    GalerkinOperator(BasisPtr basis, const SolverConfig& cfg);

    const EigenBasis& basis() const noexcept { return *basis_; }
    const SolverConfig& config() const noexcept { return cfg_; }

    /// Flux part: out_j = -int f_{eps,delta}(u) grad p . grad phi_j, p = (-Delta)^s u.
    /// Throws BlowUpError when the flux is not finite.
    void flux(std::span<const double> c, std::span<double> out, double t);
    /// Diagonal part: -gamma lambda_j^{s+1}.
    std::span<const double> diagonal() const noexcept { return diagonal_; }
    /// max over the grid of f_{eps,delta}(u) from the last flux evaluation.
    double last_max_mobility() const noexcept { return last_max_mobility_; }
    /// int f |grad p|^2 with f_{eps,delta} at the state of the last flux call.
    double last_flux_dissipation() const noexcept { return last_flux_dissipation_; }

private:
    BasisPtr basis_;
    SolverConfig cfg_;
    std::vector<double> diagonal_;
    std::vector<double> frac_multiplier_;
    std::vector<double> p_;
    std::vector<double> u_grid_;
    std::vector<double> mob_grid_;
    std::vector<std::vector<double>> grad_p_;
    double last_max_mobility_ = 0.0;
    double last_flux_dissipation_ = 0.0;
};

/// dc/dt of the Galerkin system.
SpectralField rhs(const SpectralField& u, const SolverConfig& cfg);

/// One accepted adaptive step (rejected attempts are retried internally).
/// Throws StiffnessError when the step would fall below dt_min.
SolverState step(const SolverState& state, const SolverConfig& cfg);

/// One step of exactly `dt` without error control.
SolverState step_fixed(const SolverState& state, const SolverConfig& cfg, double dt);

/// Integrates from the projection of u0 to cfg.final_time.
RunRecord run(const GridField& u0, const SolverConfig& cfg, const SampleObserver& observer = {});
RunRecord run(const SpectralField& u0, const SolverConfig& cfg, const SampleObserver& observer = {});

struct IdentityReport {
    double energy_residual = 0.0;   // R_E
    double entropy_residual = 0.0;  // R_S
    double energy_initial = 0.0;
    double entropy_initial = 0.0;
};

/// Relative residuals of the energy and entropy identities over the whole record.
IdentityReport verify_identities(const RunRecord& record, const SolverConfig& cfg);

/// Largest stable explicit step for the flux, safety * 2.5 / (max f * lambda_max^{s+1}).
double explicit_step_limit(double max_mobility, const EigenBasis& basis, double s, double safety);

}  // namespace fracthin
