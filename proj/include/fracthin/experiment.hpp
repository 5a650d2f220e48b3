#pragma once

// Configured runs, sweeps and the verification suite behind the command-line tool.

#include "fracthin/diagnostics.hpp"
#include "fracthin/mobility.hpp"
#include "fracthin/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fracthin {

struct InitialConditionSpec {
    // compact-bump | waiting-time | constant | single-mode | file | random
    std::string family = "compact-bump";
    double amplitude = 1.0;
    double radius = 0.25;         // compact-bump support radius r0
    double power = 3.0;           // compact-bump: a (1 - (r/r0)^2)_+^power
    std::vector<double> center;   // compact-bump center, empty: box center
    double x0 = 0.5;              // waiting-time: support edge along axis 0
    double exponent = 0.0;        // waiting-time: profile exponent, 0 means 2(s+1)/n
    double value = 1.0;           // constant level, base level of single-mode and random
    std::vector<int> mode;        // single-mode multi-index
    int random_modes = 8;         // random: number of excited modes per axis
    std::string path;             // file: one value per grid node, whitespace separated
};

struct DiagnosticsSpec {
    double threshold = 1e-2;
    ThresholdMode threshold_mode = ThresholdMode::CurrentMax;
    SupportMetric metric = SupportMetric::Radial;
    std::vector<double> center;   // empty: compact-bump center, or the wall x = L for waiting-time
    std::optional<double> r0;     // empty: taken from the initial condition
    std::optional<double> tol_r;  // empty: 2 h
    std::vector<double> S;
    std::vector<double> sigma;
    int density_levels = 8;
    double density_gamma = 0.0;   // 0 means 2(s+1)/n
};

struct SweepAxes {
    std::vector<double> n, s, epsilon, delta, gamma;
    std::vector<int> modes;
    bool any() const { return !(n.empty() && s.empty() && modes.empty() && epsilon.empty() && delta.empty() && gamma.empty()); }
};

struct ExperimentConfig {
    std::vector<double> lengths{2.0};
    std::vector<int> modes{64};
    std::vector<int> points;  // empty: default quadrature
    double n = 1.5;
    double s = 0.5;
    double epsilon = 1e-6;
    double delta = 1e-6;
    double gamma = 1e-8;
    std::optional<double> alpha;
    SolverConfig solver;      // geometry and mobility are rebuilt by resolve()
    bool lift = true;
    std::optional<LiftParams> lift_params;
    InitialConditionSpec initial;
    DiagnosticsSpec diagnostics;
    SweepAxes sweep;
    bool sweep_present = false;
    std::size_t sweep_cap = 64;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    /// Rebuilds solver.geometry and solver.mobility from the scalar fields and validates.
    void resolve();
};

/// Parses the YAML text; unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text of the configuration (output directory excluded).
std::string canonical_config(const ExperimentConfig& cfg);
/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits of fnv1a64(canonical_config(cfg)).
std::string config_hash(const ExperimentConfig& cfg);

/// Nonnegative initial datum on the configured grid, before lifting.
GridField make_initial(const ExperimentConfig& cfg);
/// Center used for support radii.
std::vector<double> support_center(const ExperimentConfig& cfg);
/// r0 of the run: diagnostics.r0 or the initial-condition radius.
double initial_radius(const ExperimentConfig& cfg);

struct RunSummary {
    std::string status = "ok";
    std::string error_type;
    std::string error_message;
    RunRecord record;
    std::vector<double> support_radius;
    IdentityReport identities;
    double mass_drift = 0.0;
    double energy_max_increase = 0.0;
    std::optional<ExponentFit> fit;
    std::string fit_error;
    std::optional<WaitingTime> waiting;
    std::string waiting_error;
    double predicted_exponent = 0.0;
};

/// Runs the solver and diagnostics. Solver failures are caught and reported in the summary.
RunSummary execute_run(const ExperimentConfig& cfg);
/// execute_run plus run.csv, snapshots and report.json (or error.json) under dir.
RunSummary run_to_directory(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Snapshot file header.
inline constexpr char kSnapshotMagic[8] = {'F', 'T', 'S', 'N', 'A', 'P', '0', '1'};
void write_snapshot(const std::filesystem::path& bin, const Snapshot& snap, const DomainGeometry& g, const std::string& hash);
Snapshot read_snapshot(const std::filesystem::path& bin);

struct SweepRow {
    std::size_t index = 0;
    double n = 0, s = 0, epsilon = 0, delta = 0, gamma = 0;
    int modes = 0;
    RunSummary summary;
};

/// Cartesian product in the order (n, s, N, epsilon, delta, gamma), last axis fastest.
/// Throws ConfigError when no axis is given, an axis is empty or the size exceeds sweep_cap.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);
/// Runs every row on `threads` workers; writes row_XXXX directories and sweep.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir, unsigned threads);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

enum class VerifyLevel { Fast, Full };

struct VerifyOptions {
    VerifyLevel level = VerifyLevel::Fast;
    bool perturb_eigenvalue = false;  // fault injection
    std::uint64_t seed = 0;
};

std::vector<VerifyCheck> run_verify(const VerifyOptions& opt);

/// Worker count: explicit value, else FRACTHIN_THREADS, else hardware concurrency (at least 1).
unsigned resolve_threads(std::optional<unsigned> requested);

}  // namespace fracthin
