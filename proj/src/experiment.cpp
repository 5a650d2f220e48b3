#include "fracthin/experiment.hpp"

#include "fracthin/error.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace fracthin {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- parsing

namespace {

void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
    }
}

template <class T>
T as(const YAML::Node& v, const std::string& where) {
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("malformed value for '" + where + "'");
    }
}

template <class T>
void read(const YAML::Node& sec, const char* key, const std::string& section, T& out) {
    if (const auto v = sec[key]) out = as<T>(v, section + "." + key);
}

template <class T>
void read_opt(const YAML::Node& sec, const char* key, const std::string& section, std::optional<T>& out) {
    if (const auto v = sec[key]) out = as<T>(v, section + "." + key);
}

template <class T>
void read_list(const YAML::Node& sec, const char* key, const std::string& section, std::vector<T>& out) {
    const auto v = sec[key];
    if (!v) return;
    const std::string where = section + "." + key;
    if (v.IsScalar()) {
        out = {as<T>(v, where)};
        return;
    }
    if (!v.IsSequence()) throw ConfigError("'" + where + "' must be a scalar or a list");
    out.clear();
    for (const auto& x : v) out.push_back(as<T>(x, where));
}

ThresholdMode parse_threshold_mode(const std::string& s) {
    if (s == "absolute") return ThresholdMode::Absolute;
    if (s == "initial") return ThresholdMode::InitialMax;
    if (s == "current") return ThresholdMode::CurrentMax;
    throw ConfigError("diagnostics.threshold_mode must be absolute, initial or current");
}

const char* threshold_mode_name(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::Absolute: return "absolute";
        case ThresholdMode::InitialMax: return "initial";
        case ThresholdMode::CurrentMax: return "current";
    }
    return "?";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    ExperimentConfig cfg;
    if (!root || root.IsNull()) {
        cfg.resolve();
        return cfg;
    }
    check_keys(root, "<top>", {"domain", "model", "solver", "lift", "initial", "diagnostics", "sweep", "output", "seed"});
    read(root, "seed", "<top>", cfg.seed);

    if (const auto d = root["domain"]) {
        check_keys(d, "domain", {"lengths", "modes", "points"});
        read_list(d, "lengths", "domain", cfg.lengths);
        read_list(d, "modes", "domain", cfg.modes);
        read_list(d, "points", "domain", cfg.points);
    }
    if (const auto m = root["model"]) {
        check_keys(m, "model", {"n", "s", "epsilon", "delta", "gamma", "alpha", "linear_mode"});
        read(m, "n", "model", cfg.n);
        read(m, "s", "model", cfg.s);
        read(m, "epsilon", "model", cfg.epsilon);
        read(m, "delta", "model", cfg.delta);
        read(m, "gamma", "model", cfg.gamma);
        read_opt(m, "alpha", "model", cfg.alpha);
        read(m, "linear_mode", "model", cfg.solver.linear_mode);
    }
    if (const auto s = root["solver"]) {
        check_keys(s, "solver", {"final_time", "stepper", "rtol", "atol", "dt_initial", "dt_min", "safety", "samples",
                                 "snapshot_stride", "entropy", "flux_dissipation_includes_gamma"});
        read(s, "final_time", "solver", cfg.solver.final_time);
        read(s, "rtol", "solver", cfg.solver.rtol);
        read(s, "atol", "solver", cfg.solver.atol);
        read(s, "dt_initial", "solver", cfg.solver.dt_initial);
        read(s, "dt_min", "solver", cfg.solver.dt_min);
        read(s, "safety", "solver", cfg.solver.safety);
        read(s, "samples", "solver", cfg.solver.record_samples);
        read(s, "snapshot_stride", "solver", cfg.solver.snapshot_stride);
        read(s, "flux_dissipation_includes_gamma", "solver", cfg.solver.flux_dissipation_includes_gamma);
        if (const auto v = s["stepper"]) {
            const auto k = as<std::string>(v, "solver.stepper");
            if (k == "imex") {
                cfg.solver.stepper = StepperKind::Imex;
            } else if (k == "explicit") {
                cfg.solver.stepper = StepperKind::ExplicitAdaptive;
            } else {
                throw ConfigError("solver.stepper must be imex or explicit");
            }
        }
        if (const auto v = s["entropy"]) {
            const auto k = as<std::string>(v, "solver.entropy");
            if (k == "regularized") {
                cfg.solver.entropy = EntropyKind::Regularized;
            } else if (k == "g0") {
                cfg.solver.entropy = EntropyKind::G0;
            } else {
                throw ConfigError("solver.entropy must be regularized or g0");
            }
        }
    }
    if (const auto l = root["lift"]) {
        check_keys(l, "lift", {"enabled", "theta1", "theta2"});
        read(l, "enabled", "lift", cfg.lift);
        if (l["theta1"] || l["theta2"]) {
            LiftParams p;
            read(l, "theta1", "lift", p.theta1);
            read(l, "theta2", "lift", p.theta2);
            cfg.lift_params = p;
        }
    }
    if (const auto i = root["initial"]) {
        check_keys(i, "initial", {"family", "amplitude", "radius", "power", "center", "x0", "exponent", "value", "mode",
                                  "random_modes", "path"});
        auto& ic = cfg.initial;
        read(i, "family", "initial", ic.family);
        read(i, "amplitude", "initial", ic.amplitude);
        read(i, "radius", "initial", ic.radius);
        read(i, "power", "initial", ic.power);
        read_list(i, "center", "initial", ic.center);
        read(i, "x0", "initial", ic.x0);
        read(i, "exponent", "initial", ic.exponent);
        read(i, "value", "initial", ic.value);
        read_list(i, "mode", "initial", ic.mode);
        read(i, "random_modes", "initial", ic.random_modes);
        read(i, "path", "initial", ic.path);
    }
    if (const auto g = root["diagnostics"]) {
        check_keys(g, "diagnostics", {"threshold", "threshold_mode", "metric", "center", "r0", "tol_r", "S", "sigma",
                                      "density_levels", "density_gamma"});
        auto& dg = cfg.diagnostics;
        read(g, "threshold", "diagnostics", dg.threshold);
        if (const auto v = g["threshold_mode"]) dg.threshold_mode = parse_threshold_mode(as<std::string>(v, "diagnostics.threshold_mode"));
        if (const auto v = g["metric"]) {
            const auto k = as<std::string>(v, "diagnostics.metric");
            if (k == "radial") {
                dg.metric = SupportMetric::Radial;
            } else if (k == "box") {
                dg.metric = SupportMetric::SupBox;
            } else {
                throw ConfigError("diagnostics.metric must be radial or box");
            }
        }
        read_list(g, "center", "diagnostics", dg.center);
        read_opt(g, "r0", "diagnostics", dg.r0);
        read_opt(g, "tol_r", "diagnostics", dg.tol_r);
        read_list(g, "S", "diagnostics", dg.S);
        read_list(g, "sigma", "diagnostics", dg.sigma);
        read(g, "density_levels", "diagnostics", dg.density_levels);
        read(g, "density_gamma", "diagnostics", dg.density_gamma);
    }
    if (const auto w = root["sweep"]) {
        check_keys(w, "sweep", {"n", "s", "modes", "epsilon", "delta", "gamma", "cap"});
        cfg.sweep_present = true;
        auto axis = [&](const char* key, auto& out) {
            if (!w[key]) return;
            read_list(w, key, "sweep", out);
            if (out.empty()) throw ConfigError(std::string("sweep axis '") + key + "' is empty");
        };
        axis("n", cfg.sweep.n);
        axis("s", cfg.sweep.s);
        axis("modes", cfg.sweep.modes);
        axis("epsilon", cfg.sweep.epsilon);
        axis("delta", cfg.sweep.delta);
        axis("gamma", cfg.sweep.gamma);
        read(w, "cap", "sweep", cfg.sweep_cap);
    }
    if (const auto o = root["output"]) {
        check_keys(o, "output", {"dir"});
        read(o, "dir", "output", cfg.output_dir);
    }
    cfg.resolve();
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void ExperimentConfig::resolve() {
    if (lengths.empty() || lengths.size() != modes.size()) throw ConfigError("domain.lengths and domain.modes must have equal nonzero length");
    if (!points.empty() && points.size() != modes.size()) throw ConfigError("domain.points must match domain.modes");
    solver.geometry = DomainGeometry::box(lengths, modes, points);
    solver.s = s;
    const int d = solver.geometry.dimension();
    solver.mobility = MobilityParams::make(n, s, d, epsilon, delta, gamma);
    if (alpha) solver.mobility.alpha = *alpha;
    solver.validate();
    if (lift_params) lift_params->validate(solver.mobility);
    static const std::set<std::string> families{"compact-bump", "waiting-time", "constant", "single-mode", "file", "random"};
    if (!families.count(initial.family)) throw ConfigError("unknown initial family '" + initial.family + "'");
    if (initial.family == "waiting-time" && d != 1) throw ConfigError("waiting-time family is one-dimensional");
    if (!initial.center.empty() && static_cast<int>(initial.center.size()) != d) throw ConfigError("initial.center has wrong dimension");
    if (!diagnostics.center.empty() && static_cast<int>(diagnostics.center.size()) != d) throw ConfigError("diagnostics.center has wrong dimension");
    if (!(diagnostics.threshold > 0.0)) throw ConfigError("diagnostics.threshold must be positive");
    if (sweep_cap == 0) throw ConfigError("sweep.cap must be positive");
}

// ---------------------------------------------------------------- hashing

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

ojson config_json(const ExperimentConfig& c) {
    ojson j;
    j["domain"] = {{"lengths", c.lengths}, {"modes", c.modes}, {"points", c.points}};
    j["model"] = {{"n", c.n}, {"s", c.s}, {"epsilon", c.epsilon}, {"delta", c.delta}, {"gamma", c.gamma},
                  {"alpha", c.solver.mobility.alpha}, {"linear_mode", c.solver.linear_mode}};
    j["solver"] = {{"final_time", c.solver.final_time},
                   {"stepper", c.solver.stepper == StepperKind::Imex ? "imex" : "explicit"},
                   {"rtol", c.solver.rtol},
                   {"atol", c.solver.atol},
                   {"dt_initial", c.solver.dt_initial},
                   {"dt_min", c.solver.dt_min},
                   {"safety", c.solver.safety},
                   {"samples", c.solver.record_samples},
                   {"snapshot_stride", c.solver.snapshot_stride},
                   {"entropy", c.solver.entropy == EntropyKind::G0 ? "g0" : "regularized"},
                   {"flux_dissipation_includes_gamma", c.solver.flux_dissipation_includes_gamma}};
    const auto lp = c.lift_params.value_or(LiftParams::defaults(c.solver.mobility));
    j["lift"] = {{"enabled", c.lift}, {"theta1", lp.theta1}, {"theta2", lp.theta2}};
    const auto& i = c.initial;
    j["initial"] = {{"family", i.family}, {"amplitude", i.amplitude}, {"radius", i.radius}, {"power", i.power},
                    {"center", i.center}, {"x0", i.x0}, {"exponent", i.exponent}, {"value", i.value},
                    {"mode", i.mode}, {"random_modes", i.random_modes}, {"path", i.path}};
    const auto& g = c.diagnostics;
    j["diagnostics"] = {{"threshold", g.threshold},
                        {"threshold_mode", threshold_mode_name(g.threshold_mode)},
                        {"metric", g.metric == SupportMetric::Radial ? "radial" : "box"},
                        {"center", g.center},
                        {"r0", g.r0 ? ojson(*g.r0) : ojson(nullptr)},
                        {"tol_r", g.tol_r ? ojson(*g.tol_r) : ojson(nullptr)},
                        {"S", g.S},
                        {"sigma", g.sigma},
                        {"density_levels", g.density_levels},
                        {"density_gamma", g.density_gamma}};
    if (c.sweep_present) {
        j["sweep"] = {{"n", c.sweep.n}, {"s", c.sweep.s}, {"modes", c.sweep.modes}, {"epsilon", c.sweep.epsilon},
                      {"delta", c.sweep.delta}, {"gamma", c.sweep.gamma}, {"cap", c.sweep_cap}};
    }
    j["seed"] = c.seed;
    return j;
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

std::string canonical_config(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
    return buf;
}

// ---------------------------------------------------------------- initial data

std::vector<double> support_center(const ExperimentConfig& cfg) {
    if (!cfg.diagnostics.center.empty()) return cfg.diagnostics.center;
    const auto& g = cfg.solver.geometry;
    if (cfg.initial.family == "waiting-time") return {g.axis(0).length};
    if (!cfg.initial.center.empty()) return cfg.initial.center;
    return g.center();
}

double initial_radius(const ExperimentConfig& cfg) {
    if (cfg.diagnostics.r0) return *cfg.diagnostics.r0;
    if (cfg.initial.family == "waiting-time") return cfg.solver.geometry.axis(0).length - cfg.initial.x0;
    return cfg.initial.radius;
}

GridField make_initial(const ExperimentConfig& cfg) {
    const auto& g = cfg.solver.geometry;
    const auto& ic = cfg.initial;
    const int d = g.dimension();
    if (ic.family == "compact-bump") {
        if (!(ic.radius > 0.0) || !(ic.amplitude >= 0.0) || !(ic.power >= 0.0)) throw ConfigError("compact-bump needs radius > 0, amplitude >= 0, power >= 0");
        const auto c = ic.center.empty() ? g.center() : ic.center;
        return sample(g, [&](std::span<const double> x) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]) * (x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]);
            const double q = 1.0 - r2 / (ic.radius * ic.radius);
            return q > 0.0 ? ic.amplitude * std::pow(q, ic.power) : 0.0;
        });
    }
    if (ic.family == "waiting-time") {
        const double L = g.axis(0).length;
        if (!(ic.x0 > 0.0 && ic.x0 < L)) throw ConfigError("waiting-time x0 must lie inside the interval");
        const double p = ic.exponent > 0.0 ? ic.exponent : 2.0 * (cfg.s + 1.0) / cfg.n;
        return sample(g, [&](std::span<const double> x) {
            const double z = (x[0] - ic.x0) / (L - ic.x0);
            return z > 0.0 ? ic.amplitude * std::pow(z, p) : 0.0;
        });
    }
    if (ic.family == "constant") {
        if (!(ic.value >= 0.0)) throw ConfigError("constant value must be nonnegative");
        return GridField(g, std::vector<double>(g.point_count(), ic.value));
    }
    if (ic.family == "single-mode") {
        if (static_cast<int>(ic.mode.size()) != d) throw ConfigError("single-mode needs a mode index per axis");
        auto b = build_basis(g);
        auto u = to_grid(basis_function(b, ic.mode));
        std::vector<double> v(u.values().begin(), u.values().end());
        const double m = u.max_abs();
        for (double& x : v) x = ic.value + ic.amplitude * x / m;
        GridField out(g, std::move(v));
        if (out.min() < 0.0) throw DomainError("single-mode datum is negative; raise initial.value");
        return out;
    }
    if (ic.family == "random") {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        auto b = build_basis(g);
        SpectralField f(b);
        for (std::size_t k = 1; k < b->size(); ++k) {
            const auto mi = b->multi_index(k);
            if (std::any_of(mi.begin(), mi.end(), [&](int m) { return m >= ic.random_modes; })) continue;
            double w = 1.0;
            for (int m : mi) w += m * m;
            f.coefficients()[k] = uni(rng) / w;
        }
        auto u = to_grid(f);
        const double m = u.max_abs();
        std::vector<double> v(u.values().begin(), u.values().end());
        for (double& x : v) x = ic.value + (m > 0.0 ? ic.amplitude * x / m : 0.0);
        GridField out(g, std::move(v));
        if (out.min() < 0.0) throw DomainError("random datum is negative; need initial.value >= initial.amplitude");
        return out;
    }
    // file
    std::ifstream in(ic.path);
    if (!in) throw ConfigError("cannot open initial file " + ic.path);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (!in.eof()) throw ConfigError("initial file " + ic.path + " has a non-numeric entry");
    if (v.size() != g.point_count()) {
        throw ConfigError("initial file has " + std::to_string(v.size()) + " values, grid has " + std::to_string(g.point_count()));
    }
    GridField out(g, std::move(v));
    if (out.min() < 0.0) throw DomainError("initial file contains negative values");
    return out;
}

// ---------------------------------------------------------------- runs

RunSummary execute_run(const ExperimentConfig& cfg) {
    RunSummary sum;
    const auto& g = cfg.solver.geometry;
    const auto center = support_center(cfg);
    const double r0 = initial_radius(cfg);
    const double tol_r = cfg.diagnostics.tol_r.value_or(2.0 * g.grid_spacing());
    sum.predicted_exponent = predicted_propagation_exponent(cfg.n, cfg.s, g.dimension());
    try {
        GridField u0 = make_initial(cfg);
        if (cfg.lift) u0 = lift_initial_datum(u0, cfg.solver.mobility, cfg.lift_params.value_or(LiftParams::defaults(cfg.solver.mobility)));
        double initial_max = 0.0;
        const auto& dg = cfg.diagnostics;
        auto observer = [&](std::size_t idx, double, const SpectralField& u) {
            const GridField w = to_grid(u);
            if (idx == 0) initial_max = w.max_abs();
            double thr = dg.threshold;
            if (dg.threshold_mode == ThresholdMode::InitialMax) thr *= initial_max;
            if (dg.threshold_mode == ThresholdMode::CurrentMax) thr *= w.max_abs();
            sum.support_radius.push_back(thr > 0.0 ? support_radius(w, thr, dg.metric, center) : 0.0);
        };
        sum.record = run(u0, cfg.solver, observer);
    } catch (const BlowUpError& e) {
        sum.status = "error";
        sum.error_type = "blow-up";
        sum.error_message = e.what();
        return sum;
    } catch (const StiffnessError& e) {
        sum.status = "error";
        sum.error_type = "stiffness";
        sum.error_message = e.what();
        return sum;
    } catch (const NumericError& e) {
        sum.status = "error";
        sum.error_type = "numeric";
        sum.error_message = e.what();
        return sum;
    }
    const auto& rec = sum.record;
    sum.identities = verify_identities(rec, cfg.solver);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        sum.mass_drift = std::max(sum.mass_drift, std::abs(rec.mass[i] - rec.mass[0]) / std::max(std::abs(rec.mass[0]), 1e-300));
        if (i > 0 && rec.energy[i - 1] > 0.0) {
            sum.energy_max_increase = std::max(sum.energy_max_increase, (rec.energy[i] - rec.energy[i - 1]) / rec.energy[i - 1]);
        }
    }
    SupportSeries series;
    series.times = rec.times;
    series.radii = sum.support_radius;
    series.grid_spacing = g.grid_spacing();
    try {
        sum.fit = fit_propagation_exponent(series, r0);
    } catch (const Error& e) {
        sum.fit_error = e.what();
    }
    try {
        sum.waiting = detect_waiting_time(series, r0, tol_r);
    } catch (const Error& e) {
        sum.waiting_error = e.what();
    }
    return sum;
}

void write_snapshot(const fs::path& bin, const Snapshot& snap, const DomainGeometry& g, const std::string& hash) {
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw Error("cannot write " + bin.string());
    out.write(kSnapshotMagic, 8);
    const auto dim = static_cast<std::uint32_t>(g.dimension());
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (int a = 0; a < g.dimension(); ++a) {
        const auto m = static_cast<std::uint32_t>(g.axis(a).modes);
        out.write(reinterpret_cast<const char*>(&m), 4);
    }
    for (int a = 0; a < g.dimension(); ++a) {
        const double L = g.axis(a).length;
        out.write(reinterpret_cast<const char*>(&L), 8);
    }
    const auto idx = static_cast<std::uint64_t>(snap.sample);
    out.write(reinterpret_cast<const char*>(&idx), 8);
    out.write(reinterpret_cast<const char*>(&snap.t), 8);
    out.write(reinterpret_cast<const char*>(snap.coefficients.data()), static_cast<std::streamsize>(8 * snap.coefficients.size()));

    ojson side;
    side["format"] = "FTSNAP01";
    side["config_hash"] = hash;
    side["sample"] = snap.sample;
    side["t"] = snap.t;
    side["dimension"] = g.dimension();
    std::vector<int> modes;
    std::vector<double> lengths;
    for (int a = 0; a < g.dimension(); ++a) {
        modes.push_back(g.axis(a).modes);
        lengths.push_back(g.axis(a).length);
    }
    side["modes"] = modes;
    side["lengths"] = lengths;
    side["coefficients"] = snap.coefficients.size();
    side["layout"] = "little-endian; magic[8], u32 dim, u32 modes[dim], f64 lengths[dim], u64 sample, f64 t, f64 coefficients (last axis fastest)";
    auto json_path = bin;
    json_path.replace_extension(".json");
    std::ofstream js(json_path);
    js << side.dump(2) << '\n';
}

Snapshot read_snapshot(const fs::path& bin) {
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw Error("cannot read " + bin.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kSnapshotMagic, 8) != 0) throw Error(bin.string() + " is not a snapshot file");
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    std::size_t count = 1;
    for (std::uint32_t a = 0; a < dim; ++a) {
        std::uint32_t m = 0;
        in.read(reinterpret_cast<char*>(&m), 4);
        count *= m;
    }
    in.seekg(static_cast<std::streamoff>(8 * dim), std::ios::cur);
    Snapshot s;
    std::uint64_t idx = 0;
    in.read(reinterpret_cast<char*>(&idx), 8);
    in.read(reinterpret_cast<char*>(&s.t), 8);
    s.sample = idx;
    s.coefficients.resize(count);
    in.read(reinterpret_cast<char*>(s.coefficients.data()), static_cast<std::streamsize>(8 * count));
    if (!in) throw Error(bin.string() + " is truncated");
    return s;
}

namespace {

ojson summary_json(const ExperimentConfig& cfg, const RunSummary& s, const std::string& hash) {
    ojson j;
    j["config_hash"] = hash;
    j["status"] = s.status;
    if (s.status != "ok") {
        j["error"] = {{"type", s.error_type}, {"message", s.error_message}};
        return j;
    }
    const auto& r = s.record;
    j["final_time"] = r.times.back();
    j["samples"] = r.size();
    j["mass"] = {{"initial", r.mass.front()}, {"final", r.mass.back()}, {"max_relative_drift", s.mass_drift}};
    j["energy"] = {{"initial", r.energy.front()}, {"final", r.energy.back()}, {"max_relative_increase", s.energy_max_increase}};
    j["entropy"] = {{"initial", num(r.entropy.front())}, {"final", num(r.entropy.back())}};
    j["identities"] = {{"energy_residual", num(s.identities.energy_residual)},
                       {"entropy_residual", num(s.identities.entropy_residual)}};
    j["min_u"] = *std::min_element(r.min_u.begin(), r.min_u.end());
    j["positivity_warning"] = r.positivity_warning;
    j["support"] = {{"center", support_center(cfg)},
                    {"r0", initial_radius(cfg)},
                    {"initial", s.support_radius.front()},
                    {"final", s.support_radius.back()}};
    j["propagation"] = {{"predicted_exponent", s.predicted_exponent}};
    if (s.fit) {
        j["propagation"]["fitted_exponent"] = s.fit->exponent;
        j["propagation"]["intercept"] = s.fit->intercept;
        j["propagation"]["residual"] = s.fit->residual;
        j["propagation"]["points"] = s.fit->points;
        j["propagation"]["window_start"] = s.fit->window_start;
    } else {
        j["propagation"]["fitted_exponent"] = nullptr;
        j["propagation"]["reason"] = s.fit_error;
    }
    if (s.waiting) {
        j["waiting_time"] = {{"t0", s.waiting->t0}, {"index", s.waiting->index}, {"moved", s.waiting->moved}};
    } else {
        j["waiting_time"] = {{"t0", nullptr}, {"reason", s.waiting_error}};
    }
    j["steps"] = {{"accepted", r.stats.accepted}, {"rejected", r.stats.rejected}, {"rhs_evaluations", r.stats.rhs_evaluations}};
    return j;
}

}  // namespace

RunSummary run_to_directory(const ExperimentConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    const std::string hash = config_hash(cfg);
    RunSummary s = execute_run(cfg);
    if (s.status != "ok") {
        std::ofstream(dir / "error.json") << summary_json(cfg, s, hash).dump(2) << '\n';
        return s;
    }
    const auto& r = s.record;
    {
        std::ofstream csv(dir / "run.csv");
        csv << "# config_hash=" << hash << " seed=" << cfg.seed << '\n';
        csv << "t,mass,energy_hs,entropy,dissipation,support_radius,min_u,max_u\n";
        for (std::size_t i = 0; i < r.size(); ++i) {
            csv << fmt17(r.times[i]) << ',' << fmt17(r.mass[i]) << ',' << fmt17(r.energy[i]) << ',' << fmt17(r.entropy[i])
                << ',' << fmt17(r.dissipation[i]) << ',' << fmt17(s.support_radius[i]) << ',' << fmt17(r.min_u[i]) << ','
                << fmt17(r.max_u[i]) << '\n';
        }
    }
    const auto snapdir = dir / "snapshots";
    fs::create_directories(snapdir);
    for (const auto& snap : r.snapshots) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.bin", snap.sample);
        write_snapshot(snapdir / name, snap, cfg.solver.geometry, hash);
    }
    auto rep = summary_json(cfg, s, hash);
    rep["config"] = config_json(cfg);
    std::ofstream(dir / "report.json") << rep.dump(2) << '\n';
    return s;
}

// ---------------------------------------------------------------- sweeps

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep_present || !cfg.sweep.any()) throw ConfigError("sweep needs at least one nonempty axis");
    auto axis = [](const auto& v, auto base) { return v.empty() ? std::vector<decltype(base)>{base} : v; };
    const auto ns = axis(cfg.sweep.n, cfg.n);
    const auto ss = axis(cfg.sweep.s, cfg.s);
    const auto Ns = axis(cfg.sweep.modes, cfg.modes.front());
    const auto es = axis(cfg.sweep.epsilon, cfg.epsilon);
    const auto ds = axis(cfg.sweep.delta, cfg.delta);
    const auto gs = axis(cfg.sweep.gamma, cfg.gamma);
    const std::size_t total = ns.size() * ss.size() * Ns.size() * es.size() * ds.size() * gs.size();
    if (total > cfg.sweep_cap) throw ConfigError("sweep has " + std::to_string(total) + " rows, cap is " + std::to_string(cfg.sweep_cap));
    std::vector<ExperimentConfig> out;
    for (double n : ns)
        for (double s : ss)
            for (int N : Ns)
                for (double e : es)
                    for (double d : ds)
                        for (double g : gs) {
                            ExperimentConfig c = cfg;
                            c.sweep_present = false;
                            c.sweep = {};
                            c.n = n;
                            c.s = s;
                            for (auto& m : c.modes) m = N;
                            c.points.clear();
                            c.epsilon = e;
                            c.delta = d;
                            c.gamma = g;
                            c.resolve();
                            out.push_back(std::move(c));
                        }
    return out;
}

unsigned resolve_threads(std::optional<unsigned> requested) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("FRACTHIN_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw ConfigError(std::string("FRACTHIN_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const fs::path& dir, unsigned threads) {
    const auto configs = expand_sweep(cfg);
    std::vector<SweepRow> rows(configs.size());
    fs::create_directories(dir);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            const auto& c = configs[i];
            auto& row = rows[i];
            row.index = i;
            row.n = c.n;
            row.s = c.s;
            row.modes = c.modes.front();
            row.epsilon = c.epsilon;
            row.delta = c.delta;
            row.gamma = c.gamma;
            char name[32];
            std::snprintf(name, sizeof name, "row_%04zu", i);
            try {
                row.summary = run_to_directory(c, dir / name);
            } catch (const std::exception& e) {
                row.summary.status = "error";
                row.summary.error_type = "exception";
                row.summary.error_message = e.what();
            }
        }
    };
    const unsigned k = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ofstream csv(dir / "sweep.csv");
    csv << "# config_hash=" << config_hash(cfg) << " seed=" << cfg.seed << '\n';
    csv << "row,n,s,N,epsilon,delta,gamma,status,fitted_exponent,predicted_exponent,waiting_time,energy_residual,"
           "entropy_residual,mass_drift,error\n";
    for (const auto& r : rows) {
        const auto& s = r.summary;
        const bool ok = s.status == "ok";
        std::string err = s.error_message;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        csv << r.index << ',' << fmt17(r.n) << ',' << fmt17(r.s) << ',' << r.modes << ',' << fmt17(r.epsilon) << ','
            << fmt17(r.delta) << ',' << fmt17(r.gamma) << ',' << s.status << ','
            << (ok && s.fit ? fmt17(s.fit->exponent) : "") << ',' << fmt17(s.predicted_exponent) << ','
            << (ok && s.waiting ? fmt17(s.waiting->t0) : "") << ',' << (ok ? fmt17(s.identities.energy_residual) : "")
            << ',' << (ok ? fmt17(s.identities.entropy_residual) : "") << ',' << (ok ? fmt17(s.mass_drift) : "") << ','
            << err << '\n';
    }
    return rows;
}

}  // namespace fracthin
