#include "fracthin/error.hpp"
#include "fracthin/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace fracthin;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kVerifyFailed = 2, kSolverFailed = 3, kInternal = 4 };

void error_record(const std::string& type, const std::string& message) {
    std::cerr << ojson{{"error", type}, {"message", message}}.dump() << '\n';
}

ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    ExperimentConfig cfg = path.empty() ? parse_config("") : load_config(path);
    if (seed) cfg.seed = *seed;
    return cfg;
}

int cmd_run(const ExperimentConfig& cfg, const fs::path& out) {
    const auto s = run_to_directory(cfg, out);
    if (s.status != "ok") {
        error_record(s.error_type, s.error_message);
        return kSolverFailed;
    }
    // identities are undefined in linear mode
    auto show = [](double v) {
        if (!std::isfinite(v)) return std::string("n/a");
        char b[32];
        std::snprintf(b, sizeof b, "%.3e", v);
        return std::string(b);
    };
    std::cout << "run " << config_hash(cfg) << ": " << s.record.size() << " samples, R_E = " << show(s.identities.energy_residual)
              << ", R_S = " << show(s.identities.entropy_residual) << ", output " << out.string() << '\n';
    return kOk;
}

int cmd_sweep(const ExperimentConfig& cfg, const fs::path& out, std::optional<unsigned> threads) {
    const auto rows = run_sweep(cfg, out, resolve_threads(threads));
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.summary.status != "ok";
    std::cout << "sweep: " << rows.size() << " rows, " << failed << " failed, table " << (out / "sweep.csv").string() << '\n';
    return failed == rows.size() ? kSolverFailed : kOk;
}

int cmd_verify(const std::string& level, std::uint64_t seed, bool inject, const fs::path& out) {
    VerifyOptions opt;
    opt.level = level == "full" ? VerifyLevel::Full : VerifyLevel::Fast;
    opt.seed = seed;
    opt.perturb_eigenvalue = inject;
    const auto checks = run_verify(opt);
    ojson rep;
    rep["level"] = level;
    rep["checks"] = ojson::array();
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.passed;
        rep["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", std::isfinite(c.value) ? ojson(c.value) : ojson(nullptr)},
                                 {"tolerance", c.tolerance}, {"detail", c.detail}});
    }
    rep["failed"] = ojson::array();
    for (const auto& c : checks) {
        if (!c.passed) rep["failed"].push_back(c.name);
    }
    rep["verdict"] = ok ? "pass" : "fail";
    const std::string text = rep.dump(2);
    std::cout << text << '\n';
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream(out / "verify.json") << text << '\n';
    }
    return ok ? kOk : kVerifyFailed;
}

int cmd_density(const ExperimentConfig& cfg, const fs::path& out) {
    const GridField u0 = make_initial(cfg);
    const double gexp = cfg.diagnostics.density_gamma > 0.0 ? cfg.diagnostics.density_gamma : 2.0 * (cfg.s + 1.0) / cfg.n;
    const double r0 = initial_radius(cfg);
    const auto center = support_center(cfg);
    const auto rep = flatness_density(u0, r0, gexp, cfg.n, cfg.diagnostics.density_levels, center);
    ojson j;
    j["config_hash"] = config_hash(cfg);
    j["r0"] = r0;
    j["gamma_exponent"] = gexp;
    j["points"] = ojson::array();
    for (const auto& p : rep.points) j["points"].push_back({{"delta", p.delta}, {"value", p.value}, {"nodes", p.nodes}});
    j["supremum"] = rep.supremum;
    j["tail_maximum"] = rep.tail_maximum;
    j["waiting_time_scale"] = std::isfinite(rep.waiting_time_scale) ? ojson(rep.waiting_time_scale) : ojson(nullptr);
    const std::string text = j.dump(2);
    std::cout << text << '\n';
    fs::create_directories(out);
    std::ofstream(out / "density.json") << text << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracthin: Galerkin solver and diagnostics for the fractional thin-film equation"};
    app.require_subcommand(1);
    std::string config_path, out_dir, level = "fast";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool inject = false;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "YAML configuration file");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: output.dir of the config)");
        sub->add_option("--seed", seed, "random seed overriding the config");
    };
    auto* run = app.add_subcommand("run", "single simulation");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "parameter sweep");
    add_common(sweep, true);
    sweep->add_option("--threads", threads, "worker count (fallback FRACTHIN_THREADS)")->check(CLI::PositiveNumber);
    auto* verify = app.add_subcommand("verify", "built-in verification suite");
    verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    verify->add_option("--seed", seed, "seed of the randomized checks");
    verify->add_option("--out", out_dir, "directory for verify.json");
    verify->add_flag("--inject-fault", inject)->group("");
    auto* density = app.add_subcommand("density", "flatness density of the initial datum over dyadic deltas");
    add_common(density, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfig;
    }

    try {
        if (verify->parsed()) return cmd_verify(level, seed.value_or(0), inject, out_dir);
        const auto cfg = load(config_path, seed);
        const fs::path out = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
        if (run->parsed()) return cmd_run(cfg, out);
        if (sweep->parsed()) return cmd_sweep(cfg, out, threads);
        return cmd_density(cfg, out);
    } catch (const ConfigError& e) {
        error_record("config", e.what());
        return kConfig;
    } catch (const DomainError& e) {
        error_record("domain", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        error_record("internal", e.what());
        return kInternal;
    }
}
