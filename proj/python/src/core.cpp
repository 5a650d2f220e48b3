#include "fracthin/diagnostics.hpp"
#include "fracthin/error.hpp"
#include "fracthin/experiment.hpp"
#include "fracthin/inequality.hpp"
#include "fracthin/spectral.hpp"

#include <algorithm>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fracthin;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

DomainGeometry geometry(const std::vector<double>& lengths, const std::vector<int>& modes) {
    return DomainGeometry::box(lengths, modes);
}

py::dict run_summary(const RunSummary& s) {
    py::dict d;
    d["status"] = s.status;
    d["error"] = s.error_message;
    if (s.status != "ok") return d;
    const auto& r = s.record;
    d["t"] = to_array(r.times);
    d["mass"] = to_array(r.mass);
    d["energy_hs"] = to_array(r.energy);
    d["entropy"] = to_array(r.entropy);
    d["dissipation"] = to_array(r.dissipation);
    d["support_radius"] = to_array(s.support_radius);
    d["min_u"] = to_array(r.min_u);
    d["max_u"] = to_array(r.max_u);
    d["energy_residual"] = s.identities.energy_residual;
    d["entropy_residual"] = s.identities.entropy_residual;
    d["mass_drift"] = s.mass_drift;
    d["predicted_exponent"] = s.predicted_exponent;
    d["fitted_exponent"] = s.fit ? py::cast(s.fit->exponent) : py::none();
    d["waiting_time"] = s.waiting ? py::cast(s.waiting->t0) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "fracthin C++ core";
    // translators run newest first, so the base class goes in first
    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());

    m.def("eigenvalues", [](const std::vector<double>& lengths, const std::vector<int>& modes) {
        return to_array(build_basis(geometry(lengths, modes))->eigenvalues());
    }, py::arg("lengths"), py::arg("modes"));
    m.def("grid_points", [](const std::vector<double>& lengths, const std::vector<int>& modes) {
        return geometry(lengths, modes).point_shape();
    }, py::arg("lengths"), py::arg("modes"));
    m.def("to_coefficients", [](const std::vector<double>& lengths, const std::vector<int>& modes, const std::vector<double>& values) {
        const auto g = geometry(lengths, modes);
        return to_array(to_coefficients(GridField(g, values), build_basis(g)).coefficients());
    }, py::arg("lengths"), py::arg("modes"), py::arg("values"), "grid values (last axis fastest) to coefficients");
    m.def("to_grid", [](const std::vector<double>& lengths, const std::vector<int>& modes, const std::vector<double>& coeffs) {
        const auto g = geometry(lengths, modes);
        return to_array(to_grid(SpectralField(build_basis(g), coeffs)).values());
    }, py::arg("lengths"), py::arg("modes"), py::arg("coefficients"));
    m.def("seminorm", [](const std::vector<double>& lengths, const std::vector<int>& modes, const std::vector<double>& coeffs, double r) {
        return seminorm(SpectralField(build_basis(geometry(lengths, modes)), coeffs), r);
    }, py::arg("lengths"), py::arg("modes"), py::arg("coefficients"), py::arg("r"));

    m.def("predicted_exponent", &predicted_propagation_exponent, py::arg("n"), py::arg("s"), py::arg("d"));
    m.def("fit_exponent", [](const std::vector<double>& t, const std::vector<double>& d, double r0, double h) {
        SupportSeries s;
        s.times = t;
        s.radii = d;
        s.grid_spacing = h;
        const auto f = fit_propagation_exponent(s, r0);
        return py::make_tuple(f.exponent, f.intercept, f.points);
    }, py::arg("times"), py::arg("radii"), py::arg("r0"), py::arg("grid_spacing"));
    m.def("gn_theta", &gn_theta, py::arg("b"), py::arg("s"), py::arg("d"));

    m.def("config_hash", [](const std::string& yaml) { return config_hash(parse_config(yaml)); }, py::arg("yaml_text"));
    m.def("run", [](const std::string& yaml) {
        const auto cfg = parse_config(yaml);
        RunSummary s;
        {
            py::gil_scoped_release release;
            s = execute_run(cfg);
        }
        return run_summary(s);
    }, py::arg("yaml_text"), "run a configuration given as YAML text; returns time series as arrays");
    m.def("run_to_directory", [](const std::string& yaml, const std::string& dir) {
        const auto cfg = parse_config(yaml);
        py::gil_scoped_release release;
        return run_to_directory(cfg, dir).status;
    }, py::arg("yaml_text"), py::arg("directory"));
    m.def("verify", [](bool full, bool inject) {
        VerifyOptions o;
        o.level = full ? VerifyLevel::Full : VerifyLevel::Fast;
        o.perturb_eigenvalue = inject;
        py::list out;
        for (const auto& c : run_verify(o)) {
            py::dict d;
            d["name"] = c.name;
            d["passed"] = c.passed;
            d["value"] = c.value;
            d["tolerance"] = c.tolerance;
            out.append(d);
        }
        return out;
    }, py::arg("full") = false, py::arg("inject_fault") = false);
}
