#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "mlq/analysis.hpp"
#include "mlq/cli.hpp"
#include "mlq/config.hpp"
#include "mlq/decomposition.hpp"
#include "mlq/errors.hpp"
#include "mlq/experiment.hpp"
#include "mlq/reflection.hpp"
#include "mlq/selftest.hpp"

namespace py = pybind11;
using namespace mlq;

namespace {

py::tuple run(const std::vector<std::string>& args) {
    std::vector<std::string> full{"mlq"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

py::dict simulate(const std::string& config_json, int n, std::size_t replication) {
    const auto cfg = parse_config(config_json);
    const auto sys = scale_system(cfg.levels, n);
    const auto a = cfg.arrival_spec();
    const auto s = cfg.service_spec();
    QueuePath path;
    DmDefect defect;
    {
        py::gil_scoped_release release;
        path = simulate_queue(sys, a, s, cfg.horizon, queue_streams(cfg.seed, n, replication));
        defect = verify_dm_identity(build_record(path, a, s), path, n);
    }
    std::vector<double> t, x_hat;
    std::vector<std::int64_t> x, arrivals, departures;
    for (const auto& e : path.events()) {
        t.push_back(e.time);
        x.push_back(e.x);
        arrivals.push_back(e.a);
        departures.push_back(e.d);
        x_hat.push_back(static_cast<double>(e.x) / sys.scale());
    }
    py::dict d;
    d["time"] = t;
    d["x"] = x;
    d["a"] = arrivals;
    d["d"] = departures;
    d["x_hat"] = x_hat;
    d["occupation"] = occupation_times(path, cfg.horizon);
    d["dm_defect"] = defect.max();
    d["flow_defect"] = verify_flow_balance(path);
    return d;
}

py::dict solve_sde(const std::string& config_json, const std::string& scheme, double x0, std::size_t replication) {
    const auto cfg = parse_config(config_json);
    const auto c = cfg.coefficients();
    SdeGridPath p;
    {
        py::gil_scoped_release release;
        if (scheme == "projected") {
            Stream st = sde_stream(cfg.seed, Scheme::projected, replication);
            p = solve_projected(c, x0, cfg.horizon, cfg.sde_dt, st, cfg.sde_projection);
        } else if (scheme == "mirror") {
            Stream st = sde_stream(cfg.seed, Scheme::mirror, replication);
            p = solve_mirror(c, x0, cfg.horizon, cfg.sde_dt, st);
        } else {
            throw ParameterError("scheme", "expected 'projected' or 'mirror'");
        }
    }
    py::dict d;
    d["dt"] = p.dt;
    d["x"] = p.x;
    d["l"] = p.l;
    return d;
}

py::tuple reflect(const std::vector<double>& times, const std::vector<double>& values,
                  const std::vector<double>& slopes, double horizon, const std::vector<double>& at) {
    const auto r = skorokhod_map(CadlagPath(times, values, slopes, horizon));
    std::vector<double> phi, eta;
    for (double t : at) {
        phi.push_back(r.phi(t));
        eta.push_back(r.eta(t));
    }
    return py::make_tuple(phi, eta);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-level GI/G/1 heavy-traffic simulator";
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<CoverageError>(m, "CoverageError", PyExc_IndexError);

    m.attr("__version__") = std::string(kToolVersion);
    m.def("run", &run, py::arg("args"), "Run the command-line driver; returns (exit_code, stdout, stderr).");
    m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("config_json"));
    m.def("canonical_json", [](const std::string& text) { return canonical_json(parse_config(text)); },
          py::arg("config_json"));
    m.def("simulate", &simulate, py::arg("config_json"), py::arg("n"), py::arg("replication") = 0,
          "One queue replication: event times, X, A, D, X-hat, occupation times and identity defects.");
    m.def("solve_sde", &solve_sde, py::arg("config_json"), py::arg("scheme") = "projected", py::arg("x0") = 0.0,
          py::arg("replication") = 0, "One SDE path on the configured grid.");
    m.def("reflect", &reflect, py::arg("times"), py::arg("values"), py::arg("slopes"), py::arg("horizon"),
          py::arg("at"), "Skorokhod map of a piecewise-linear path, evaluated at `at`; returns (phi, eta).");
    m.def("ks_distance", [](const std::vector<double>& a, const std::vector<double>& b) { return ks_distance(a, b); });
    m.def("selftest", [] {
        std::vector<py::tuple> out;
        for (const auto& r : run_selftest()) out.push_back(py::make_tuple(r.name, r.pass, r.detail));
        return out;
    });
}
