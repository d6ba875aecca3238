#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hca/errors.hpp"
#include "hca/experiment.hpp"
#include "hca/resolve_inner.hpp"
#include "hca/scenario.hpp"

namespace py = pybind11;
using namespace hca;

namespace {

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["strategy"] = std::string(to_string(m.strategy));
    d["sensing"] = std::string(to_string(m.sensing));
    d["seed"] = m.seed;
    d["cycles"] = m.cycles;
    d["failures"] = m.failures;
    d["failures_per_uav"] = m.failures_per_uav;
    d["distance_flown"] = m.distance_flown;
    d["distance_per_uav"] = m.distance_per_uav;
    d["avg_collision_free_distance"] = m.avg_collision_free_distance;
    d["min_separation"] = m.min_separation;
    d["layer_cycles"] = py::dict(py::arg("nominal") = m.layer_cycles.nominal, py::arg("outer") = m.layer_cycles.outer,
                                 py::arg("middle") = m.layer_cycles.middle, py::arg("inner") = m.layer_cycles.inner);
    d["detours_planned"] = m.detours_planned;
    return d;
}

}  // namespace

PYBIND11_MODULE(_hca, m) {
    m.doc() = "Hierarchical multi-UAV collision avoidance simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<InvalidCommand>(m, "InvalidCommand", PyExc_ValueError);

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__repr__", [](const Vec2& v) { return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")"; });

    py::class_<UavState>(m, "UavState")
        .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("phi") = 0.0)
        .def_readwrite("x", &UavState::x)
        .def_readwrite("y", &UavState::y)
        .def_readwrite("phi", &UavState::phi)
        .def("__repr__", [](const UavState& s) {
            std::ostringstream out;
            out << "UavState(" << s.x << ", " << s.y << ", " << s.phi << ")";
            return out.str();
        });

    py::class_<VehicleParams>(m, "VehicleParams")
        .def(py::init<>())
        .def_readwrite("speed", &VehicleParams::speed)
        .def_readwrite("omega_max", &VehicleParams::omega_max)
        .def_readwrite("period", &VehicleParams::period);

    py::class_<RegionConfig>(m, "RegionConfig")
        .def(py::init<>())
        .def_readwrite("safe_radius", &RegionConfig::safe_radius)
        .def_readwrite("inner_radius", &RegionConfig::inner_radius)
        .def_readwrite("middle_radius", &RegionConfig::middle_radius)
        .def_readwrite("outer_radius", &RegionConfig::outer_radius)
        .def_readwrite("warning_time", &RegionConfig::warning_time);

    py::enum_<Region>(m, "Region")
        .value("collision", Region::collision)
        .value("inner", Region::inner)
        .value("middle", Region::middle)
        .value("outer", Region::outer)
        .value("clear", Region::clear);

    m.def("step", [](const UavState& s, double omega, const VehicleParams& p) { return step_rk2(s, {omega}, p); },
          py::arg("state"), py::arg("omega"), py::arg("params") = VehicleParams{},
          "One midpoint RK2 step of the unicycle model.");
    m.def("rollout", [](const UavState& s, const std::vector<double>& u, const VehicleParams& p) { return rollout(s, u, p); },
          py::arg("state"), py::arg("inputs"), py::arg("params") = VehicleParams{});
    m.def("saturate", [](double w, const VehicleParams& p) { return saturate(w, p).omega; }, py::arg("omega"),
          py::arg("params") = VehicleParams{});
    m.def("classify_region", &classify_region, py::arg("separation"), py::arg("regions") = RegionConfig{});
    m.def(
        "reactive_input",
        [](const Vec2& v_ij, const Vec2& p_ij, int rho, double k_psi, const VehicleParams& p) {
            ReactiveConfig cfg;
            cfg.k_psi = k_psi;
            return reactive_input(v_ij, p_ij, rho, cfg, p).omega;
        },
        py::arg("relative_velocity"), py::arg("relative_position"), py::arg("rho") = 1, py::arg("k_psi") = 1.0,
        py::arg("params") = VehicleParams{});
    m.def("avg_collision_free_distance", &avg_collision_free_distance, py::arg("distance"), py::arg("failures"));
    m.def("count_failures", [](const std::vector<double>& trace, double r) { return count_failures(trace, r); },
          py::arg("trace"), py::arg("safe_radius") = 30.0);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("cycles", &Scenario::cycles)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("vehicle", &Scenario::vehicle)
        .def_readwrite("regions", &Scenario::regions)
        .def_property(
            "strategy", [](const Scenario& s) { return std::string(to_string(s.strategy)); },
            [](Scenario& s, const std::string& v) { s.strategy = parse_strategy(v); })
        .def_property(
            "sensing", [](const Scenario& s) { return std::string(to_string(s.sensing.mode)); },
            [](Scenario& s, const std::string& v) { s.sensing.mode = parse_sensing_mode(v); })
        .def_property_readonly("uav_count", &Scenario::uav_count);

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); }, py::arg("yaml"));

    m.def(
        "run",
        [](const Scenario& sc) {
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(sc);
            }
            py::dict out;
            out["metrics"] = metrics_dict(r.metrics);
            py::list tracks;
            for (const auto& t : r.tracks) {
                py::list pts;
                for (const Vec2& p : t) pts.append(py::make_tuple(p.x, p.y));
                tracks.append(pts);
            }
            out["tracks"] = tracks;
            std::ostringstream csv;
            write_trajectory_csv(csv, r.log);
            out["trajectory_csv"] = csv.str();
            return out;
        },
        py::arg("scenario"), "Runs the closed-loop simulation; returns metrics, tracks and the trajectory CSV.");

    m.def(
        "compare",
        [](const Scenario& sc, const std::vector<std::uint64_t>& seeds, int jobs) {
            std::vector<CompareTable> tables;
            {
                py::gil_scoped_release release;
                tables = compare(sc, seeds, jobs);
            }
            return summary_json(tables);
        },
        py::arg("scenario"), py::arg("seeds"), py::arg("jobs") = 1,
        "Both strategies under both sensing modes; returns the summary as JSON text.");
}
