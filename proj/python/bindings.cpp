#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cimpcc/race_harness.hpp"
#include "cimpcc/run_config.hpp"
#include "cimpcc/track_fixtures.hpp"

namespace py = pybind11;
using namespace cimpcc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvature-integrated MPCC racing planner";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<Centerline>(m, "Centerline")
      .def_property_readonly("total_length", &Centerline::total_length)
      .def_property_readonly("arc_lengths", &Centerline::arc_lengths)
      .def_property_readonly("xy",
                             [](const Centerline& c) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& p : c.points()) out.emplace_back(p.x, p.y);
                               return out;
                             })
      .def("__len__", &Centerline::size)
      .def("to_csv", [](const Centerline& c) { return to_csv(c); });

  m.def(
      "load_centerline",
      [](const std::filesystem::path& path, std::optional<double> spacing) {
        return load_centerline_file(path, LoadOptions{spacing});
      },
      py::arg("path"), py::arg("resample_spacing") = py::none());
  m.def(
      "parse_centerline",
      [](const std::string& content) { return load_centerline(content); }, py::arg("content"));
  m.def("stadium_chicane", &fixtures::stadium_chicane, py::arg("spacing") = 0.1);
  m.def("circle", &fixtures::circle, py::arg("radius"), py::arg("n"), py::arg("half_width") = 0.5);

  py::class_<CurvatureProfile>(m, "CurvatureProfile")
      .def_readonly("raw", &CurvatureProfile::raw)
      .def_readonly("smoothed", &CurvatureProfile::smoothed)
      .def_readonly("normalized", &CurvatureProfile::normalized)
      .def_readonly("k_min", &CurvatureProfile::k_min)
      .def_readonly("k_max", &CurvatureProfile::k_max);
  m.def("curvature_profile", &make_curvature_profile, py::arg("centerline"),
        py::arg("window") = kDefaultMafWindow);

  m.def(
      "map_nsc_to_beta",
      [](double nsc, double alpha) { return map_nsc_to_beta(nsc, MappingParams{alpha}); },
      py::arg("nsc"), py::arg("alpha") = 3.0);

  m.def(
      "rk4_step",
      [](std::array<double, 4> x, std::array<double, 3> u, double dt, double wheelbase) {
        const auto n = rk4_step({x[0], x[1], x[2], x[3]}, {u[0], u[1], u[2]},
                                VehicleParams{wheelbase}, dt);
        return std::array<double, 4>{n.x, n.y, n.heading, n.progress};
      },
      py::arg("state"), py::arg("input"), py::arg("dt"), py::arg("wheelbase") = 0.324);

  py::class_<Track>(m, "Track")
      .def(py::init([](const Centerline& c, int window) { return Track::build(c, window); }),
           py::arg("centerline"), py::arg("window") = kDefaultMafWindow)
      .def_readonly("centerline", &Track::centerline)
      .def_readonly("curvature", &Track::curvature);

  py::class_<LapStats>(m, "LapStats")
      .def_readonly("lap_times", &LapStats::lap_times)
      .def_readonly("velocities", &LapStats::velocities)
      .def_property_readonly("mean_lap_time", [](const LapStats& s) { return s.lap_time.mean; })
      .def_property_readonly("mean_velocity", [](const LapStats& s) { return s.velocity.mean; });

  py::class_<RaceResult>(m, "RaceResult")
      .def_readonly("stats", &RaceResult::stats)
      .def_readonly("aborted", &RaceResult::aborted)
      .def_readonly("abort_reason", &RaceResult::abort_reason)
      .def_property_readonly("cycles", [](const RaceResult& r) { return r.records.size(); })
      .def("telemetry_csv", [](const RaceResult& r) { return telemetry_csv(r.records); })
      .def("stats_json", [](const RaceResult& r) { return stats_json(r); });

  py::class_<RunConfig>(m, "RunConfig")
      .def_property_readonly("track_path", [](const RunConfig& c) { return c.track_path; })
      .def_property_readonly("mode", [](const RunConfig& c) { return std::string(to_string(c.mode)); })
      .def_property(
          "n_laps", [](const RunConfig& c) { return c.race.n_laps; },
          [](RunConfig& c, int n) { c.race.n_laps = n; })
      .def("to_json", [](const RunConfig& c) { return to_json(c); });
  m.def(
      "parse_run_config",
      [](const std::string& text, const std::filesystem::path& base) {
        return parse_run_config(text, base);
      },
      py::arg("text") = "{}", py::arg("base_dir") = std::filesystem::path{});
  m.def("load_track", &load_track, py::arg("config"));

  m.def(
      "run_race",
      [](const Track& track, const std::string& mode, const RunConfig& cfg) {
        if (mode != "mpcc" && mode != "cimpcc") throw ConfigurationError("mode: mpcc or cimpcc");
        py::gil_scoped_release release;
        return run_race(track, mode == "mpcc" ? PlannerMode::kMpcc : PlannerMode::kCiMpcc,
                        cfg.race);
      },
      py::arg("track"), py::arg("mode"), py::arg("config"));
  m.def(
      "compare",
      [](const Track& track, const RunConfig& cfg) {
        py::gil_scoped_release release;
        return comparison_json(compare(track, cfg.race, cfg.self_compare).report);
      },
      py::arg("track"), py::arg("config"),
      "Races MPCC against CiMPCC and returns the comparison JSON.");
}
