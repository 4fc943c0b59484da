#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "laval/config.h"
#include "laval/errors.h"
#include "laval/gas_model.h"
#include "laval/io.h"
#include "laval/pipeline.h"

namespace py = pybind11;

namespace {

py::array_t<double> as_array(const laval::Field2D& f) {
  py::array_t<double> a({f.n0(), f.n1()});
  std::copy(f.data().begin(), f.data().end(), a.mutable_data());
  return a;
}

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

laval::RunConfig config_from(const std::string& text) { return laval::parse_config(text, "<python>"); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transonic de Laval nozzle flow in the potential-stream plane.";

  py::register_exception<laval::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<laval::AdmissibilityError>(m, "AdmissibilityError", PyExc_ValueError);
  py::register_exception<laval::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<laval::DomainError>(m, "DomainError", PyExc_ArithmeticError);

  py::enum_<laval::Branch>(m, "Branch")
      .value("subsonic", laval::Branch::subsonic)
      .value("supersonic", laval::Branch::supersonic);

  py::class_<laval::GasModel>(m, "GasModel")
      .def(py::init<double>(), py::arg("gamma") = 1.4)
      .def_property_readonly("gamma", &laval::GasModel::gamma)
      .def_property_readonly("c_star", &laval::GasModel::c_star)
      .def_property_readonly("q_max", &laval::GasModel::q_max)
      .def("density", &laval::GasModel::density, py::arg("q_squared"))
      .def("mach", &laval::GasModel::mach)
      .def("A", &laval::GasModel::A)
      .def("dA", &laval::GasModel::dA)
      .def("B", &laval::GasModel::B)
      .def("dB", &laval::GasModel::dB)
      .def("H", &laval::GasModel::H)
      .def("A_inv", &laval::GasModel::A_inv, py::arg("s"), py::arg("branch"))
      .def("B_inv", &laval::GasModel::B_inv);

  m.def(
      "parse_config", [](const std::string& text) { return to_python(laval::config_to_json(config_from(text))); },
      py::arg("text"), "Validated configuration as a dict (defaults filled in).");

  m.def(
      "run",
      [](const std::string& text, const std::string& directory, bool dump) {
        return to_python(laval::run_pipeline(config_from(text), directory, dump));
      },
      py::arg("config"), py::arg("directory"), py::arg("dump") = false,
      "Runs the configured pipeline, writing artifacts into `directory`; returns the report.");

  m.def(
      "solve_subsonic",
      [](const std::string& text) {
        const laval::RunConfig cfg = config_from(text);
        const laval::GasModel gas(cfg.gamma);
        laval::SubsonicField f =
            laval::subsonic_fixed_point(laval::make_spec(cfg), gas, cfg.subsonic, laval::subsonic_seed_speed(cfg, gas));
        py::dict d;
        d["phi"] = as_array(f.phi);
        d["psi"] = as_array(f.psi);
        d["q"] = as_array(f.q);
        d["m"] = f.m;
        d["m_in"] = f.m_in;
        d["outer_iterations"] = f.outer_iterations;
        return d;
      },
      py::arg("config"));

  m.def(
      "solve_supersonic",
      [](const std::string& text) {
        const laval::RunConfig cfg = config_from(text);
        const laval::GasModel gas(cfg.gamma);
        laval::SupersonicField f = laval::supersonic_fixed_point(laval::make_spec(cfg), gas, cfg.supersonic);
        py::dict d;
        d["phi"] = as_array(f.phi);
        d["psi"] = as_array(f.psi);
        d["Q"] = as_array(f.Q);
        d["W"] = as_array(f.W);
        d["Z"] = as_array(f.Z);
        d["h"] = as_array(f.h);
        d["eps_cut"] = f.eps_cut;
        d["outer_iterations"] = f.outer_iterations;
        return d;
      },
      py::arg("config"));

  m.def(
      "analyze",
      [](const std::vector<double>& phi, const std::vector<double>& psi, py::array_t<double, py::array::c_style> q,
         double gamma) {
        if (q.ndim() != 2 || q.shape(0) != static_cast<py::ssize_t>(phi.size()) ||
            q.shape(1) != static_cast<py::ssize_t>(psi.size())) {
          throw std::invalid_argument("q must have shape (len(phi), len(psi))");
        }
        laval::PotentialField field;
        field.phi = phi;
        field.psi = psi;
        field.q = laval::Field2D(static_cast<int>(phi.size()), static_cast<int>(psi.size()));
        std::copy(q.data(), q.data() + q.size(), field.q.data().begin());
        return to_python(laval::analyze_field(field, laval::GasModel(gamma)));
      },
      py::arg("phi"), py::arg("psi"), py::arg("q"), py::arg("gamma") = 1.4,
      "Sonic-line classification of a potential-plane speed field.");
}
