#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "krein/airy.hpp"
#include "krein/cli.hpp"
#include "krein/dynamo.hpp"
#include "krein/errors.hpp"
#include "krein/herbst.hpp"
#include "krein/interp.hpp"
#include "krein/sweep.hpp"

namespace py = pybind11;
using namespace krein;

namespace {

std::string csv_string(const SweepResult& r, bool rescaled, bool mu, bool full_pairs) {
  std::ostringstream os;
  write_csv(os, r, CsvOptions{rescaled, mu, full_pairs});
  return os.str();
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"krein-spectra"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run_cli(int(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectra and exceptional points of PT-symmetric and alpha^2-dynamo operators";
  m.attr("__version__") = KREIN_VERSION;

  // Instances carry the error kind as .kind.
  static py::handle error_type = py::exception<SpectralError>(m, "SpectralError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SpectralError& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::enum_<SegmentLabel>(m, "SegmentLabel").value("Real", SegmentLabel::Real).value("ComplexPair", SegmentLabel::ComplexPair);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("parameter", &BranchPoint::parameter)
      .def_readonly("value", &BranchPoint::value)
      .def_readonly("label", &BranchPoint::label);
  py::class_<SpectralBranch>(m, "SpectralBranch")
      .def_readonly("parameter_name", &SpectralBranch::parameter_name)
      .def_readonly("branch_id", &SpectralBranch::branch_id)
      .def_readonly("partner_id", &SpectralBranch::partner_id)
      .def_readonly("points", &SpectralBranch::points)
      .def_readonly("diagnostic", &SpectralBranch::diagnostic);
  py::class_<ExceptionalPoint>(m, "ExceptionalPoint")
      .def_readonly("parameter", &ExceptionalPoint::parameter)
      .def_readonly("parameter2", &ExceptionalPoint::parameter2)
      .def_readonly("eigenvalue", &ExceptionalPoint::eigenvalue)
      .def_readonly("residual_f", &ExceptionalPoint::residual_f)
      .def_readonly("residual_df", &ExceptionalPoint::residual_df)
      .def_readonly("branches", &ExceptionalPoint::branches);
  py::class_<EpCheck>(m, "EpCheck")
      .def_readonly("residual_f", &EpCheck::residual_f)
      .def_readonly("residual_df", &EpCheck::residual_df)
      .def_readonly("ok", &EpCheck::ok);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("model", &SweepResult::model)
      .def_readonly("parameter_name", &SweepResult::parameter_name)
      .def_readonly("fixed_params", &SweepResult::fixed_params)
      .def_readonly("grid", &SweepResult::grid)
      .def_readonly("branches", &SweepResult::branches)
      .def_readonly("exceptional_points", &SweepResult::exceptional_points)
      .def_readonly("metadata", &SweepResult::metadata)
      .def_readonly("warnings", &SweepResult::warnings)
      .def("to_json", &to_json_string)
      .def_static("from_json", &from_json_string)
      .def("to_csv", &csv_string, py::arg("rescaled") = false, py::arg("mu") = false, py::arg("full_pairs") = true)
      .def("verify_exceptional_points", &verify_exceptional_points, py::arg("tol") = 1e-4)
      .def("__eq__", [](const SweepResult& a, const SweepResult& b) { return a == b; });
  py::class_<KreinDiagnostic>(m, "KreinDiagnostic")
      .def_readonly("value", &KreinDiagnostic::value)
      .def_readonly("norm", &KreinDiagnostic::norm)
      .def_readonly("neutrality", &KreinDiagnostic::neutrality)
      .def_readonly("warning", &KreinDiagnostic::warning);

  // Airy
  m.def("airy_ai", &airy_ai, py::arg("z"));
  m.def("airy_ai_prime", &airy_ai_prime, py::arg("z"));
  m.def("airy_zeros", &airy_zeros, py::arg("n"));

  // Interpolation model
  py::class_<InterpParams>(m, "InterpParams")
      .def(py::init([](double nu, double b, double g) { return InterpParams{nu, b, g}; }), py::arg("nu"), py::arg("b"),
           py::arg("g") = 1.0)
      .def_readwrite("nu", &InterpParams::nu)
      .def_readwrite("b", &InterpParams::b)
      .def_readwrite("g", &InterpParams::g);
  m.def("shooting_determinant", [](cplx mu, const InterpParams& p) { return shooting_determinant(mu, p); });
  m.def("eigenvalues", &eigenvalues, py::arg("params"), py::arg("count"), py::call_guard<py::gil_scoped_release>());
  m.def("supremum_bound_ks", &supremum_bound_ks, py::arg("b"), py::arg("nu"), py::arg("g") = 1.0);
  m.def("critical_level_kc", &critical_level_kc, py::arg("params"), py::call_guard<py::gil_scoped_release>());
  m.def("nu_sweep", &nu_sweep, py::arg("b"), py::arg("g"), py::arg("nu_grid"), py::arg("n_levels"),
        py::call_guard<py::gil_scoped_release>());
  m.def("interp_ep_in_b", &interp_ep_in_b, py::arg("nu"), py::arg("g"), py::arg("mu_guess"), py::arg("b_guess"),
        py::arg("tol") = 1e-4);
  m.def("interp_follow_to_coalescence", &interp_follow_to_coalescence, py::arg("g"), py::arg("mu_start"),
        py::arg("nu_start"), py::arg("b_start"), py::arg("b_step") = 0.02, py::arg("b_max") = 8.0);

  // Herbst box and Squire
  m.def("herbst_determinant", &herbst_determinant, py::arg("E"), py::arg("b"));
  m.def("herbst_spectrum", &herbst_spectrum, py::arg("b"), py::arg("count"), py::call_guard<py::gil_scoped_release>());
  m.def("crossing_estimate", [](int n) {
    const auto c = crossing_estimate(n);
    return py::make_tuple(c.b, c.E);
  });
  m.def("crossing_exact", [](int n) {
    const auto c = crossing_exact(n);
    return py::make_tuple(c.ep.parameter, c.ep.eigenvalue.real());
  });
  m.def("herbst_sweep", &herbst_sweep, py::arg("b_grid"), py::arg("n_levels"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "squire_spectrum",
      [](double epsilon, int count) {
        SquireParams p;
        p.epsilon = epsilon;
        std::vector<py::tuple> out;
        for (const auto& mode : squire_spectrum(p, count))
          out.push_back(py::make_tuple(mode.lambda, std::string(to_string(mode.y.segment)), mode.y.distance));
        return out;
      },
      py::arg("epsilon"), py::arg("count"));

  // Dynamo
  py::enum_<DynamoBC>(m, "DynamoBC").value("Idealized", DynamoBC::Idealized).value("Realistic", DynamoBC::Realistic);
  py::class_<AlphaProfile>(m, "AlphaProfile")
      .def(py::init([](std::vector<double> c, double s) { return AlphaProfile{std::move(c), s}; }),
           py::arg("coefficients"), py::arg("scale") = 1.0)
      .def_static("quartic", &AlphaProfile::quartic, py::arg("C") = 1.0)
      .def_static("constant", &AlphaProfile::constant, py::arg("alpha0"))
      .def_static("parse", &AlphaProfile::parse, py::arg("name"), py::arg("C") = 1.0)
      .def_readwrite("coefficients", &AlphaProfile::coefficients)
      .def_readwrite("scale", &AlphaProfile::scale);
  py::class_<DynamoParams>(m, "DynamoParams")
      .def(py::init([](int l, const AlphaProfile& profile, DynamoBC bc) { return DynamoParams{l, profile, bc}; }),
           py::arg("l"), py::arg("profile"), py::arg("bc") = DynamoBC::Idealized)
      .def_readwrite("l", &DynamoParams::l)
      .def_readwrite("profile", &DynamoParams::profile)
      .def_readwrite("bc", &DynamoParams::bc)
      .def_readwrite("r0", &DynamoParams::r0)
      .def_readwrite("rel_tol", &DynamoParams::rel_tol);
  m.def("alpha_eval", &alpha_eval, py::arg("r"), py::arg("profile"));
  m.def("dynamo_determinant", &dynamo_determinant, py::arg("lam"), py::arg("params"));
  m.def("dynamo_spectrum", &dynamo_spectrum, py::arg("params"), py::arg("count"),
        py::call_guard<py::gil_scoped_release>());
  m.def("constant_alpha_oracle", &constant_alpha_oracle, py::arg("alpha0"), py::arg("l"), py::arg("n"));
  m.def("c_sweep", &c_sweep, py::arg("params"), py::arg("c_grid"), py::arg("n_levels"),
        py::call_guard<py::gil_scoped_release>());
  m.def("dynamo_neutrality", &dynamo_neutrality, py::arg("params"), py::arg("lam"), py::arg("n_samples") = 4001);

  m.def("run_cli", &cli, py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
}
