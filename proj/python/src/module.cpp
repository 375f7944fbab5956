#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracneu/asymptotics.hpp"
#include "fracneu/eigensolve.hpp"
#include "fracneu/error.hpp"
#include "fracneu/gagliardo.hpp"
#include "fracneu/geometry.hpp"
#include "fracneu/holder_infinity.hpp"

namespace py = pybind11;
using namespace fracneu;
using Vec = std::vector<double>;

PYBIND11_MODULE(_fracneu, m) {
  m.doc() = "First non-zero Neumann eigenvalue of the regional fractional p-Laplacian";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidDomain>(m, "InvalidDomain", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DegenerateFunction>(m, "DegenerateFunction", base.ptr());
  py::register_exception<ConnectivityError>(m, "ConnectivityError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::enum_<MetricKind>(m, "MetricKind")
      .value("Euclidean", MetricKind::Euclidean)
      .value("Geodesic", MetricKind::Geodesic);

  py::class_<Domain>(m, "Domain")
      .def_property_readonly("dim", &Domain::dim)
      .def_property_readonly("size", &Domain::size)
      .def("__len__", &Domain::size)
      .def_property_readonly("nodes", [](const Domain& d) {
        std::vector<std::vector<double>> out;
        for (const auto& x : d.nodes()) {
          out.push_back(d.dim() == 1 ? std::vector<double>{x[0]} : std::vector<double>{x[0], x[1]});
        }
        return out;
      })
      .def_property_readonly("weights", &Domain::weights)
      .def_property_readonly("measure", &Domain::measure)
      .def_property_readonly("diam_euclid", &Domain::diam_euclid)
      .def_property_readonly("metric", &Domain::metric_kind)
      .def("distance", &Domain::distance, py::arg("i"), py::arg("j"));

  m.def("build_interval", &build_interval, py::arg("a"), py::arg("b"), py::arg("n"));
  m.def("build_rectangle", &build_rectangle, py::arg("ax"), py::arg("bx"), py::arg("ay"),
        py::arg("by"), py::arg("nx"), py::arg("ny"));
  m.def("build_lshape", &build_lshape, py::arg("side"), py::arg("n_per_side"));
  m.def("geodesic_distances", &geodesic_distances, py::arg("domain"), py::arg("k"));
  m.def(
      "diameter",
      [](const Domain& d, bool node_cloud) {
        return diameter(d, node_cloud ? DiameterMode::NodeCloud : DiameterMode::Analytic);
      },
      py::arg("domain"), py::arg("node_cloud") = false);
  m.def("lp_norm", [](const Domain& d, const Vec& u, double p) { return lp_norm(d, u, p); },
        py::arg("domain"), py::arg("u"), py::arg("p"));

  m.def(
      "seminorm_p",
      [](const Domain& d, const Vec& u, double s, double p) { return seminorm_p(d, u, s, p); },
      py::arg("domain"), py::arg("u"), py::arg("s"), py::arg("p"));
  m.def(
      "energy_form",
      [](const Domain& d, const Vec& u, const Vec& phi, double s, double p) {
        return energy_form(d, u, phi, s, p);
      },
      py::arg("domain"), py::arg("u"), py::arg("phi"), py::arg("s"), py::arg("p"));
  m.def(
      "rayleigh_quotient",
      [](const Domain& d, const Vec& u, double s, double p) {
        return rayleigh_quotient(d, std::span<const double>(u), s, p);
      },
      py::arg("domain"), py::arg("u"), py::arg("s"), py::arg("p"));
  m.def("bbm_constant", &bbm_constant, py::arg("n"), py::arg("p"));

  py::class_<EigenPair>(m, "EigenPair")
      .def_readonly("lambda_", &EigenPair::lambda)
      .def_readonly("u", &EigenPair::u)
      .def_readonly("s", &EigenPair::s)
      .def_readonly("p", &EigenPair::p)
      .def_readonly("constraint_residual", &EigenPair::constraint_residual)
      .def_readonly("stationarity", &EigenPair::stationarity)
      .def_readonly("iterations", &EigenPair::iterations)
      .def_readonly("converged", &EigenPair::converged)
      .def_property_readonly("viscosity_regime", &EigenPair::viscosity_regime)
      .def("__repr__", [](const EigenPair& e) {
        return "EigenPair(lambda=" + std::to_string(e.lambda) + ", s=" + std::to_string(e.s) +
               ", p=" + std::to_string(e.p) + ")";
      });

  m.def(
      "solve",
      [](const Domain& d, double s, double p, double tol, std::size_t max_iter,
         std::optional<GridFunction> seed) {
        const FracParams params{s, p, tol, max_iter};
        py::gil_scoped_release release;
        if (seed) return solve_general(d, params, std::move(seed));
        return solve(d, params);
      },
      py::arg("domain"), py::arg("s"), py::arg("p"), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 50000, py::arg("seed") = py::none(),
      "Dense eigensolver at p = 2, projected Newton/quasi-Newton descent otherwise.");
  m.def("solve_p2", &solve_p2, py::arg("domain"), py::arg("s"));
  m.def(
      "project_constraint",
      [](const Domain& d, const GridFunction& v, double p) {
        auto r = project_constraint(d, v, p);
        return py::make_tuple(r.values, r.shift);
      },
      py::arg("domain"), py::arg("v"), py::arg("p"));
  m.def(
      "constraint_residual",
      [](const Domain& d, const Vec& u, double p) { return constraint_residual(d, u, p); },
      py::arg("domain"), py::arg("u"), py::arg("p"));
  m.def(
      "weak_residual",
      [](const Domain& d, const EigenPair& e) { return weak_residual(d, e); },
      py::arg("domain"), py::arg("pair"));

  m.def(
      "lplus", [](const Domain& d, const Vec& u, double s, std::size_t i) { return lplus(d, u, s, i); },
      py::arg("domain"), py::arg("u"), py::arg("s"), py::arg("i"));
  m.def(
      "lminus", [](const Domain& d, const Vec& u, double s, std::size_t i) { return lminus(d, u, s, i); },
      py::arg("domain"), py::arg("u"), py::arg("s"), py::arg("i"));
  m.def(
      "linf", [](const Domain& d, const Vec& u, double s, std::size_t i) { return linf(d, u, s, i); },
      py::arg("domain"), py::arg("u"), py::arg("s"), py::arg("i"));
  m.def(
      "seminorm_inf", [](const Domain& d, const Vec& u, double s) { return seminorm_inf(d, u, s); },
      py::arg("domain"), py::arg("u"), py::arg("s"));
  m.def("lambda_inf", &lambda_inf, py::arg("domain"), py::arg("s"));
  m.def(
      "check_variational_inf",
      [](const Domain& d, const GridFunction& u, double s) {
        const auto r = check_variational_inf(d, u, s);
        return py::make_tuple(r.quotient, r.admissible);
      },
      py::arg("domain"), py::arg("u"), py::arg("s"));

  py::class_<ViscosityReport>(m, "ViscosityReport")
      .def_readonly("max_residual", &ViscosityReport::max_residual)
      .def_readonly("fraction_within_tol", &ViscosityReport::fraction_within_tol)
      .def_readonly("lambda_", &ViscosityReport::lambda)
      .def_readonly("dead_band", &ViscosityReport::dead_band)
      .def_readonly("tolerance", &ViscosityReport::tolerance)
      .def_property_readonly("classes", [](const ViscosityReport& r) {
        std::vector<std::string> out;
        for (const auto& n : r.per_node) out.emplace_back(to_string(n.sign));
        return out;
      })
      .def_property_readonly("residuals", [](const ViscosityReport& r) {
        std::vector<double> out;
        for (const auto& n : r.per_node) out.push_back(n.residual);
        return out;
      });
  m.def(
      "viscosity_residual",
      [](const Domain& d, const Vec& u, double s, double lambda, double band, double tol) {
        return viscosity_residual(d, u, s, lambda, band, tol);
      },
      py::arg("domain"), py::arg("u"),
        py::arg("s"), py::arg("lambda_"), py::arg("dead_band_rel") = 1e-3,
        py::arg("tol_rel") = 0.1);

  py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("param", &SweepRecord::param)
      .def_readonly("lambda_", &SweepRecord::lambda)
      .def_readonly("scaled", &SweepRecord::scaled)
      .def_readonly("log_lambda", &SweepRecord::log_lambda)
      .def_readonly("grid_n", &SweepRecord::grid_n)
      .def_readonly("reference", &SweepRecord::reference)
      .def_readonly("rel_error", &SweepRecord::rel_error)
      .def_readonly("upper_bound", &SweepRecord::upper_bound);
  py::class_<FitDiagnostics>(m, "FitDiagnostics")
      .def_readonly("slope", &FitDiagnostics::slope)
      .def_readonly("intercept", &FitDiagnostics::intercept)
      .def_readonly("residual", &FitDiagnostics::residual)
      .def_readonly("convex_or_linear", &FitDiagnostics::convex_or_linear);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("records", &SweepResult::records)
      .def_readonly("extrapolated", &SweepResult::extrapolated)
      .def_readonly("reference", &SweepResult::reference)
      .def_readonly("rel_error", &SweepResult::rel_error)
      .def_readonly("order_estimate", &SweepResult::order_estimate)
      .def_readonly("fit", &SweepResult::fit)
      .def_property_readonly("failed_params", [](const SweepResult& r) {
        std::vector<double> out;
        for (const auto& g : r.gaps) out.push_back(g.param);
        return out;
      });

  m.def(
      "sweep_s",
      [](const Domain& d, double p, const std::vector<double>& grid,
         std::optional<double> reference) {
        SweepOptions opts;
        opts.reference = reference;
        py::gil_scoped_release release;
        return sweep_s(d, p, grid, opts);
      },
      py::arg("domain"), py::arg("p"), py::arg("s_grid"), py::arg("reference") = py::none());
  m.def(
      "sweep_p",
      [](const Domain& d, double s, const std::vector<double>& grid) {
        py::gil_scoped_release release;
        return sweep_p(d, s, grid);
      },
      py::arg("domain"), py::arg("s"), py::arg("p_grid"));
  m.def(
      "check_desig",
      [](const Domain& d, const GridFunction& u, double p,
         const std::vector<std::pair<double, double>>& pairs) {
        return check_desig(d, u, p, pairs).violations;
      },
      py::arg("domain"), py::arg("u"), py::arg("p"), py::arg("pairs"),
      "Number of (t, s) pairs violating the interpolation inequality.");
  m.def(
      "check_cone_bound",
      [](const Domain& d, double s, double p, const std::vector<std::size_t>& nodes) {
        const auto r = check_cone_bound(d, s, p, nodes);
        py::list out;
        for (const auto& e : r.entries) {
          out.append(py::dict(py::arg("node") = e.node, py::arg("seminorm") = e.seminorm,
                              py::arg("bound") = e.bound, py::arg("holds") = e.holds,
                              py::arg("rayleigh") = e.rayleigh));
        }
        return out;
      },
      py::arg("domain"), py::arg("s"), py::arg("p"), py::arg("x0_nodes"));
}
