// Python bindings for the main operations: distance, inverse maps, special
// functions and the kernel quadratures.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccn32/distance.hpp"
#include "ccn32/heatkernel.hpp"
#include "ccn32/maps.hpp"
#include "ccn32/oracle.hpp"
#include "ccn32/specfun.hpp"

namespace py = pybind11;
using namespace ccn32;

namespace {

GroupPoint make_point(const std::array<double, 3>& x,
                      const std::array<double, 3>& t) {
  return GroupPoint{x, t};
}

}  // namespace

PYBIND11_MODULE(_ccn32, m) {
  m.doc() = "exact sub-Riemannian distance and heat kernel on the free "
            "step-two group with three generators";

  py::register_exception<NumericsError>(m, "NumericsError");

  // distance layer
  py::enum_<DistanceCase>(m, "DistanceCase")
      .value("Origin", DistanceCase::Origin)
      .value("VerticalAxis", DistanceCase::VerticalAxis)
      .value("AbnormalAxis", DistanceCase::AbnormalAxis)
      .value("CutVertical", DistanceCase::CutVertical)
      .value("CutHorizontalT", DistanceCase::CutHorizontalT)
      .value("BoundaryParabola", DistanceCase::BoundaryParabola)
      .value("Generic", DistanceCase::Generic);

  py::class_<maps::ThetaData>(m, "ThetaData")
      .def_readonly("theta1", &maps::ThetaData::theta1)
      .def_readonly("theta2", &maps::ThetaData::theta2)
      .def_readonly("r", &maps::ThetaData::r)
      .def_readonly("epsilon", &maps::ThetaData::epsilon)
      .def_readonly("wbar", &maps::ThetaData::wbar);

  py::class_<DistanceResult>(m, "DistanceResult")
      .def_readonly("d2", &DistanceResult::d2)
      .def_readonly("case_tag", &DistanceResult::case_tag)
      .def_readonly("theta", &DistanceResult::theta)
      .def_readonly("chain", &DistanceResult::chain)
      .def_readonly("chain_valid", &DistanceResult::chain_valid)
      .def_readonly("u1", &DistanceResult::u1)
      .def_readonly("u2", &DistanceResult::u2);

  py::class_<RegimeParams>(m, "RegimeParams")
      .def_readonly("m", &RegimeParams::m)
      .def_readonly("L1", &RegimeParams::L1)
      .def_readonly("L2", &RegimeParams::L2)
      .def_readonly("epsilon", &RegimeParams::epsilon)
      .def_readonly("wbar", &RegimeParams::wbar)
      .def_readonly("d2", &RegimeParams::d2)
      .def_readonly("xnorm", &RegimeParams::xnorm);

  m.def(
      "cc_distance_squared",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return cc_distance_squared(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));
  m.def(
      "cc_distance_squared_between",
      [](const std::array<double, 3>& xa, const std::array<double, 3>& ta,
         const std::array<double, 3>& xb, const std::array<double, 3>& tb) {
        return cc_distance_squared_between(make_point(xa, ta),
                                           make_point(xb, tb));
      },
      py::arg("xa"), py::arg("ta"), py::arg("xb"), py::arg("tb"));
  m.def(
      "intrinsic_D_squared",
      [](double Xn, double Tn) { return intrinsic_D_squared(Xn, Tn).D2; },
      py::arg("Xnorm"), py::arg("Tnorm"));
  m.def(
      "regime_params",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return regime_params(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));

  // maps layer
  m.def("z_map", &maps::z_map, py::arg("rho"));
  m.def("phi_map", &maps::phi_map, py::arg("rho"));
  m.def("lambda_forward", &maps::lambda_forward, py::arg("v1"), py::arg("v2"));
  m.def(
      "lambda_inverse",
      [](double u1, double u2) {
        return maps::lambda_inverse(maps::classify_region(u1, u2));
      },
      py::arg("u1"), py::arg("u2"));
  m.def("solve_cut_equation", &maps::solve_cut_equation, py::arg("beta"));
  m.def("mu", &specfun::mu, py::arg("rho"));
  m.def("mu_inverse", &specfun::mu_inverse, py::arg("gamma"));

  // special functions
  m.def("theta_root", &specfun::theta_root, py::arg("k"));
  m.def("psi", [](double r) { return specfun::psi_family(r).psi; },
        py::arg("r"));
  m.def("upsilon", [](double r) { return specfun::upsilon_family(r).ups; },
        py::arg("r"));
  m.def("bessel_i0", &specfun::bessel_i0, py::arg("r"));
  m.def("q_factor", &specfun::q_factor, py::arg("r"));

  // kernel layer
  m.def(
      "p_fourier",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        auto r = heatkernel::p_fourier(make_point(x, t));
        return py::make_tuple(r.value, r.est_error);
      },
      py::arg("x"), py::arg("t"));
  m.def(
      "p_laplace",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        auto r = heatkernel::p_laplace(make_point(x, t));
        return py::make_tuple(r.value, r.est_error);
      },
      py::arg("x"), py::arg("t"));
  m.def(
      "heat_kernel_time",
      [](double h, const std::array<double, 3>& x,
         const std::array<double, 3>& t) {
        return heatkernel::heat_kernel_time(h, make_point(x, t));
      },
      py::arg("h"), py::arg("x"), py::arg("t"));
  m.def(
      "log_heat_kernel_time",
      [](double h, const std::array<double, 3>& x,
         const std::array<double, 3>& t) {
        return heatkernel::log_heat_kernel_time(h, make_point(x, t));
      },
      py::arg("h"), py::arg("x"), py::arg("t"));
  m.def("P_kernel",
        [](double Xn, double Tn) { return heatkernel::P_kernel(Xn, Tn).value; },
        py::arg("Xnorm"), py::arg("Tnorm"));
  m.def("F_abnormal",
        [](double v1, double v2) { return heatkernel::F_abnormal(v1, v2); },
        py::arg("v1"), py::arg("v2"));
  m.def(
      "bnd",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return heatkernel::bnd(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));
  m.def(
      "bound_ratio",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return heatkernel::bound_ratio(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));
  m.def(
      "grad_log_p",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return heatkernel::grad_log_p(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));

  // oracle
  m.def(
      "oracle_distance_squared",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t,
         int segments, int restarts, unsigned long long seed) {
        oracle::PathProblem pb;
        pb.target = make_point(x, t);
        pb.segments = segments;
        pb.restarts = restarts;
        pb.seed = seed;
        auto r = oracle::oracle_distance_squared(pb);
        return py::make_tuple(r.d2_upper, r.constraint_resid);
      },
      py::arg("x"), py::arg("t"), py::arg("segments") = 64,
      py::arg("restarts") = 8, py::arg("seed") = 0);
  m.def(
      "reference_p",
      [](const std::array<double, 3>& x, const std::array<double, 3>& t) {
        return oracle::reference_p(make_point(x, t));
      },
      py::arg("x"), py::arg("t"));
}
