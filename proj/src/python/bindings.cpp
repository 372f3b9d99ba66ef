#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "toda/backlund.hpp"
#include "toda/continuous.hpp"
#include "toda/harness.hpp"
#include "toda/lattice.hpp"
#include "toda/zero_curvature.hpp"

namespace py = pybind11;
using namespace toda;

PYBIND11_MODULE(_core, m) {
    m.doc() = "multi-time variational structure of the Toda lattice: commuting flows, "
              "Backlund maps, closure and spectrality invariants, zero-curvature matrices";

    py::register_exception<BacklundError>(m, "BacklundError");

    py::enum_<Boundary>(m, "Boundary")
        .value("OpenEnd", Boundary::OpenEnd)
        .value("Periodic", Boundary::Periodic);

    py::class_<TodaConfig>(m, "TodaConfig")
        .def(py::init([](int n, Boundary boundary, double tol_newton, int max_newton_iters) {
                 TodaConfig cfg{n, boundary, tol_newton, max_newton_iters};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("n"), py::arg("boundary") = Boundary::OpenEnd,
             py::arg("tol_newton") = 1e-12, py::arg("max_newton_iters") = 50)
        .def_readwrite("n", &TodaConfig::n)
        .def_readwrite("boundary", &TodaConfig::boundary)
        .def_readwrite("tol_newton", &TodaConfig::tol_newton)
        .def_readwrite("max_newton_iters", &TodaConfig::max_newton_iters);

    py::class_<LatticeState>(m, "LatticeState")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("x"), py::arg("p"))
        .def_readwrite("x", &LatticeState::x)
        .def_readwrite("p", &LatticeState::p)
        .def("__len__", &LatticeState::n);

    py::class_<Jet2>(m, "Jet2")
        .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>>(),
             py::arg("x"), py::arg("v1"), py::arg("v2"))
        .def_readwrite("x", &Jet2::x)
        .def_readwrite("v1", &Jet2::v1)
        .def_readwrite("v2", &Jet2::v2);

    py::class_<BtParam>(m, "BtParam")
        .def(py::init<double>(), py::arg("lam"))
        .def_readonly("lam", &BtParam::lambda);

    py::class_<Matrix2>(m, "Matrix2")
        .def_readonly("a11", &Matrix2::a11)
        .def_readonly("a12", &Matrix2::a12)
        .def_readonly("a21", &Matrix2::a21)
        .def_readonly("a22", &Matrix2::a22)
        .def("det", &Matrix2::det)
        .def("trace", &Matrix2::trace)
        .def("__mul__", [](const Matrix2& a, const Matrix2& b) { return a * b; });

    py::class_<BtStepResult>(m, "BtStepResult")
        .def_readonly("next", &BtStepResult::next)
        .def_readonly("branch_note", &BtStepResult::branch_note);

    // lattice-core
    m.def("gap_exp",
          [](const std::vector<double>& x, int k, const TodaConfig& cfg) {
              return gap_exp(x, k, cfg);
          },
          py::arg("x"), py::arg("k"), py::arg("cfg"));
    m.def("validate_state", &validate_state, py::arg("state"), py::arg("cfg"));

    // continuous multi-time
    m.def("toda_H1", &toda_H1, py::arg("state"), py::arg("cfg"));
    m.def("toda_H2", &toda_H2, py::arg("state"), py::arg("cfg"));
    m.def("toda_L1", &toda_L1, py::arg("jet"), py::arg("cfg"));
    m.def("toda_L2", &toda_L2, py::arg("jet"), py::arg("cfg"));
    m.def("el_algebraic_residuals",
          [](const Jet2& j, const TodaConfig& cfg) {
              const ElResiduals r = el_algebraic_residuals(j, cfg);
              return std::make_pair(r.offdiag, r.diag);
          },
          py::arg("jet"), py::arg("cfg"));
    m.def("hamiltonian_vector_field",
          [](const TodaConfig& cfg, int alpha, const LatticeState& s) {
              return hamiltonian_vector_field(toda_system(cfg), alpha, s);
          },
          py::arg("cfg"), py::arg("alpha"), py::arg("state"));
    m.def("flow",
          [](const TodaConfig& cfg, int alpha, const LatticeState& s, double t, double step) {
              return flow(toda_system(cfg), alpha, s, t, step).final;
          },
          py::arg("cfg"), py::arg("alpha"), py::arg("state"), py::arg("t"),
          py::arg("step") = 1e-3);
    m.def("flow_commutator_defect",
          [](const TodaConfig& cfg, const LatticeState& s, double ta, double tb, double step) {
              return flow_commutator_defect(toda_system(cfg), 1, 2, s, ta, tb, step);
          },
          py::arg("cfg"), py::arg("state"), py::arg("t1"), py::arg("t2"),
          py::arg("step") = 1e-3);
    m.def("poisson_bracket",
          [](const TodaConfig& cfg, const LatticeState& s) {
              return poisson_bracket(toda_system(cfg), 1, 2, s);
          },
          py::arg("cfg"), py::arg("state"));
    m.def("evaluate_multitime",
          [](const TodaConfig& cfg, const LatticeState& s, const std::vector<double>& t,
             double step) { return evaluate_multitime(toda_system(cfg), s, t, step); },
          py::arg("cfg"), py::arg("state"), py::arg("t"), py::arg("step") = 1e-3);
    m.def("action_along_path",
          [](const TodaConfig& cfg, const LatticeState& s,
             const std::vector<std::vector<double>>& vertices, int quad_points, double step) {
              return action_along_path(toda_one_form(cfg), toda_system(cfg), s,
                                       PolylinePath{vertices, quad_points}, step);
          },
          py::arg("cfg"), py::arg("state"), py::arg("vertices"), py::arg("quad_points") = 8,
          py::arg("step") = 1e-3);
    m.def("closure_defect_pointwise",
          [](const TodaConfig& cfg, const LatticeState& s, const std::vector<double>& t,
             double h_fd, double step) {
              return closure_defect_pointwise(toda_one_form(cfg), toda_system(cfg), s, t, 1, 2,
                                              h_fd, step);
          },
          py::arg("cfg"), py::arg("state"), py::arg("t"), py::arg("h_fd") = 1e-4,
          py::arg("step") = 1e-3);

    // discrete Backlund
    m.def("bt_forward", &bt_forward, py::arg("state"), py::arg("lam"), py::arg("cfg"));
    m.def("bt_inverse", &bt_inverse, py::arg("state"), py::arg("lam"), py::arg("cfg"));
    m.def("bt_lagrangian", &bt_lagrangian, py::arg("x"), py::arg("xt"), py::arg("lam"),
          py::arg("cfg"));
    m.def("discrete_el_residual",
          [](const LatticeState& s, const BtStepResult& r, const BtParam& lam,
             const TodaConfig& cfg) {
              const DiscreteElResiduals res = discrete_el_residual(s, r, lam, cfg);
              return std::make_pair(res.r_p, res.r_ptilde);
          },
          py::arg("state"), py::arg("step"), py::arg("lam"), py::arg("cfg"));
    m.def("commutation_defect", &commutation_defect, py::arg("state"), py::arg("lam"),
          py::arg("mu"), py::arg("cfg"));
    m.def("superposition_residuals", &superposition_residuals, py::arg("x"), py::arg("xt"),
          py::arg("xh"), py::arg("xht"), py::arg("lam"), py::arg("mu"), py::arg("cfg"));
    m.def("closure_constant",
          [](const LatticeState& s, const BtParam& lam, const BtParam& mu,
             const TodaConfig& cfg) {
              const ClosureConstant c = closure_constant(s, lam, mu, cfg);
              return std::make_pair(c.ell, c.ell_reduced);
          },
          py::arg("state"), py::arg("lam"), py::arg("mu"), py::arg("cfg"));
    m.def("spectrality_integral",
          [](const std::vector<double>& x, const std::vector<double>& xt,
             const std::vector<double>& p, const BtParam& lam, const TodaConfig& cfg) {
              const SpectralityIntegral si = spectrality_integral(x, xt, p, lam, cfg);
              return std::make_pair(si.direct, si.reduced);
          },
          py::arg("x"), py::arg("xt"), py::arg("p"), py::arg("lam"), py::arg("cfg"));
    m.def("symplecticity_defect", &symplecticity_defect, py::arg("state"), py::arg("lam"),
          py::arg("cfg"), py::arg("h_fd") = 1e-5);
    m.def("path_action_discrete",
          [](const LatticeState& s, const std::vector<std::pair<int, int>>& steps,
             const std::vector<double>& params, const TodaConfig& cfg) {
              std::vector<BtParam> ps;
              for (double l : params) ps.emplace_back(l);
              return path_action_discrete(s, DiscretePath{steps}, ps, cfg);
          },
          py::arg("state"), py::arg("steps"), py::arg("params"), py::arg("cfg"));

    // zero curvature
    m.def("psi_from_hat",
          [](const std::vector<double>& x, const std::vector<double>& xh, double mu,
             double psi1, const TodaConfig& cfg) {
              const WaveFunction w = psi_from_hat(x, xh, mu, psi1, cfg);
              return std::make_pair(w.psi, w.phi);
          },
          py::arg("x"), py::arg("xh"), py::arg("mu"), py::arg("psi1"), py::arg("cfg"));
    m.def("lax_L", &lax_L, py::arg("state"), py::arg("k"), py::arg("mu"));
    m.def("lax_V", &lax_V, py::arg("x"), py::arg("xt"), py::arg("k"), py::arg("mu"),
          py::arg("lam"), py::arg("cfg"));
    m.def("zero_curvature_defect", &zero_curvature_defect, py::arg("state"), py::arg("lam"),
          py::arg("mu"), py::arg("cfg"));
    m.def("monodromy", &monodromy, py::arg("state"), py::arg("mu"));
    m.def("product_identity_defect", &product_identity_defect, py::arg("state"),
          py::arg("lam"), py::arg("cfg"));

    // harness hooks
    m.def("sample_state", &harness::sample_state, py::arg("seed"), py::arg("cfg"));
    m.def("run_verify_json",
          [](const std::string& config_text) {
              const harness::RunConfig cfg = harness::config_from_json(config_text);
              const harness::VerificationReport report = harness::run_verify(cfg);
              return std::make_pair(harness::report_to_json(report), report.all_pass());
          },
          py::arg("config_json"),
          "Run the invariant suite for a JSON config; returns (report_json, all_pass).");

    m.attr("__version__") = "0.1.0";
}
