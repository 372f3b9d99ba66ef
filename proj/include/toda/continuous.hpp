#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "toda/lattice.hpp"

namespace toda {

/// First jet of a two-time map at a point: positions plus both velocity slots.
struct Jet2 {
    std::vector<double> x;
    std::vector<double> v1;  // velocity along t_1
    std::vector<double> v2;  // velocity along t_2

    int n() const { return static_cast<int>(x.size()); }
};

/// First jet for an m-time map: v[alpha-1] is the velocity along t_alpha.
struct Jet {
    std::vector<double> x;
    std::vector<std::vector<double>> v;

    int times() const { return static_cast<int>(v.size()); }
};

Jet to_jet(const Jet2& j);
Jet2 to_jet2(const Jet& j);

/// One Hamilton function H(x, p) with its phase-space gradient.
/// Use make_fd_hamiltonian for value-only user systems.
struct Hamiltonian {
    std::function<double(const std::vector<double>& x, const std::vector<double>& p)> value;
    std::function<void(const std::vector<double>& x, const std::vector<double>& p,
                       std::vector<double>& grad_x, std::vector<double>& grad_p)>
        gradient;
};

/// Central-difference gradients around a value-only Hamilton function.
Hamiltonian make_fd_hamiltonian(
    std::function<double(const std::vector<double>&, const std::vector<double>&)> value,
    double h_fd = 1e-4);

/// m commuting (or candidate) Hamilton functions, one per time direction.
struct HamiltonianSystem {
    std::vector<Hamiltonian> h;

    int times() const { return static_cast<int>(h.size()); }
};

/// The built-in Toda pair H_1, H_2 with analytic gradients (m = 2).
HamiltonianSystem toda_system(const TodaConfig& cfg);

/// Piecewise-linear curve in multi-time, integrated segment by segment with
/// Gauss-Legendre quadrature.
struct PolylinePath {
    std::vector<std::vector<double>> vertices;  // points in R^m
    int quad_points_per_segment = 8;

    int times() const { return vertices.empty() ? 0 : static_cast<int>(vertices.front().size()); }
    void validate() const;  // throws std::invalid_argument
};

/// Lagrangian 1-form: m components L_alpha(jet), with partial derivatives
/// either analytic (when set) or central-difference fallbacks.
struct OneForm {
    int m = 0;
    std::vector<std::function<double(const Jet&)>> components;

    // optional analytic partials; alpha/beta are 1-based
    std::function<std::vector<double>(int alpha, const Jet&)> dx;
    std::function<std::vector<double>(int alpha, int beta, const Jet&)> dv;
    double h_fd = 1e-4;

    double component(int alpha, const Jet& j) const;
    std::vector<double> d_dx(int alpha, const Jet& j) const;
    std::vector<double> d_dv(int alpha, int beta, const Jet& j) const;
};

/// The Toda two-time 1-form (L_1, L_2) with analytic partials.
OneForm toda_one_form(const TodaConfig& cfg);

struct FlowResult {
    LatticeState final;
    int steps_taken = 0;
    double step_size = 0;
};

// -- Toda scalar evaluators ------------------------------------------------

double toda_H1(const LatticeState& s, const TodaConfig& cfg);
double toda_H2(const LatticeState& s, const TodaConfig& cfg);
double toda_L1(const Jet2& j, const TodaConfig& cfg);
double toda_L2(const Jet2& j, const TodaConfig& cfg);

/// Residuals of the algebraic multi-time Euler-Lagrange conditions at a jet.
/// offdiag_k = v2_k - v1_k^2 - e^{x_{k+1}-x_k} - e^{x_k-x_{k-1}}  (dL_2/dv1_k),
/// diag_k    = dL_1/dv1_k - dL_2/dv2_k  (identically 0 for Toda, kept as a
/// structural check).
struct ElResiduals {
    std::vector<double> offdiag;
    std::vector<double> diag;
};
ElResiduals el_algebraic_residuals(const Jet2& j, const TodaConfig& cfg);

// -- flows -------------------------------------------------------------------

/// (dx, dp) = (dH_alpha/dp, -dH_alpha/dx) at s. alpha is 1-based.
std::pair<std::vector<double>, std::vector<double>> hamiltonian_vector_field(
    const HamiltonianSystem& sys, int alpha, const LatticeState& s);

/// Classical fixed-step RK4 over ceil(|t|/step) equal substeps; negative t
/// integrates backwards. Throws FlowDivergedError on a non-finite state.
FlowResult flow(const HamiltonianSystem& sys, int alpha, const LatticeState& s, double t,
                double step = 1e-3);

/// Max-norm over (x, p) of the two composition orders of the alpha/beta flows.
double flow_commutator_defect(const HamiltonianSystem& sys, int alpha, int beta,
                              const LatticeState& s, double t_a, double t_b,
                              double step = 1e-3);

/// Canonical bracket {H_alpha, H_beta} evaluated at s.
double poisson_bracket(const HamiltonianSystem& sys, int alpha, int beta,
                       const LatticeState& s);

/// Multi-time solution through s0 evaluated at t in R^m: the flows are applied
/// in ascending alpha order. Order independence (up to integrator error) is a
/// contract of commuting systems, not of this routine.
LatticeState evaluate_multitime(const HamiltonianSystem& sys, const LatticeState& s0,
                                const std::vector<double>& t, double step = 1e-3);

/// Jet of the multi-time solution at t: x from evaluate_multitime, velocities
/// from the Hamiltonian vector fields.
Jet solution_jet(const HamiltonianSystem& sys, const LatticeState& s0,
                 const std::vector<double>& t, double step = 1e-3);

/// Action integral of the 1-form along a polyline in multi-time, on the
/// solution sheet through s0.
double action_along_path(const OneForm& form, const HamiltonianSystem& sys,
                         const LatticeState& s0, const PolylinePath& path,
                         double step = 1e-3);

/// Central-difference estimate of d/dt_alpha L_beta - d/dt_beta L_alpha on the
/// solution through s0 at multi-time point t. Zero (up to O(h_fd^2) plus
/// integrator error) iff the bracket {H_alpha, H_beta} vanishes.
double closure_defect_pointwise(const OneForm& form, const HamiltonianSystem& sys,
                                const LatticeState& s0, const std::vector<double>& t,
                                int alpha, int beta, double h_fd = 1e-4,
                                double step = 1e-3);

/// Lagrangian 1-form for an arbitrary commuting system:
/// L_alpha(jet) = <p(x, v1), v_alpha> - H_alpha(x, p(x, v1)), with the caller
/// supplying the inverse of v1 = dH_1/dp. Partials fall back to central
/// differences.
OneForm construct_one_form(
    const HamiltonianSystem& sys,
    std::function<std::vector<double>(const std::vector<double>& x,
                                      const std::vector<double>& v1)>
        legendre_inverse_1);

}  // namespace toda
