#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "toda/lattice.hpp"

namespace toda {

/// Parameter of one member of the Backlund family.
struct BtParam {
    double lambda;

    explicit BtParam(double l);  // throws std::invalid_argument when l == 0 or non-finite
};

struct BtStepResult {
    LatticeState next;
    std::string branch_note;  // "continued-fraction" or "newton(<iters>)"
};

/// Lattice path in Z^m: signed unit steps (direction alpha 1-based, sign +-1).
struct DiscretePath {
    std::vector<std::pair<int, int>> steps;

    void validate(int m) const;  // throws std::invalid_argument
};

/// One step of the map F_lambda: (x, p) -> (x~, p~).
///
/// OpenEnd evaluates the continued fractions by the forward recurrence
/// g_1 = 1 + lambda p_1, g_k = 1 + lambda p_k - lambda^2 e^{x_k-x_{k-1}} / g_{k-1};
/// Periodic solves the N coupled momentum equations by Newton, starting from
/// the branch continuously connected to the identity as lambda -> 0.
BtStepResult bt_forward(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg);

/// Inverse step: (x~, p~) -> (x, p), by the mirrored backward recurrence
/// (OpenEnd) or Newton (Periodic).
BtStepResult bt_inverse(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg);

/// Edge Lagrangian of the family:
/// (1/lambda) sum_k (e^{x~_k-x_k} - 1 - (x~_k-x_k)) - lambda sum_k e^{x_{k+1}-x~_k}.
double bt_lagrangian(const std::vector<double>& x, const std::vector<double>& xt,
                     const BtParam& lam, const TodaConfig& cfg);

/// Partial derivatives of the edge Lagrangian w.r.t. both vertices.
std::vector<double> bt_lagrangian_dx(const std::vector<double>& x,
                                     const std::vector<double>& xt, const BtParam& lam,
                                     const TodaConfig& cfg);
std::vector<double> bt_lagrangian_dxt(const std::vector<double>& x,
                                      const std::vector<double>& xt, const BtParam& lam,
                                      const TodaConfig& cfg);

/// Analytic lambda-derivative of the edge Lagrangian.
double bt_lagrangian_dlambda(const std::vector<double>& x, const std::vector<double>& xt,
                             const BtParam& lam, const TodaConfig& cfg);

/// Residuals of the discrete momentum relations for a step (s -> r.next):
/// r_p_k = p_k + dLambda/dx_k and r_ptilde_k = p~_k - dLambda/dx~_k.
/// Both vanish identically when r came from bt_forward.
struct DiscreteElResiduals {
    std::vector<double> r_p;
    std::vector<double> r_ptilde;
};
DiscreteElResiduals discrete_el_residual(const LatticeState& s, const BtStepResult& r,
                                         const BtParam& lam, const TodaConfig& cfg);

/// Max-norm over (x, p) of F_lambda(F_mu(s)) - F_mu(F_lambda(s)).
double commutation_defect(const LatticeState& s, const BtParam& lam, const BtParam& mu,
                          const TodaConfig& cfg);

/// Residuals of the superposition formula on a quadruple (x, x~, x^, x^~).
/// Periodic: N cyclic relations. OpenEnd: the two boundary counterparts
/// followed by the N-1 bulk relations, in left-to-right order.
std::vector<double> superposition_residuals(const std::vector<double>& x,
                                            const std::vector<double>& xt,
                                            const std::vector<double>& xh,
                                            const std::vector<double>& xht,
                                            const BtParam& lam, const BtParam& mu,
                                            const TodaConfig& cfg);

/// Closure constant of the elementary quad spanned by F_lambda and F_mu at s:
/// direct four-Lagrangian sum and the reduced telescoped form
/// (1/lambda - 1/mu) sum_k (x^~_k - x~_k - x^_k + x_k).
struct ClosureConstant {
    double ell;
    double ell_reduced;
};
ClosureConstant closure_constant(const LatticeState& s, const BtParam& lam, const BtParam& mu,
                                 const TodaConfig& cfg);

/// dLambda/dlambda of a consistent step, both as the analytic derivative and
/// as the reduced form -(1/lambda) sum p_k + (1/lambda^2) sum (x~_k - x_k).
struct SpectralityIntegral {
    double direct;
    double reduced;
};
SpectralityIntegral spectrality_integral(const std::vector<double>& x,
                                         const std::vector<double>& xt,
                                         const std::vector<double>& p, const BtParam& lam,
                                         const TodaConfig& cfg);

/// Max-norm of J^T Omega J - Omega for the finite-difference Jacobian of an
/// arbitrary phase-space map at s.
double symplecticity_defect_of_map(
    const std::function<LatticeState(const LatticeState&)>& map, const LatticeState& s,
    double h_fd = 1e-5);

/// Same, for F_lambda.
double symplecticity_defect(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg,
                            double h_fd = 1e-5);

/// Signed sum of edge Lagrangians along a lattice path on the solution sheet
/// through s0. params[alpha-1] is the parameter of direction alpha.
double path_action_discrete(const LatticeState& s0, const DiscretePath& path,
                            const std::vector<BtParam>& params, const TodaConfig& cfg);

}  // namespace toda
