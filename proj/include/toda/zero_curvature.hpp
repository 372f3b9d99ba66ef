#pragma once

#include <vector>

#include "toda/backlund.hpp"
#include "toda/lattice.hpp"

namespace toda {

/// Wave functions of the auxiliary linear problem. psi holds psi_1..psi_{N+1},
/// phi holds phi_1..phi_{N+1} with phi_k = -e^{-x_{k-1}} psi_{k-1}.
/// phi_1 is 0 under OpenEnd (x_0 = +inf); under Periodic it uses the mod-N
/// extension psi_0 = mu psi_1 e^{x_N - x^_N}.
struct WaveFunction {
    std::vector<double> psi;
    std::vector<double> phi;

    double psi_at(int k) const { return psi.at(k - 1); }  // k = 1..N+1
    double phi_at(int k) const { return phi.at(k - 1); }
};

/// Wave functions from a mu-step layer pair (x, x^):
/// psi_1 = psi1, psi_{k+1} = psi_k e^{x^_k - x_k} / mu.
WaveFunction psi_from_hat(const std::vector<double>& x, const std::vector<double>& xh,
                          double mu, double psi1, const TodaConfig& cfg);

/// Transfer matrix L_k(mu) = [[1/mu + p_k, e^{x_k}], [-e^{-x_k}, 0]]. k is 1-based.
Matrix2 lax_L(const LatticeState& s, int k, double mu);

/// Evolution matrix of the lambda-step,
/// V_k(mu) = [[1 - lambda/mu - lambda^2 e^{x_k - x~_{k-1}}, -lambda e^{x_k}],
///            [lambda e^{-x~_{k-1}}, 1]].
/// OpenEnd suppresses the x~_0 entries at k = 1; Periodic wraps.
Matrix2 lax_V(const std::vector<double>& x, const std::vector<double>& xt, int k, double mu,
              const BtParam& lam, const TodaConfig& cfg);

/// Max over k of the entrywise norm of L~_k V_k - V_{k+1} L_k for the step
/// s -> F_lambda(s), at spectral parameter mu. Periodic checks k = 1..N
/// cyclically, OpenEnd k = 1..N-1.
double zero_curvature_defect(const LatticeState& s, const BtParam& lam, double mu,
                             const TodaConfig& cfg);

/// Monodromy T(mu) = L_N(mu) ... L_2(mu) L_1(mu), index 1 applied first.
Matrix2 monodromy(const LatticeState& s, double mu);

/// | prod_k e^{x~_k - x_k} - lambda^N (T(lambda))_11 |  (OpenEnd only).
double product_identity_defect(const LatticeState& s, const BtParam& lam,
                               const TodaConfig& cfg);

}  // namespace toda
