#include "toda/zero_curvature.hpp"

#include <cmath>
#include <stdexcept>

namespace toda {

WaveFunction psi_from_hat(const std::vector<double>& x, const std::vector<double>& xh,
                          double mu, double psi1, const TodaConfig& cfg) {
    if (mu == 0.0) throw std::invalid_argument("mu must be nonzero");
    if (psi1 == 0.0) throw std::invalid_argument("psi1 must be nonzero");
    const int n = cfg.n;
    if (static_cast<int>(x.size()) != n || static_cast<int>(xh.size()) != n)
        throw std::invalid_argument("layer length mismatch");

    WaveFunction w;
    w.psi.resize(n + 1);
    w.phi.resize(n + 1);
    w.psi[0] = psi1;
    for (int k = 1; k <= n; ++k)
        w.psi[k] = w.psi[k - 1] * std::exp(xh[k - 1] - x[k - 1]) / mu;

    if (cfg.boundary == Boundary::OpenEnd) {
        w.phi[0] = 0.0;  // x_0 = +inf suppresses e^{-x_0} psi_0
    } else {
        // psi_0 from the mod-N extension of the defining relation
        const double psi0 = mu * psi1 * std::exp(x[n - 1] - xh[n - 1]);
        w.phi[0] = -std::exp(-x[n - 1]) * psi0;
    }
    for (int k = 2; k <= n + 1; ++k)
        w.phi[k - 1] = -std::exp(-x[k - 2]) * w.psi[k - 2];
    return w;
}

Matrix2 lax_L(const LatticeState& s, int k, double mu) {
    if (mu == 0.0) throw std::invalid_argument("mu must be nonzero");
    if (k < 1 || k > s.n())
        throw std::invalid_argument("lax_L: k = " + std::to_string(k) + " outside 1..N");
    return {1.0 / mu + s.p[k - 1], std::exp(s.x[k - 1]), -std::exp(-s.x[k - 1]), 0.0};
}

Matrix2 lax_V(const std::vector<double>& x, const std::vector<double>& xt, int k, double mu,
              const BtParam& lam, const TodaConfig& cfg) {
    if (mu == 0.0) throw std::invalid_argument("mu must be nonzero");
    const int n = cfg.n;
    if (k < 1 || k > n)
        throw std::invalid_argument("lax_V: k = " + std::to_string(k) + " outside 1..N");
    const double l = lam.lambda;
    if (cfg.boundary == Boundary::OpenEnd && k == 1)
        return {1 - l / mu, -l * std::exp(x[0]), 0.0, 1.0};
    const int prev = cfg.boundary == Boundary::Periodic ? (k - 2 + n) % n : k - 2;
    return {1 - l / mu - l * l * std::exp(x[k - 1] - xt[prev]), -l * std::exp(x[k - 1]),
            l * std::exp(-xt[prev]), 1.0};
}

double zero_curvature_defect(const LatticeState& s, const BtParam& lam, double mu,
                             const TodaConfig& cfg) {
    const BtStepResult step = bt_forward(s, lam, cfg);
    const LatticeState& st = step.next;
    const int n = cfg.n;
    const int kmax = cfg.boundary == Boundary::Periodic ? n : n - 1;

    double defect = 0;
    for (int k = 1; k <= kmax; ++k) {
        const int knext = cfg.boundary == Boundary::Periodic ? k % n + 1 : k + 1;
        const Matrix2 lhs = lax_L(st, k, mu) * lax_V(s.x, st.x, k, mu, lam, cfg);
        const Matrix2 rhs = lax_V(s.x, st.x, knext, mu, lam, cfg) * lax_L(s, k, mu);
        defect = std::max(defect, max_abs_diff(lhs, rhs));
    }
    return defect;
}

Matrix2 monodromy(const LatticeState& s, double mu) {
    Matrix2 t = Matrix2::identity();
    for (int k = 1; k <= s.n(); ++k) t = lax_L(s, k, mu) * t;
    return t;
}

double product_identity_defect(const LatticeState& s, const BtParam& lam,
                               const TodaConfig& cfg) {
    if (cfg.boundary != Boundary::OpenEnd)
        throw std::invalid_argument(
            "product identity is implemented for open-end boundaries only");
    const BtStepResult step = bt_forward(s, lam, cfg);
    double prod = 1;
    for (int i = 0; i < cfg.n; ++i) prod *= std::exp(step.next.x[i] - s.x[i]);
    const double t11 = monodromy(s, lam.lambda).a11;
    return std::abs(prod - std::pow(lam.lambda, cfg.n) * t11);
}

}  // namespace toda
