#include "toda/backlund.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace toda {

namespace {

int wrap(int i, int n) { return (i % n + n) % n; }

// e^{x_{k+1} - xt_k} for k = 0..N: the coupling gap between the two layers.
// OpenEnd kills k = 0 (xt_0 = +inf) and k = N (x_{N+1} = -inf).
double mixed_gap(const std::vector<double>& x, const std::vector<double>& xt, int k,
                 const TodaConfig& cfg) {
    const int n = cfg.n;
    if (k < 0 || k > n) throw std::invalid_argument("mixed gap index outside 0..N");
    if (cfg.boundary == Boundary::OpenEnd) {
        if (k == 0 || k == n) return 0.0;
        return std::exp(x[k] - xt[k - 1]);
    }
    const int i = wrap(k - 1, n);
    return std::exp(x[(i + 1) % n] - xt[i]);
}

void check_lengths(const std::vector<double>& v, const TodaConfig& cfg, const char* name) {
    if (static_cast<int>(v.size()) != cfg.n)
        throw std::invalid_argument(std::string(name) + " has length " +
                                    std::to_string(v.size()) + ", expected N = " +
                                    std::to_string(cfg.n));
}

struct NewtonSolution {
    std::vector<double> y;
    int iters;
};

// Newton iteration for the periodic layer equations. Each equation couples the
// unknown at k to the unknown at k + shift (shift = -1 solves for x~ given
// (x, p), shift = +1 solves for x given (x~, p~)).
NewtonSolution solve_periodic_newton(
    const std::function<double(const std::vector<double>&, int k)>& residual,
    const std::function<double(const std::vector<double>&, int k)>& d_self,
    const std::function<double(const std::vector<double>&, int k)>& d_other, int shift,
    std::vector<double> guess, const TodaConfig& cfg) {
    const int n = cfg.n;
    Eigen::VectorXd f(n);
    Eigen::MatrixXd jac(n, n);
    double res = 0;
    for (int iter = 0; iter <= cfg.max_newton_iters; ++iter) {
        res = 0;
        for (int k = 1; k <= n; ++k) {
            f(k - 1) = residual(guess, k);
            res = std::max(res, std::abs(f(k - 1)));
        }
        if (!std::isfinite(res)) throw NewtonDivergedError(res, iter, "periodic solve: ");
        if (res <= cfg.tol_newton) return {std::move(guess), iter};
        if (iter == cfg.max_newton_iters) break;

        jac.setZero();
        for (int k = 1; k <= n; ++k) {
            jac(k - 1, k - 1) += d_self(guess, k);
            jac(k - 1, wrap(k - 1 + shift, n)) += d_other(guess, k);
        }
        const Eigen::VectorXd dx = jac.partialPivLu().solve(f);
        if (!dx.allFinite()) throw NewtonDivergedError(res, iter, "periodic solve: ");
        for (int i = 0; i < n; ++i) guess[i] -= dx(i);
    }
    throw NewtonDivergedError(res, cfg.max_newton_iters);
}

}  // namespace

BtParam::BtParam(double l) : lambda(l) {
    if (!(std::isfinite(l)) || l == 0.0)
        throw std::invalid_argument("Backlund parameter must be finite and nonzero");
}

void DiscretePath::validate(int m) const {
    if (steps.empty()) throw std::invalid_argument("discrete path must be nonempty");
    for (const auto& [alpha, sign] : steps) {
        if (alpha < 1 || alpha > m)
            throw std::invalid_argument("path direction " + std::to_string(alpha) +
                                        " outside 1.." + std::to_string(m));
        if (sign != 1 && sign != -1)
            throw std::invalid_argument("path step sign must be +1 or -1");
    }
}

BtStepResult bt_forward(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg) {
    validate_state(s, cfg);
    const int n = cfg.n;
    const double l = lam.lambda;
    LatticeState out;
    out.x.resize(n);
    out.p.resize(n);
    std::string note;

    if (cfg.boundary == Boundary::OpenEnd) {
        double g_prev = 0;  // g_{k-1}
        for (int k = 1; k <= n; ++k) {
            double g = 1 + l * s.p[k - 1];
            if (k > 1) g -= l * l * std::exp(s.x[k - 1] - s.x[k - 2]) / g_prev;
            if (!(g > 0)) throw NonPositiveBranchError(k, g);
            out.x[k - 1] = s.x[k - 1] + std::log(g);
            g_prev = g;
        }
        note = "continued-fraction";
    } else {
        std::vector<double> guess(n);
        for (int k = 1; k <= n; ++k) {
            const double g0 = 1 + l * s.p[k - 1];
            if (!(g0 > 0)) throw NonPositiveBranchError(k, g0, "periodic initial guess: ");
            guess[k - 1] = s.x[k - 1] + std::log(g0);
        }
        auto residual = [&](const std::vector<double>& y, int k) {
            return (std::exp(y[k - 1] - s.x[k - 1]) - 1) / l + l * mixed_gap(s.x, y, k - 1, cfg) -
                   s.p[k - 1];
        };
        auto d_self = [&](const std::vector<double>& y, int k) {
            return std::exp(y[k - 1] - s.x[k - 1]) / l;
        };
        auto d_other = [&](const std::vector<double>& y, int k) {
            return -l * mixed_gap(s.x, y, k - 1, cfg);
        };
        NewtonSolution sol =
            solve_periodic_newton(residual, d_self, d_other, -1, std::move(guess), cfg);
        out.x = std::move(sol.y);
        note = "newton(" + std::to_string(sol.iters) + ")";
    }

    for (int k = 1; k <= n; ++k)
        out.p[k - 1] =
            (std::exp(out.x[k - 1] - s.x[k - 1]) - 1) / l + l * mixed_gap(s.x, out.x, k, cfg);

    BtStepResult r{std::move(out), std::move(note)};
    validate_state(r.next, cfg);
    return r;
}

BtStepResult bt_inverse(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg) {
    validate_state(s, cfg);
    const int n = cfg.n;
    const double l = lam.lambda;
    const std::vector<double>& xt = s.x;  // incoming state is the tilde layer
    const std::vector<double>& pt = s.p;
    LatticeState out;
    out.x.resize(n);
    out.p.resize(n);
    std::string note;

    if (cfg.boundary == Boundary::OpenEnd) {
        for (int k = n; k >= 1; --k) {
            double h = 1 + l * pt[k - 1];
            if (k < n) h -= l * l * std::exp(out.x[k] - xt[k - 1]);
            if (!(h > 0)) throw NonPositiveBranchError(k, h, "inverse step: ");
            out.x[k - 1] = xt[k - 1] - std::log(h);
        }
        note = "continued-fraction";
    } else {
        std::vector<double> guess(n);
        for (int k = 1; k <= n; ++k) {
            const double h0 = 1 + l * pt[k - 1];
            if (!(h0 > 0)) throw NonPositiveBranchError(k, h0, "inverse periodic guess: ");
            guess[k - 1] = xt[k - 1] - std::log(h0);
        }
        auto residual = [&](const std::vector<double>& x, int k) {
            return (std::exp(xt[k - 1] - x[k - 1]) - 1) / l + l * mixed_gap(x, xt, k, cfg) -
                   pt[k - 1];
        };
        auto d_self = [&](const std::vector<double>& x, int k) {
            return -std::exp(xt[k - 1] - x[k - 1]) / l;
        };
        auto d_other = [&](const std::vector<double>& x, int k) {
            return l * mixed_gap(x, xt, k, cfg);
        };
        NewtonSolution sol =
            solve_periodic_newton(residual, d_self, d_other, +1, std::move(guess), cfg);
        out.x = std::move(sol.y);
        note = "newton(" + std::to_string(sol.iters) + ")";
    }

    for (int k = 1; k <= n; ++k)
        out.p[k - 1] =
            (std::exp(xt[k - 1] - out.x[k - 1]) - 1) / l + l * mixed_gap(out.x, xt, k - 1, cfg);

    BtStepResult r{std::move(out), std::move(note)};
    validate_state(r.next, cfg);
    return r;
}

double bt_lagrangian(const std::vector<double>& x, const std::vector<double>& xt,
                     const BtParam& lam, const TodaConfig& cfg) {
    check_lengths(x, cfg, "x");
    check_lengths(xt, cfg, "x~");
    const double l = lam.lambda;
    double bracket = 0, coupling = 0;
    for (int k = 1; k <= cfg.n; ++k) {
        const double d = xt[k - 1] - x[k - 1];
        bracket += std::exp(d) - 1 - d;
        coupling += mixed_gap(x, xt, k, cfg);
    }
    return bracket / l - l * coupling;
}

std::vector<double> bt_lagrangian_dx(const std::vector<double>& x,
                                     const std::vector<double>& xt, const BtParam& lam,
                                     const TodaConfig& cfg) {
    check_lengths(x, cfg, "x");
    check_lengths(xt, cfg, "x~");
    const double l = lam.lambda;
    std::vector<double> g(cfg.n);
    for (int k = 1; k <= cfg.n; ++k)
        g[k - 1] = -(std::exp(xt[k - 1] - x[k - 1]) - 1) / l - l * mixed_gap(x, xt, k - 1, cfg);
    return g;
}

std::vector<double> bt_lagrangian_dxt(const std::vector<double>& x,
                                      const std::vector<double>& xt, const BtParam& lam,
                                      const TodaConfig& cfg) {
    check_lengths(x, cfg, "x");
    check_lengths(xt, cfg, "x~");
    const double l = lam.lambda;
    std::vector<double> g(cfg.n);
    for (int k = 1; k <= cfg.n; ++k)
        g[k - 1] = (std::exp(xt[k - 1] - x[k - 1]) - 1) / l + l * mixed_gap(x, xt, k, cfg);
    return g;
}

double bt_lagrangian_dlambda(const std::vector<double>& x, const std::vector<double>& xt,
                             const BtParam& lam, const TodaConfig& cfg) {
    check_lengths(x, cfg, "x");
    check_lengths(xt, cfg, "x~");
    const double l = lam.lambda;
    double bracket = 0, coupling = 0;
    for (int k = 1; k <= cfg.n; ++k) {
        const double d = xt[k - 1] - x[k - 1];
        bracket += std::exp(d) - 1 - d;
        coupling += mixed_gap(x, xt, k, cfg);
    }
    return -bracket / (l * l) - coupling;
}

DiscreteElResiduals discrete_el_residual(const LatticeState& s, const BtStepResult& r,
                                         const BtParam& lam, const TodaConfig& cfg) {
    const std::vector<double> dx = bt_lagrangian_dx(s.x, r.next.x, lam, cfg);
    const std::vector<double> dxt = bt_lagrangian_dxt(s.x, r.next.x, lam, cfg);
    DiscreteElResiduals out;
    out.r_p.resize(cfg.n);
    out.r_ptilde.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
        out.r_p[i] = s.p[i] + dx[i];
        out.r_ptilde[i] = r.next.p[i] - dxt[i];
    }
    return out;
}

double commutation_defect(const LatticeState& s, const BtParam& lam, const BtParam& mu,
                          const TodaConfig& cfg) {
    auto compose = [&](const BtParam& first, const BtParam& second, const char* tag) {
        try {
            return bt_forward(bt_forward(s, first, cfg).next, second, cfg).next;
        } catch (const NonPositiveBranchError& e) {
            throw NonPositiveBranchError(e.index, e.value, tag);
        } catch (const NewtonDivergedError& e) {
            throw NewtonDivergedError(e.residual, e.iters, tag);
        }
    };
    const LatticeState ab = compose(lam, mu, "order F_mu(F_lambda(s)): ");
    const LatticeState ba = compose(mu, lam, "order F_lambda(F_mu(s)): ");
    double d = 0;
    for (int i = 0; i < cfg.n; ++i) {
        d = std::max(d, std::abs(ab.x[i] - ba.x[i]));
        d = std::max(d, std::abs(ab.p[i] - ba.p[i]));
    }
    return d;
}

std::vector<double> superposition_residuals(const std::vector<double>& x,
                                            const std::vector<double>& xt,
                                            const std::vector<double>& xh,
                                            const std::vector<double>& xht,
                                            const BtParam& lam, const BtParam& mu,
                                            const TodaConfig& cfg) {
    check_lengths(x, cfg, "x");
    check_lengths(xt, cfg, "x~");
    check_lengths(xh, cfg, "x^");
    check_lengths(xht, cfg, "x^~");
    const int n = cfg.n;
    const double l = lam.lambda, m = mu.lambda;

    auto bulk = [&](int k, int kp1) {  // 0-based indices of sites k and k+1
        const double den = l * std::exp(xh[k]) - m * std::exp(xt[k]);
        if (den == 0.0) throw ZeroDenominatorError(k + 1);
        const double lhs = std::exp(xht[k] - xt[k] - xh[k] + x[kp1]);
        const double rhs = (l * std::exp(xh[kp1]) - m * std::exp(xt[kp1])) / den;
        return lhs - rhs;
    };

    std::vector<double> res;
    if (cfg.boundary == Boundary::Periodic) {
        res.reserve(n);
        for (int k = 0; k < n; ++k) res.push_back(bulk(k, (k + 1) % n));
        return res;
    }

    res.reserve(n + 1);
    // left boundary counterpart: e^{x_1} = (l e^{x^_1} - m e^{x~_1}) / (l - m)
    if (l - m == 0.0) throw ZeroDenominatorError(0);
    res.push_back(std::exp(x[0]) - (l * std::exp(xh[0]) - m * std::exp(xt[0])) / (l - m));
    for (int k = 0; k < n - 1; ++k) res.push_back(bulk(k, k + 1));
    // right boundary counterpart: e^{x^~_N - x~_N - x^_N} = (l - m) / (l e^{x^_N} - m e^{x~_N})
    const double den = l * std::exp(xh[n - 1]) - m * std::exp(xt[n - 1]);
    if (den == 0.0) throw ZeroDenominatorError(n);
    res.push_back(std::exp(xht[n - 1] - xt[n - 1] - xh[n - 1]) - (l - m) / den);
    return res;
}

ClosureConstant closure_constant(const LatticeState& s, const BtParam& lam, const BtParam& mu,
                                 const TodaConfig& cfg) {
    const LatticeState st = bt_forward(s, lam, cfg).next;
    const LatticeState sh = bt_forward(s, mu, cfg).next;
    const LatticeState sht = bt_forward(st, mu, cfg).next;

    ClosureConstant out;
    // grouped so the two legs with the same parameter cancel against each other
    out.ell = (bt_lagrangian(s.x, st.x, lam, cfg) - bt_lagrangian(sh.x, sht.x, lam, cfg)) +
              (bt_lagrangian(st.x, sht.x, mu, cfg) - bt_lagrangian(s.x, sh.x, mu, cfg));
    double sum = 0;
    for (int i = 0; i < cfg.n; ++i) sum += sht.x[i] - st.x[i] - sh.x[i] + s.x[i];
    out.ell_reduced = (1 / lam.lambda - 1 / mu.lambda) * sum;
    return out;
}

SpectralityIntegral spectrality_integral(const std::vector<double>& x,
                                         const std::vector<double>& xt,
                                         const std::vector<double>& p, const BtParam& lam,
                                         const TodaConfig& cfg) {
    check_lengths(p, cfg, "p");
    SpectralityIntegral out;
    out.direct = bt_lagrangian_dlambda(x, xt, lam, cfg);
    double psum = 0, dsum = 0;
    for (int i = 0; i < cfg.n; ++i) {
        psum += p[i];
        dsum += xt[i] - x[i];
    }
    out.reduced = -psum / lam.lambda + dsum / (lam.lambda * lam.lambda);
    return out;
}

double symplecticity_defect_of_map(
    const std::function<LatticeState(const LatticeState&)>& map, const LatticeState& s,
    double h_fd) {
    if (!(h_fd > 0)) throw std::invalid_argument("h_fd must be > 0");
    const int n = s.n();
    const int dim = 2 * n;

    auto pack = [n](const LatticeState& st) {
        Eigen::VectorXd z(2 * n);
        for (int i = 0; i < n; ++i) {
            z(i) = st.x[i];
            z(n + i) = st.p[i];
        }
        return z;
    };
    auto unpack = [n](const Eigen::VectorXd& z) {
        LatticeState st;
        st.x.assign(z.data(), z.data() + n);
        st.p.assign(z.data() + n, z.data() + 2 * n);
        return st;
    };

    const Eigen::VectorXd z0 = pack(s);
    Eigen::MatrixXd jac(dim, dim);
    for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd zp = z0, zm = z0;
        zp(j) += h_fd;
        zm(j) -= h_fd;
        const Eigen::VectorXd fp = pack(map(unpack(zp)));
        const Eigen::VectorXd fm = pack(map(unpack(zm)));
        jac.col(j) = (fp - fm) / (2 * h_fd);
    }

    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        omega(i, n + i) = 1;
        omega(n + i, i) = -1;
    }
    return (jac.transpose() * omega * jac - omega).cwiseAbs().maxCoeff();
}

double symplecticity_defect(const LatticeState& s, const BtParam& lam, const TodaConfig& cfg,
                            double h_fd) {
    return symplecticity_defect_of_map(
        [&](const LatticeState& z) { return bt_forward(z, lam, cfg).next; }, s, h_fd);
}

double path_action_discrete(const LatticeState& s0, const DiscretePath& path,
                            const std::vector<BtParam>& params, const TodaConfig& cfg) {
    if (params.empty()) throw std::invalid_argument("params must be nonempty");
    path.validate(static_cast<int>(params.size()));

    LatticeState state = s0;
    double total = 0;
    for (const auto& [alpha, sign] : path.steps) {
        const BtParam& lam = params[alpha - 1];
        if (sign > 0) {
            const BtStepResult r = bt_forward(state, lam, cfg);
            total += bt_lagrangian(state.x, r.next.x, lam, cfg);
            state = r.next;
        } else {
            const BtStepResult r = bt_inverse(state, lam, cfg);
            total -= bt_lagrangian(r.next.x, state.x, lam, cfg);
            state = r.next;
        }
    }
    return total;
}

}  // namespace toda
