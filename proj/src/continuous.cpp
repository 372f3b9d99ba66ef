#include "toda/continuous.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace toda {

namespace {

int wrap(int i, int n) { return (i % n + n) % n; }

void check_alpha(int alpha, int m) {
    if (alpha < 1 || alpha > m)
        throw std::invalid_argument("time index alpha = " + std::to_string(alpha) +
                                    " outside 1.." + std::to_string(m));
}

bool all_finite(const std::vector<double>& v) {
    for (double a : v)
        if (!std::isfinite(a)) return false;
    return true;
}

void validate_jet(const Jet2& j, const TodaConfig& cfg) {
    if (j.n() != cfg.n || static_cast<int>(j.v1.size()) != cfg.n ||
        static_cast<int>(j.v2.size()) != cfg.n)
        throw std::invalid_argument("jet component lengths must all equal N");
    if (!all_finite(j.x) || !all_finite(j.v1) || !all_finite(j.v2))
        throw std::invalid_argument("jet entries must be finite");
}

// Gauss-Legendre nodes/weights on [0, 1].
struct GlTable {
    std::vector<double> nodes, weights;
};

GlTable gl_table(int n) {
    if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
    std::unique_ptr<gsl_integration_glfixed_table, void (*)(gsl_integration_glfixed_table*)>
        table(gsl_integration_glfixed_table_alloc(static_cast<size_t>(n)),
              gsl_integration_glfixed_table_free);
    GlTable out;
    out.nodes.resize(n);
    out.weights.resize(n);
    for (int i = 0; i < n; ++i)
        gsl_integration_glfixed_point(0.0, 1.0, static_cast<size_t>(i), &out.nodes[i],
                                      &out.weights[i], table.get());
    return out;
}

}  // namespace

Jet to_jet(const Jet2& j) { return Jet{j.x, {j.v1, j.v2}}; }

Jet2 to_jet2(const Jet& j) {
    if (j.times() != 2) throw std::invalid_argument("jet does not have exactly two times");
    return Jet2{j.x, j.v[0], j.v[1]};
}

void PolylinePath::validate() const {
    if (vertices.size() < 2) throw std::invalid_argument("path needs at least 2 vertices");
    if (quad_points_per_segment < 1)
        throw std::invalid_argument("quad_points_per_segment must be >= 1");
    const size_t dim = vertices.front().size();
    for (size_t i = 0; i < vertices.size(); ++i) {
        if (vertices[i].size() != dim)
            throw std::invalid_argument("path vertex dimension mismatch");
        if (i > 0 && vertices[i] == vertices[i - 1])
            throw std::invalid_argument("consecutive path vertices must be distinct");
    }
}

// -- Toda scalar evaluators ---------------------------------------------------

double toda_H1(const LatticeState& s, const TodaConfig& cfg) {
    validate_state(s, cfg);
    double kin = 0, pot = 0;
    for (int k = 1; k <= cfg.n; ++k) {
        kin += 0.5 * s.p[k - 1] * s.p[k - 1];
        pot += gap_exp(s.x, k, cfg);
    }
    return kin + pot;
}

double toda_H2(const LatticeState& s, const TodaConfig& cfg) {
    validate_state(s, cfg);
    const int n = cfg.n;
    double kin = 0, pot = 0;
    for (int k = 1; k <= n; ++k) {
        kin += s.p[k - 1] * s.p[k - 1] * s.p[k - 1] / 3.0;
        const double g = gap_exp(s.x, k, cfg);
        if (g != 0.0) pot += g * (s.p[k - 1] + s.p[wrap(k, n)]);
    }
    return kin + pot;
}

double toda_L1(const Jet2& j, const TodaConfig& cfg) {
    validate_jet(j, cfg);
    double kin = 0, pot = 0;
    for (int k = 1; k <= cfg.n; ++k) {
        kin += 0.5 * j.v1[k - 1] * j.v1[k - 1];
        pot += gap_exp(j.x, k, cfg);
    }
    return kin - pot;
}

double toda_L2(const Jet2& j, const TodaConfig& cfg) {
    validate_jet(j, cfg);
    const int n = cfg.n;
    double cross = 0, cubic = 0, pot = 0;
    for (int k = 1; k <= n; ++k) {
        cross += j.v1[k - 1] * j.v2[k - 1];
        cubic += j.v1[k - 1] * j.v1[k - 1] * j.v1[k - 1] / 3.0;
        const double g = gap_exp(j.x, k, cfg);
        if (g != 0.0) pot += g * (j.v1[k - 1] + j.v1[wrap(k, n)]);
    }
    return cross - cubic - pot;
}

ElResiduals el_algebraic_residuals(const Jet2& j, const TodaConfig& cfg) {
    validate_jet(j, cfg);
    const int n = cfg.n;
    ElResiduals r;
    r.offdiag.resize(n);
    r.diag.resize(n);
    for (int k = 1; k <= n; ++k) {
        r.offdiag[k - 1] = j.v2[k - 1] - j.v1[k - 1] * j.v1[k - 1] - gap_exp(j.x, k, cfg) -
                           gap_exp(j.x, k - 1, cfg);
        // dL1/dv1_k and dL2/dv2_k are both v1_k; keep the subtraction explicit.
        const double dL1_dv1 = j.v1[k - 1];
        const double dL2_dv2 = j.v1[k - 1];
        r.diag[k - 1] = dL1_dv1 - dL2_dv2;
    }
    return r;
}

// -- built-in system ----------------------------------------------------------

namespace {

void check_dim(const TodaConfig& cfg, const std::vector<double>& x,
               const std::vector<double>& p) {
    if (static_cast<int>(x.size()) != cfg.n || static_cast<int>(p.size()) != cfg.n)
        throw std::invalid_argument("phase-space point does not match N");
}

void toda_grad_H1(const TodaConfig& cfg, const std::vector<double>& x,
                  const std::vector<double>& p, std::vector<double>& gx,
                  std::vector<double>& gp) {
    check_dim(cfg, x, p);
    const int n = cfg.n;
    gx.assign(n, 0.0);
    gp.assign(n, 0.0);
    for (int k = 1; k <= n; ++k) {
        gp[k - 1] = p[k - 1];
        gx[k - 1] = gap_exp(x, k - 1, cfg) - gap_exp(x, k, cfg);
    }
}

void toda_grad_H2(const TodaConfig& cfg, const std::vector<double>& x,
                  const std::vector<double>& p, std::vector<double>& gx,
                  std::vector<double>& gp) {
    check_dim(cfg, x, p);
    const int n = cfg.n;
    gx.assign(n, 0.0);
    gp.assign(n, 0.0);
    for (int k = 1; k <= n; ++k) {
        const double gr = gap_exp(x, k, cfg);      // e^{x_{k+1}-x_k}
        const double gl = gap_exp(x, k - 1, cfg);  // e^{x_k-x_{k-1}}
        gp[k - 1] = p[k - 1] * p[k - 1] + gr + gl;
        double d = 0;
        if (gl != 0.0) d += gl * (p[wrap(k - 2, n)] + p[k - 1]);
        if (gr != 0.0) d -= gr * (p[k - 1] + p[wrap(k, n)]);
        gx[k - 1] = d;
    }
}

}  // namespace

HamiltonianSystem toda_system(const TodaConfig& cfg) {
    cfg.validate();
    HamiltonianSystem sys;
    sys.h.push_back(Hamiltonian{
        [cfg](const std::vector<double>& x, const std::vector<double>& p) {
            return toda_H1(LatticeState{x, p}, cfg);
        },
        [cfg](const std::vector<double>& x, const std::vector<double>& p,
              std::vector<double>& gx, std::vector<double>& gp) {
            toda_grad_H1(cfg, x, p, gx, gp);
        }});
    sys.h.push_back(Hamiltonian{
        [cfg](const std::vector<double>& x, const std::vector<double>& p) {
            return toda_H2(LatticeState{x, p}, cfg);
        },
        [cfg](const std::vector<double>& x, const std::vector<double>& p,
              std::vector<double>& gx, std::vector<double>& gp) {
            toda_grad_H2(cfg, x, p, gx, gp);
        }});
    return sys;
}

Hamiltonian make_fd_hamiltonian(
    std::function<double(const std::vector<double>&, const std::vector<double>&)> value,
    double h_fd) {
    if (!(h_fd > 0)) throw std::invalid_argument("h_fd must be > 0");
    Hamiltonian h;
    h.value = value;
    h.gradient = [value, h_fd](const std::vector<double>& x, const std::vector<double>& p,
                               std::vector<double>& gx, std::vector<double>& gp) {
        const int n = static_cast<int>(x.size());
        gx.assign(n, 0.0);
        gp.assign(n, 0.0);
        std::vector<double> xs = x, ps = p;
        for (int i = 0; i < n; ++i) {
            xs[i] = x[i] + h_fd;
            const double fp = value(xs, p);
            xs[i] = x[i] - h_fd;
            const double fm = value(xs, p);
            xs[i] = x[i];
            gx[i] = (fp - fm) / (2 * h_fd);

            ps[i] = p[i] + h_fd;
            const double gp_p = value(x, ps);
            ps[i] = p[i] - h_fd;
            const double gp_m = value(x, ps);
            ps[i] = p[i];
            gp[i] = (gp_p - gp_m) / (2 * h_fd);
        }
    };
    return h;
}

// -- flows ---------------------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> hamiltonian_vector_field(
    const HamiltonianSystem& sys, int alpha, const LatticeState& s) {
    check_alpha(alpha, sys.times());
    std::vector<double> gx, gp;
    sys.h[alpha - 1].gradient(s.x, s.p, gx, gp);
    for (double& g : gx) g = -g;
    return {std::move(gp), std::move(gx)};  // (dx, dp) = (dH/dp, -dH/dx)
}

FlowResult flow(const HamiltonianSystem& sys, int alpha, const LatticeState& s, double t,
                double step) {
    check_alpha(alpha, sys.times());
    if (!(step > 0)) throw std::invalid_argument("step must be > 0");
    if (t == 0.0) return FlowResult{s, 0, 0.0};

    const int nsteps = static_cast<int>(std::ceil(std::abs(t) / step));
    const double h = t / nsteps;
    const auto& ham = sys.h[alpha - 1];
    const int n = s.n();

    std::vector<double> x = s.x, p = s.p;
    std::vector<double> gx, gp;
    std::vector<double> kx1(n), kp1(n), kx2(n), kp2(n), kx3(n), kp3(n), kx4(n), kp4(n);
    std::vector<double> xt(n), pt(n);

    auto eval = [&](const std::vector<double>& xx, const std::vector<double>& pp,
                    std::vector<double>& kx, std::vector<double>& kp) {
        ham.gradient(xx, pp, gx, gp);
        for (int i = 0; i < n; ++i) {
            kx[i] = gp[i];
            kp[i] = -gx[i];
        }
    };

    for (int sstep = 1; sstep <= nsteps; ++sstep) {
        eval(x, p, kx1, kp1);
        for (int i = 0; i < n; ++i) {
            xt[i] = x[i] + 0.5 * h * kx1[i];
            pt[i] = p[i] + 0.5 * h * kp1[i];
        }
        eval(xt, pt, kx2, kp2);
        for (int i = 0; i < n; ++i) {
            xt[i] = x[i] + 0.5 * h * kx2[i];
            pt[i] = p[i] + 0.5 * h * kp2[i];
        }
        eval(xt, pt, kx3, kp3);
        for (int i = 0; i < n; ++i) {
            xt[i] = x[i] + h * kx3[i];
            pt[i] = p[i] + h * kp3[i];
        }
        eval(xt, pt, kx4, kp4);
        for (int i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (kx1[i] + 2 * kx2[i] + 2 * kx3[i] + kx4[i]);
            p[i] += h / 6.0 * (kp1[i] + 2 * kp2[i] + 2 * kp3[i] + kp4[i]);
        }
        if (!all_finite(x) || !all_finite(p)) throw FlowDivergedError(sstep, nsteps);
    }
    return FlowResult{LatticeState{std::move(x), std::move(p)}, nsteps, h};
}

double flow_commutator_defect(const HamiltonianSystem& sys, int alpha, int beta,
                              const LatticeState& s, double t_a, double t_b, double step) {
    if (alpha == beta) throw std::invalid_argument("flow_commutator_defect needs alpha != beta");
    const LatticeState ab = flow(sys, beta, flow(sys, alpha, s, t_a, step).final, t_b, step).final;
    const LatticeState ba = flow(sys, alpha, flow(sys, beta, s, t_b, step).final, t_a, step).final;
    double d = 0;
    for (int i = 0; i < s.n(); ++i) {
        d = std::max(d, std::abs(ab.x[i] - ba.x[i]));
        d = std::max(d, std::abs(ab.p[i] - ba.p[i]));
    }
    return d;
}

double poisson_bracket(const HamiltonianSystem& sys, int alpha, int beta,
                       const LatticeState& s) {
    check_alpha(alpha, sys.times());
    check_alpha(beta, sys.times());
    std::vector<double> ax, ap, bx, bp;
    sys.h[alpha - 1].gradient(s.x, s.p, ax, ap);
    sys.h[beta - 1].gradient(s.x, s.p, bx, bp);
    double sum = 0;
    for (int i = 0; i < s.n(); ++i) sum += ax[i] * bp[i] - ap[i] * bx[i];
    return sum;
}

LatticeState evaluate_multitime(const HamiltonianSystem& sys, const LatticeState& s0,
                                const std::vector<double>& t, double step) {
    if (static_cast<int>(t.size()) != sys.times())
        throw std::invalid_argument("multi-time point dimension != number of Hamiltonians");
    LatticeState s = s0;
    for (int alpha = 1; alpha <= sys.times(); ++alpha)
        if (t[alpha - 1] != 0.0) s = flow(sys, alpha, s, t[alpha - 1], step).final;
    return s;
}

Jet solution_jet(const HamiltonianSystem& sys, const LatticeState& s0,
                 const std::vector<double>& t, double step) {
    const LatticeState s = evaluate_multitime(sys, s0, t, step);
    Jet j;
    j.x = s.x;
    j.v.resize(sys.times());
    for (int alpha = 1; alpha <= sys.times(); ++alpha)
        j.v[alpha - 1] = hamiltonian_vector_field(sys, alpha, s).first;
    return j;
}

// -- 1-forms -------------------------------------------------------------------

double OneForm::component(int alpha, const Jet& j) const {
    check_alpha(alpha, m);
    return components[alpha - 1](j);
}

std::vector<double> OneForm::d_dx(int alpha, const Jet& j) const {
    check_alpha(alpha, m);
    if (dx) return dx(alpha, j);
    Jet jj = j;
    const int n = static_cast<int>(j.x.size());
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        jj.x[i] = j.x[i] + h_fd;
        const double fp = components[alpha - 1](jj);
        jj.x[i] = j.x[i] - h_fd;
        const double fm = components[alpha - 1](jj);
        jj.x[i] = j.x[i];
        g[i] = (fp - fm) / (2 * h_fd);
    }
    return g;
}

std::vector<double> OneForm::d_dv(int alpha, int beta, const Jet& j) const {
    check_alpha(alpha, m);
    check_alpha(beta, m);
    if (dv) return dv(alpha, beta, j);
    Jet jj = j;
    const int n = static_cast<int>(j.x.size());
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        jj.v[beta - 1][i] = j.v[beta - 1][i] + h_fd;
        const double fp = components[alpha - 1](jj);
        jj.v[beta - 1][i] = j.v[beta - 1][i] - h_fd;
        const double fm = components[alpha - 1](jj);
        jj.v[beta - 1][i] = j.v[beta - 1][i];
        g[i] = (fp - fm) / (2 * h_fd);
    }
    return g;
}

OneForm toda_one_form(const TodaConfig& cfg) {
    cfg.validate();
    OneForm form;
    form.m = 2;
    form.components = {[cfg](const Jet& j) { return toda_L1(to_jet2(j), cfg); },
                       [cfg](const Jet& j) { return toda_L2(to_jet2(j), cfg); }};
    form.dx = [cfg](int alpha, const Jet& j) {
        const int n = cfg.n;
        std::vector<double> g(n);
        for (int k = 1; k <= n; ++k) {
            const double gr = gap_exp(j.x, k, cfg);
            const double gl = gap_exp(j.x, k - 1, cfg);
            if (alpha == 1) {
                g[k - 1] = gr - gl;
            } else {
                double d = 0;
                if (gr != 0.0) d += gr * (j.v[0][k - 1] + j.v[0][wrap(k, n)]);
                if (gl != 0.0) d -= gl * (j.v[0][wrap(k - 2, n)] + j.v[0][k - 1]);
                g[k - 1] = d;
            }
        }
        return g;
    };
    form.dv = [cfg](int alpha, int beta, const Jet& j) {
        const int n = cfg.n;
        std::vector<double> g(n, 0.0);
        for (int k = 1; k <= n; ++k) {
            const double v1 = j.v[0][k - 1];
            if (alpha == 1 && beta == 1) g[k - 1] = v1;
            if (alpha == 2 && beta == 2) g[k - 1] = v1;
            if (alpha == 2 && beta == 1)
                g[k - 1] = j.v[1][k - 1] - v1 * v1 - gap_exp(j.x, k, cfg) -
                           gap_exp(j.x, k - 1, cfg);
        }
        return g;
    };
    return form;
}

OneForm construct_one_form(
    const HamiltonianSystem& sys,
    std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>
        legendre_inverse_1) {
    OneForm form;
    form.m = sys.times();
    for (int alpha = 1; alpha <= sys.times(); ++alpha) {
        const Hamiltonian& ham = sys.h[alpha - 1];
        form.components.push_back([ham, legendre_inverse_1, alpha](const Jet& j) {
            const std::vector<double> p = legendre_inverse_1(j.x, j.v[0]);
            double pairing = 0;
            for (size_t i = 0; i < p.size(); ++i) pairing += p[i] * j.v[alpha - 1][i];
            return pairing - ham.value(j.x, p);
        });
    }
    return form;
}

// -- action & closure ------------------------------------------------------------

double action_along_path(const OneForm& form, const HamiltonianSystem& sys,
                         const LatticeState& s0, const PolylinePath& path, double step) {
    path.validate();
    const int m = form.m;
    if (path.times() != m || sys.times() != m)
        throw std::invalid_argument("path, 1-form and system must share the same m");

    const GlTable table = gl_table(path.quad_points_per_segment);
    double total = 0;
    for (size_t seg = 0; seg + 1 < path.vertices.size(); ++seg) {
        const auto& a = path.vertices[seg];
        const auto& b = path.vertices[seg + 1];
        std::vector<double> delta(m), t(m);
        for (int i = 0; i < m; ++i) delta[i] = b[i] - a[i];
        for (int q = 0; q < path.quad_points_per_segment; ++q) {
            for (int i = 0; i < m; ++i) t[i] = a[i] + table.nodes[q] * delta[i];
            const Jet j = solution_jet(sys, s0, t, step);
            double integrand = 0;
            for (int alpha = 1; alpha <= m; ++alpha)
                if (delta[alpha - 1] != 0.0)
                    integrand += form.component(alpha, j) * delta[alpha - 1];
            total += table.weights[q] * integrand;
        }
    }
    return total;
}

double closure_defect_pointwise(const OneForm& form, const HamiltonianSystem& sys,
                                const LatticeState& s0, const std::vector<double>& t,
                                int alpha, int beta, double h_fd, double step) {
    if (alpha == beta) throw std::invalid_argument("closure defect needs alpha != beta");
    check_alpha(alpha, form.m);
    check_alpha(beta, form.m);
    if (!(h_fd > 0)) throw std::invalid_argument("h_fd must be > 0");

    auto L_at = [&](int gamma, int dir, double offset) {
        std::vector<double> tt = t;
        tt[dir - 1] += offset;
        return form.component(gamma, solution_jet(sys, s0, tt, step));
    };
    const double dLbeta_dta = (L_at(beta, alpha, h_fd) - L_at(beta, alpha, -h_fd)) / (2 * h_fd);
    const double dLalpha_dtb = (L_at(alpha, beta, h_fd) - L_at(alpha, beta, -h_fd)) / (2 * h_fd);
    return dLbeta_dta - dLalpha_dtb;
}

}  // namespace toda
