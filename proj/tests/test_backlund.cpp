#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "test_support.hpp"
#include "toda/backlund.hpp"
#include "toda/continuous.hpp"

using namespace toda;
using testsup::random_state;

namespace {

// Independent oracle for the periodic layer equations: Gauss-Seidel sweeps of
// the truncated continued-fraction recurrence until the cycle stabilises.
// Converges linearly for small lambda, no Jacobian involved.
std::vector<double> fixed_point_layer(const LatticeState& s, double lambda,
                                      const TodaConfig& cfg) {
    const int n = cfg.n;
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) g[k] = 1 + lambda * s.p[k];
    for (int sweep = 0; sweep < 20000; ++sweep) {
        double change = 0;
        for (int k = 0; k < n; ++k) {
            const int prev = (k + n - 1) % n;
            const double next = 1 + lambda * s.p[k] -
                                lambda * lambda * std::exp(s.x[k] - s.x[prev]) / g[prev];
            change = std::max(change, std::abs(next - g[k]));
            g[k] = next;
        }
        if (change < 1e-15) break;
    }
    std::vector<double> xt(n);
    for (int k = 0; k < n; ++k) xt[k] = s.x[k] + std::log(g[k]);
    return xt;
}

double residual_bt1(const LatticeState& s, const std::vector<double>& xt, double lambda,
                    const TodaConfig& cfg) {
    // max_k | p_k - (1/l)(e^{x~_k - x_k} - 1) - l e^{x_k - x~_{k-1}} |
    double worst = 0;
    for (int k = 1; k <= cfg.n; ++k) {
        double rhs = (std::exp(xt[k - 1] - s.x[k - 1]) - 1) / lambda;
        if (cfg.boundary == Boundary::Periodic) {
            const int prev = (k - 2 + cfg.n) % cfg.n;
            rhs += lambda * std::exp(s.x[k - 1] - xt[prev]);
        } else if (k > 1) {
            rhs += lambda * std::exp(s.x[k - 1] - xt[k - 2]);
        }
        worst = std::max(worst, std::abs(s.p[k - 1] - rhs));
    }
    return worst;
}

}  // namespace

TEST_CASE("bt_forward open-end closed forms") {
    SUBCASE("N=1, lambda=1") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        const BtStepResult r = bt_forward({{0}, {1}}, BtParam(1.0), cfg);
        CHECK(r.next.x[0] == doctest::Approx(std::log(2.0)));
        CHECK(r.next.p[0] == doctest::Approx(1.0));
        CHECK(r.branch_note == "continued-fraction");
    }
    SUBCASE("N=2, lambda=0.5, recurrence unrolled by hand") {
        const TodaConfig cfg{2, Boundary::OpenEnd};
        const BtStepResult r = bt_forward({{0, 0}, {0, 0}}, BtParam(0.5), cfg);
        CHECK(r.next.x[0] == doctest::Approx(0.0));
        CHECK(r.next.x[1] == doctest::Approx(std::log(0.75)));
        // p~_1 = 2(e^{x~_1} - 1) + 0.5 e^{0 - x~_1} = 0.5, p~_2 = 2(0.75 - 1) = -0.5
        CHECK(r.next.p[0] == doctest::Approx(0.5));
        CHECK(r.next.p[1] == doctest::Approx(-0.5));
    }
}

TEST_CASE("bt_forward periodic agrees with the fixed-point oracle") {
    const TodaConfig cfg{3, Boundary::Periodic};
    const double lambda = 0.2;
    for (int trial = 0; trial < 10; ++trial) {
        const LatticeState s = random_state(400 + trial, 3);
        const BtStepResult r = bt_forward(s, BtParam(lambda), cfg);
        CHECK(residual_bt1(s, r.next.x, lambda, cfg) <= cfg.tol_newton);
        const std::vector<double> oracle = fixed_point_layer(s, lambda, cfg);
        for (int i = 0; i < 3; ++i) CHECK(r.next.x[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
        CHECK(r.branch_note.substr(0, 6) == "newton");
    }
}

TEST_CASE("bt_forward branch failure reports the failing site") {
    const TodaConfig cfg{2, Boundary::OpenEnd};
    // 1 + lambda p_1 < 0 kills g_1
    CHECK_THROWS_AS(bt_forward({{0, 0}, {-2, 0}}, BtParam(1.0), cfg), NonPositiveBranchError);
    try {
        bt_forward({{0, 0}, {-2, 0}}, BtParam(1.0), cfg);
    } catch (const NonPositiveBranchError& e) {
        CHECK(e.index == 1);
        CHECK(e.value == doctest::Approx(-1.0));
    }
}

TEST_CASE("bt_forward periodic Newton failure is reported") {
    TodaConfig cfg{3, Boundary::Periodic};
    cfg.tol_newton = 1e-16;  // unreachable with one iteration
    cfg.max_newton_iters = 1;
    const LatticeState s = random_state(61, 3);
    CHECK_THROWS_AS(bt_forward(s, BtParam(0.4), cfg), NewtonDivergedError);
}

TEST_CASE("bt_inverse undoes bt_forward") {
    SUBCASE("open-end") {
        const TodaConfig cfg{6, Boundary::OpenEnd};
        const LatticeState s = random_state(62, 6);
        const BtParam lam(0.3);
        const BtStepResult f = bt_forward(s, lam, cfg);
        const BtStepResult b = bt_inverse(f.next, lam, cfg);
        for (int i = 0; i < 6; ++i) {
            CHECK(std::abs(b.next.x[i] - s.x[i]) <= 1e-10);
            CHECK(std::abs(b.next.p[i] - s.p[i]) <= 1e-10);
        }
    }
    SUBCASE("periodic") {
        const TodaConfig cfg{4, Boundary::Periodic};
        const LatticeState s = random_state(63, 4);
        const BtParam lam(0.25);
        const BtStepResult f = bt_forward(s, lam, cfg);
        const BtStepResult b = bt_inverse(f.next, lam, cfg);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(b.next.x[i] - s.x[i]) <= 10 * cfg.tol_newton);
            CHECK(std::abs(b.next.p[i] - s.p[i]) <= 10 * cfg.tol_newton);
        }
    }
    SUBCASE("forward after inverse is also the identity") {
        const TodaConfig cfg{5, Boundary::OpenEnd};
        const LatticeState s = random_state(64, 5);
        const BtParam lam(-0.35);  // negative parameters are legal
        const BtStepResult b = bt_inverse(s, lam, cfg);
        const BtStepResult f = bt_forward(b.next, lam, cfg);
        for (int i = 0; i < 5; ++i) {
            CHECK(std::abs(f.next.x[i] - s.x[i]) <= 1e-10);
            CHECK(std::abs(f.next.p[i] - s.p[i]) <= 1e-10);
        }
    }
}

TEST_CASE("bt_lagrangian") {
    SUBCASE("N=1 closed form") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        CHECK(bt_lagrangian({0}, {std::log(2.0)}, BtParam(1.0), cfg) ==
              doctest::Approx(1 - std::log(2.0)));
    }
    SUBCASE("identity layer has zero Lagrangian under open ends") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        for (double l : {0.3, -0.8, 2.0})
            CHECK(bt_lagrangian({0.4}, {0.4}, BtParam(l), cfg) == doctest::Approx(0.0));
    }
    SUBCASE("random pairs match the term-by-term oracle") {
        for (auto boundary : {Boundary::OpenEnd, Boundary::Periodic}) {
            const TodaConfig cfg{5, boundary};
            std::mt19937_64 rng(65);
            for (int trial = 0; trial < 20; ++trial) {
                const auto x = testsup::uniform_vec(rng, 5);
                const auto xt = testsup::uniform_vec(rng, 5);
                const double l = 0.1 + testsup::unit_from(rng);
                CHECK(bt_lagrangian(x, xt, BtParam(l), cfg) ==
                      doctest::Approx(
                          testsup::oracle_bt_lagrangian(x, xt, l, boundary == Boundary::Periodic))
                          .epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("discrete_el_residual vanishes on consistent steps") {
    for (auto boundary : {Boundary::OpenEnd, Boundary::Periodic}) {
        const TodaConfig cfg{4, boundary};
        const LatticeState s = random_state(66, 4);
        const BtParam lam(0.3);
        const BtStepResult r = bt_forward(s, lam, cfg);
        const DiscreteElResiduals res = discrete_el_residual(s, r, lam, cfg);
        const double slack = boundary == Boundary::OpenEnd ? 1e-12 : 10 * cfg.tol_newton;
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(res.r_p[i]) <= slack);
            CHECK(std::abs(res.r_ptilde[i]) <= slack);
        }
    }
}

TEST_CASE("edge Lagrangian partials match central differences") {
    const TodaConfig cfg{4, Boundary::Periodic};
    std::mt19937_64 rng(67);
    const auto x = testsup::uniform_vec(rng, 4);
    const auto xt = testsup::uniform_vec(rng, 4);
    const BtParam lam(0.45);
    const double h = 1e-5;

    const auto dx = bt_lagrangian_dx(x, xt, lam, cfg);
    const auto dxt = bt_lagrangian_dxt(x, xt, lam, cfg);
    for (int i = 0; i < 4; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd =
            (bt_lagrangian(xp, xt, lam, cfg) - bt_lagrangian(xm, xt, lam, cfg)) / (2 * h);
        CHECK(std::abs(dx[i] - fd) / std::max(1.0, std::abs(dx[i])) <= 1e-6);

        auto tp = xt, tm = xt;
        tp[i] += h;
        tm[i] -= h;
        const double fdt =
            (bt_lagrangian(x, tp, lam, cfg) - bt_lagrangian(x, tm, lam, cfg)) / (2 * h);
        CHECK(std::abs(dxt[i] - fdt) / std::max(1.0, std::abs(dxt[i])) <= 1e-6);
    }
}

TEST_CASE("N=1 open-end momentum relation in closed form") {
    const TodaConfig cfg{1, Boundary::OpenEnd};
    const double p = 0.7, lambda = 0.6;
    const std::vector<double> x{0.2};
    const std::vector<double> xt{0.2 + std::log(1 + lambda * p)};
    // dLambda/dx_1 = -(1/l)(e^{x~-x} - 1), so p + dLambda/dx vanishes on the layer
    const auto dx = bt_lagrangian_dx(x, xt, BtParam(lambda), cfg);
    CHECK(dx[0] == doctest::Approx(-(1 / lambda) * (std::exp(xt[0] - x[0]) - 1)));
    CHECK(p + dx[0] == doctest::Approx(0.0));
}

TEST_CASE("commutation_defect") {
    SUBCASE("N=1 open-end commutes to machine precision") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        CHECK(commutation_defect({{0.2}, {0.9}}, BtParam(0.5), BtParam(1.5), cfg) <= 1e-14);
    }
    SUBCASE("N=5 open-end") {
        const TodaConfig cfg{5, Boundary::OpenEnd};
        const LatticeState s = testsup::spread_state(68, 5);
        CHECK(commutation_defect(s, BtParam(0.3), BtParam(0.7), cfg) <= 1e-10);
    }
    SUBCASE("N=3 periodic within Newton tolerance") {
        const TodaConfig cfg{3, Boundary::Periodic};
        const LatticeState s = random_state(69, 3);
        CHECK(commutation_defect(s, BtParam(0.2), BtParam(0.35), cfg) <= 10 * cfg.tol_newton);
    }
    SUBCASE("branch failures carry the composition order") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        try {
            commutation_defect({{0}, {-2}}, BtParam(1.0), BtParam(0.5), cfg);
            CHECK(false);
        } catch (const NonPositiveBranchError& e) {
            CHECK(std::string(e.what()).find("order") != std::string::npos);
        }
    }
}

TEST_CASE("superposition_residuals") {
    const BtParam lam(0.3), mu(0.7);

    SUBCASE("quadruples generated by the maps satisfy the formula") {
        for (auto boundary : {Boundary::OpenEnd, Boundary::Periodic}) {
            const TodaConfig cfg{4, boundary};
            const bool open = boundary == Boundary::OpenEnd;
            // a flat periodic lattice has no real branch at mu = 0.7, so the
            // periodic case runs with smaller parameters
            const BtParam a = open ? lam : BtParam(0.2);
            const BtParam b = open ? mu : BtParam(0.35);
            const LatticeState s = open ? testsup::spread_state(70, 4) : random_state(70, 4);
            const LatticeState st = bt_forward(s, a, cfg).next;
            const LatticeState sh = bt_forward(s, b, cfg).next;
            const LatticeState sht = bt_forward(st, b, cfg).next;
            const auto res = superposition_residuals(s.x, st.x, sh.x, sht.x, a, b, cfg);
            CHECK(res.size() == (open ? 5u : 4u));
            for (double v : res) CHECK(std::abs(v) <= 1e-10);
        }
    }
    SUBCASE("equal parameters make the boundary counterparts degenerate") {
        const TodaConfig cfg{2, Boundary::OpenEnd};
        const LatticeState s = random_state(71, 2);
        const LatticeState st = bt_forward(s, lam, cfg).next;
        const LatticeState sht = bt_forward(st, lam, cfg).next;
        CHECK_THROWS_AS(superposition_residuals(s.x, st.x, st.x, sht.x, lam, lam, cfg),
                        ZeroDenominatorError);
    }
    SUBCASE("an inconsistent quadruple does not satisfy the formula") {
        const TodaConfig cfg{3, Boundary::Periodic};
        std::mt19937_64 rng(72);
        const auto x = testsup::uniform_vec(rng, 3);
        const auto xt = testsup::uniform_vec(rng, 3);
        const auto xh = testsup::uniform_vec(rng, 3);
        const auto xht = testsup::uniform_vec(rng, 3);
        const auto res = superposition_residuals(x, xt, xh, xht, lam, mu, cfg);
        double worst = 0;
        for (double v : res) worst = std::max(worst, std::abs(v));
        CHECK(worst > 1e-3);
    }
}

TEST_CASE("closure_constant") {
    SUBCASE("open-end: the 1-form is closed and both routes agree") {
        const TodaConfig cfg{4, Boundary::OpenEnd};
        const LatticeState s = testsup::spread_state(73, 4);
        const ClosureConstant c = closure_constant(s, BtParam(0.3), BtParam(0.7), cfg);
        CHECK(std::abs(c.ell) <= 1e-10);
        CHECK(std::abs(c.ell - c.ell_reduced) <= 1e-10);
    }
    SUBCASE("equal parameters cancel exactly") {
        const TodaConfig cfg{3, Boundary::OpenEnd};
        const LatticeState s = random_state(74, 3);
        const ClosureConstant c = closure_constant(s, BtParam(0.4), BtParam(0.4), cfg);
        CHECK(c.ell == 0.0);
        CHECK(c.ell_reduced == 0.0);
    }
    SUBCASE("periodic within Newton tolerance") {
        const TodaConfig cfg{3, Boundary::Periodic};
        const LatticeState s = random_state(75, 3);
        const ClosureConstant c = closure_constant(s, BtParam(0.2), BtParam(0.3), cfg);
        CHECK(std::abs(c.ell) <= 10 * cfg.tol_newton);
    }
    SUBCASE("antisymmetry in the parameters") {
        const TodaConfig cfg{4, Boundary::OpenEnd};
        const LatticeState s = testsup::spread_state(76, 4);
        const ClosureConstant ab = closure_constant(s, BtParam(0.25), BtParam(0.65), cfg);
        const ClosureConstant ba = closure_constant(s, BtParam(0.65), BtParam(0.25), cfg);
        CHECK(std::abs(ab.ell + ba.ell) <= 1e-12);
    }
}

TEST_CASE("spectrality_integral") {
    SUBCASE("N=1 closed form") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        const SpectralityIntegral si =
            spectrality_integral({0}, {std::log(2.0)}, {1}, BtParam(1.0), cfg);
        CHECK(si.direct == doctest::Approx(-1 + std::log(2.0)));
        CHECK(si.reduced == doctest::Approx(-1 + std::log(2.0)));
    }
    SUBCASE("conserved by a commuting map") {
        const TodaConfig cfg{4, Boundary::OpenEnd};
        const BtParam lam(0.3), mu(0.7);
        const LatticeState s = testsup::spread_state(77, 4);
        auto integral_at = [&](const LatticeState& state) {
            const BtStepResult step = bt_forward(state, lam, cfg);
            return spectrality_integral(state.x, step.next.x, state.p, lam, cfg);
        };
        const SpectralityIntegral before = integral_at(s);
        const SpectralityIntegral after = integral_at(bt_forward(s, mu, cfg).next);
        CHECK(std::abs(before.direct - after.direct) <= 1e-10);
        CHECK(std::abs(before.direct - before.reduced) <= 1e-12);
        CHECK(std::abs(after.direct - after.reduced) <= 1e-12);
    }
    SUBCASE("direct form matches a finite difference in lambda") {
        const TodaConfig cfg{3, Boundary::Periodic};
        std::mt19937_64 rng(78);
        const auto x = testsup::uniform_vec(rng, 3);
        const auto xt = testsup::uniform_vec(rng, 3);
        const double l = 0.55, h = 1e-5;
        const double direct = bt_lagrangian_dlambda(x, xt, BtParam(l), cfg);
        const double fd = (bt_lagrangian(x, xt, BtParam(l + h), cfg) -
                           bt_lagrangian(x, xt, BtParam(l - h), cfg)) /
                          (2 * h);
        CHECK(std::abs(direct - fd) / std::max(1.0, std::abs(direct)) <= 1e-6);
    }
}

TEST_CASE("symplecticity_defect") {
    SUBCASE("N=1 shear map") {
        const TodaConfig cfg{1, Boundary::OpenEnd};
        CHECK(symplecticity_defect({{0.1}, {0.4}}, BtParam(0.8), cfg, 1e-5) <= 1e-8);
    }
    SUBCASE("N=4 open-end random state") {
        const TodaConfig cfg{4, Boundary::OpenEnd};
        const LatticeState s = random_state(79, 4);
        CHECK(symplecticity_defect(s, BtParam(0.3), cfg, 1e-5) <= 1e-6);
    }
    SUBCASE("a broken map is loudly non-symplectic") {
        const TodaConfig cfg{2, Boundary::OpenEnd};
        const BtParam lam(0.3);
        auto broken = [&](const LatticeState& z) {
            LatticeState out = bt_forward(z, lam, cfg).next;
            for (double& v : out.p) v *= 2;
            return out;
        };
        CHECK(symplecticity_defect_of_map(broken, random_state(80, 2), 1e-5) > 0.1);
    }
}

TEST_CASE("path_action_discrete") {
    const TodaConfig cfg{4, Boundary::OpenEnd};
    const LatticeState s0 = testsup::spread_state(81, 4);
    const std::vector<BtParam> params{BtParam(0.3), BtParam(0.7)};

    SUBCASE("two edge orders agree") {
        const double a12 = path_action_discrete(s0, {{{1, 1}, {2, 1}}}, params, cfg);
        const double a21 = path_action_discrete(s0, {{{2, 1}, {1, 1}}}, params, cfg);
        CHECK(std::abs(a12 - a21) <= 1e-10);
    }
    SUBCASE("an edge and its reversal cancel") {
        CHECK(std::abs(path_action_discrete(s0, {{{1, 1}, {1, -1}}}, params, cfg)) <= 1e-12);
    }
    SUBCASE("a single edge is the edge Lagrangian") {
        const BtStepResult r = bt_forward(s0, params[0], cfg);
        CHECK(path_action_discrete(s0, {{{1, 1}}}, params, cfg) ==
              doctest::Approx(bt_lagrangian(s0.x, r.next.x, params[0], cfg)));
    }
    SUBCASE("a longer loop closes") {
        const DiscretePath loop{{{1, 1}, {2, 1}, {1, -1}, {2, -1}}};
        CHECK(std::abs(path_action_discrete(s0, loop, params, cfg)) <= 1e-10);
    }
    SUBCASE("bad paths are rejected") {
        CHECK_THROWS_AS(path_action_discrete(s0, {{}}, params, cfg), std::invalid_argument);
        CHECK_THROWS_AS(path_action_discrete(s0, {{{3, 1}}}, params, cfg),
                        std::invalid_argument);
        CHECK_THROWS_AS(path_action_discrete(s0, {{{1, 2}}}, params, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("the map conserves both Hamiltonians") {
    const TodaConfig cfg{8, Boundary::OpenEnd};
    const LatticeState s = random_state(82, 8);
    const BtParam lam(0.3);
    const LatticeState mapped = bt_forward(s, lam, cfg).next;
    CHECK(std::abs(toda_H1(mapped, cfg) - toda_H1(s, cfg)) <= 1e-10);
    CHECK(std::abs(toda_H2(mapped, cfg) - toda_H2(s, cfg)) <= 1e-10);
}

TEST_CASE("small-lambda limit interpolates the first flow") {
    const TodaConfig cfg{4, Boundary::OpenEnd};
    const LatticeState s = random_state(83, 4);
    auto worst = [&](double lambda) {
        const BtStepResult r = bt_forward(s, BtParam(lambda), cfg);
        double w = 0;
        for (int i = 0; i < 4; ++i)
            w = std::max(w, std::abs((r.next.x[i] - s.x[i]) / lambda - s.p[i]));
        return w;
    };
    const double w2 = worst(1e-2);
    const double w3 = worst(1e-3);
    CHECK(w2 <= 0.05);
    CHECK(w3 <= 0.005);
    CHECK(w2 / w3 > 5.0);   // first-order in lambda
    CHECK(w2 / w3 < 20.0);
}

TEST_CASE("BtParam rejects zero and non-finite parameters") {
    CHECK_THROWS_AS(BtParam(0.0), std::invalid_argument);
    CHECK_THROWS_AS(BtParam(std::nan("")), std::invalid_argument);
    CHECK_NOTHROW(BtParam(-0.5));
}
