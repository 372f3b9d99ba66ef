"""Smoke tests for the pybind11 module."""

import json
import math

import pytest

tm = pytest.importorskip("toda_multitime")


@pytest.fixture
def open4():
    return tm.TodaConfig(4, tm.Boundary.OpenEnd)


def test_version():
    assert tm.__version__


def test_hamiltonians_on_known_states():
    per2 = tm.TodaConfig(2, tm.Boundary.Periodic)
    s = tm.LatticeState([0.0, 0.0], [1.0, -1.0])
    assert tm.toda_H1(s, per2) == pytest.approx(3.0)
    assert tm.toda_H2(s, per2) == pytest.approx(0.0)


def test_lagrangian_components():
    open1 = tm.TodaConfig(1)
    jet = tm.Jet2([0.0], [1.0], [1.0])
    assert tm.toda_L1(jet, open1) == pytest.approx(0.5)
    assert tm.toda_L2(jet, open1) == pytest.approx(2.0 / 3.0)
    offdiag, diag = tm.el_algebraic_residuals(jet, open1)
    assert offdiag == [0.0]
    assert diag == [0.0]


def test_flow_free_particle():
    open1 = tm.TodaConfig(1)
    final = tm.flow(open1, 1, tm.LatticeState([0.0], [1.0]), 1.0)
    assert final.x[0] == pytest.approx(1.0)
    assert final.p[0] == pytest.approx(1.0)
    multi = tm.evaluate_multitime(open1, tm.LatticeState([0.0], [1.0]), [1.0, 2.0])
    assert multi.x[0] == pytest.approx(3.0)


def test_poisson_bracket_vanishes(open4):
    s = tm.sample_state(3, open4)
    assert abs(tm.poisson_bracket(open4, s)) <= 1e-12


def test_backlund_round_trip(open4):
    lam = tm.BtParam(0.3)
    s = tm.sample_state(5, open4)
    step = tm.bt_forward(s, lam, open4)
    assert step.branch_note == "continued-fraction"
    back = tm.bt_inverse(step.next, lam, open4)
    assert back.next.x == pytest.approx(s.x, abs=1e-10)
    assert back.next.p == pytest.approx(s.p, abs=1e-10)

    r_p, r_pt = tm.discrete_el_residual(s, step, lam, open4)
    assert max(abs(v) for v in r_p + r_pt) <= 1e-12


def test_commutativity_and_closure(open4):
    lam, mu = tm.BtParam(0.3), tm.BtParam(0.7)
    s = tm.sample_state(7, open4)
    assert tm.commutation_defect(s, lam, mu, open4) <= 1e-10
    ell, ell_reduced = tm.closure_constant(s, lam, mu, open4)
    assert abs(ell) <= 1e-10
    assert ell == pytest.approx(ell_reduced, abs=1e-10)


def test_branch_error_is_catchable():
    cfg = tm.TodaConfig(1)
    with pytest.raises(tm.BacklundError):
        tm.bt_forward(tm.LatticeState([0.0], [-2.0]), tm.BtParam(1.0), cfg)


def test_zero_curvature_and_monodromy():
    per3 = tm.TodaConfig(3, tm.Boundary.Periodic)
    s = tm.sample_state(9, per3)
    assert tm.zero_curvature_defect(s, tm.BtParam(0.3), 0.9, per3) <= 1e-10
    t = tm.monodromy(s, 0.9)
    assert t.det() == pytest.approx(1.0, abs=1e-12)
    stepped = tm.bt_forward(s, tm.BtParam(0.3), per3).next
    assert tm.monodromy(stepped, 0.9).trace() == pytest.approx(t.trace(), abs=1e-8)


def test_product_identity(open4):
    s = tm.sample_state(11, open4)
    assert tm.product_identity_defect(s, tm.BtParam(0.3), open4) <= 1e-10


def test_action_along_path():
    open1 = tm.TodaConfig(1)
    s = tm.LatticeState([0.0], [1.0])
    value = tm.action_along_path(open1, s, [[0, 0], [1, 0], [1, 1]])
    assert value == pytest.approx(7.0 / 6.0, abs=1e-10)


def test_run_verify_json():
    report_text, ok = tm.run_verify_json(json.dumps({"n": 2}))
    assert ok
    report = json.loads(report_text)
    assert report["status"] == "pass"
    assert len(report["checks"]) == 11
    assert all(c["pass"] for c in report["checks"])


def test_gap_exp_boundary():
    cfg = tm.TodaConfig(2)
    assert tm.gap_exp([0.0, math.log(2.0)], 1, cfg) == pytest.approx(2.0)
    assert tm.gap_exp([0.0, math.log(2.0)], 2, cfg) == 0.0
