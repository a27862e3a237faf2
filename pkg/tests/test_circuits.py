import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from couplerlab.circuits import (LeftHandedDesign, RightHandedDesign, lh_analyze, lh_decoupling_l2, lh_locus_scan,
                                 lh_matrices, normal_modes, quantize_pm, rh_analyze, rh_matrices)

pytestmark = pytest.mark.filterwarnings("ignore:extra coupler-node mode dropped")


def _f(l_nh, c_ff):
    return 1 / (2 * np.pi * np.sqrt(l_nh * 1e-9 * c_ff * 1e-15)) / 1e9


def test_normal_modes_diagonal():
    nm = normal_modes(np.diag([30.0, 60.0]), np.diag([1 / 30.0, 1 / 20.0]))
    np.testing.assert_allclose(nm.freqs, sorted([_f(30, 30), _f(20, 60)]), rtol=1e-12)
    # modes come out in ascending frequency, so A is diagonal up to that ordering
    nz = np.abs(nm.A) > 1e-12
    assert (nz.sum(axis=0) == 1).all() and (nz.sum(axis=1) == 1).all()


def test_normal_modes_generalized_eigen_oracle():
    C = np.array([[60.0, -12.0], [-12.0, 45.0]])
    Linv = np.array([[0.05, 0.01], [0.01, 0.08]])
    w2 = scipy.linalg.eigh(Linv, C, eigvals_only=True) / (1e-15 * 1e-9)
    np.testing.assert_allclose(normal_modes(C, Linv).freqs, np.sqrt(w2) / (2 * np.pi * 1e9), rtol=1e-12)


def test_normal_modes_rejects_non_pd():
    with pytest.raises(ValueError):
        normal_modes(np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2))


def test_normal_modes_transform():
    C = np.array([[60.0, -12.0], [-12.0, 45.0]])
    Linv = np.array([[0.05, 0.01], [0.01, 0.08]])
    nm = normal_modes(C, Linv, np.eye(2))
    # A C^-1 A^T = 1 and A^-T Linv A^-1 is diagonal
    Ai = np.linalg.inv(nm.A)
    np.testing.assert_allclose(nm.A @ np.linalg.inv(C) @ nm.A.T, np.eye(2), atol=1e-12)
    K = Ai.T @ Linv @ Ai
    assert abs(K[0, 1]) < 1e-14
    np.testing.assert_allclose(nm.Ctilde, Ai, atol=1e-14)


def test_unit_discipline():
    assert 1.0 < _f(30, 30) < 20.0
    nm = normal_modes([[30.0]], [[1 / 30.0]])
    assert nm.freqs[0] == pytest.approx(_f(30, 30), rel=1e-12)


def test_lh_symmetric_cells():
    d = LeftHandedDesign(dl=0.0)
    r = lh_analyze(d)
    assert r.g12 == 0.0
    assert r.beta == pytest.approx(-(d.l / (d.l + 2 * d.l2)) ** 2 * (d.c + 2 * d.c2) / d.c, rel=1e-12)


def test_lh_no_middle_capacitor():
    r = lh_analyze(LeftHandedDesign(c2=1e-12))
    assert r.f_plus == pytest.approx(_f(30, 30), rel=1e-9)


def test_lh_reference_design_against_quantizer():
    d = LeftHandedDesign()
    r = lh_analyze(d)
    C, Linv, Cint = lh_matrices(d)
    q = quantize_pm(C, Linv, Cint, [d.cqa, d.cqb], [d.fa, d.fb])
    assert r.f_plus == pytest.approx(q["f_plus"], rel=1e-9)
    assert r.f_minus == pytest.approx(q["f_minus"], rel=1e-9)
    assert r.g12 == pytest.approx(q["g12"], rel=1e-9)
    np.testing.assert_allclose(r.g, q["g"], rtol=1e-9)
    # normal modes of the uncoupled diagonal reproduce the +/- frequencies
    np.testing.assert_allclose(sorted([r.f_plus, r.f_minus]), q["normal_modes"].freqs, rtol=1e-9)
    assert r.g12_over_delta12 == pytest.approx(r.g12_over_delta12_closed, rel=1e-9)
    assert r.beta_g == pytest.approx(r.g[0, 1] * r.g[1, 1] / (r.g[0, 0] * r.g[1, 0]))


@pytest.mark.parametrize("dl", [50.0, 200.0, math.inf])
def test_rh_against_quantizer(dl):
    d = RightHandedDesign(dl=dl)
    r = rh_analyze(d)
    C, Linv, Cint = rh_matrices(d)
    q = quantize_pm(C, Linv, Cint, [d.cqa, d.cqb], [d.fa, d.fb])
    assert r.f_plus == pytest.approx(q["f_plus"], rel=1e-9)
    assert r.f_minus == pytest.approx(q["f_minus"], rel=1e-9)
    assert r.g12 == pytest.approx(q["g12"], rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(r.g, q["g"], rtol=1e-9)
    assert r.three_mode


def test_rh_degenerate_limit():
    r = rh_analyze(RightHandedDesign(l2=1e12, c2=1e12))
    assert r.f_plus == pytest.approx(_f(30, 30), rel=1e-6)
    assert r.f_minus == pytest.approx(_f(30, 30), rel=1e-6)


def test_rh_c2_limit():
    d = RightHandedDesign(c2=1e12)
    C, _, _ = rh_matrices(d)
    assert C[1, 1] == pytest.approx(d.c / 2, rel=1e-9)
    assert rh_analyze(d).f_minus == pytest.approx(_f(30, 30), rel=1e-9)


def test_b_side_uses_qubit_capacitance():
    a = lh_analyze(LeftHandedDesign(cqb=80.0))
    b = lh_analyze(LeftHandedDesign(cqb=20.0))
    np.testing.assert_allclose(b.g[1] / a.g[1], 2.0, rtol=1e-12)
    np.testing.assert_allclose(b.g[0], a.g[0], rtol=0)


def test_validation_errors():
    with pytest.raises(ValueError):
        lh_analyze(LeftHandedDesign(dl=31.0))
    with pytest.raises(ValueError):
        lh_analyze(LeftHandedDesign(c=-1.0))
    with pytest.raises(ValueError):
        rh_analyze(RightHandedDesign(dl=10.0))


def test_three_mode_flag_and_warning():
    with pytest.warns(UserWarning, match="dropped"):
        r = lh_analyze(LeftHandedDesign())
    assert not r.three_mode
    r = lh_analyze(LeftHandedDesign(ca=20.0))
    assert r.three_mode and "three-mode" in r.notes[0]


def test_l2_symmetric():
    k = (30 + 60) / 30
    # (l + 2 l2)^2 = k l^2
    assert lh_decoupling_l2(30, 30, 30, 0) == pytest.approx(30 * (np.sqrt(k) - 1) / 2, rel=1e-12)


def test_l2_no_middle_capacitor():
    assert lh_decoupling_l2(30, 0, 30, 5) == pytest.approx(0.0, abs=1e-12)


def test_l2_substitute_back():
    l2 = lh_decoupling_l2(30, 30, 30, 5)
    assert abs(abs(lh_analyze(LeftHandedDesign(dl=5, l2=l2)).beta) - 1) < 1e-9
    assert lh_analyze(LeftHandedDesign(dl=5, l2=l2)).beta < 0


def test_l2_negative_radicand():
    with pytest.raises(ValueError):
        lh_decoupling_l2(30, 30, 1.0, 20.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(10, 60), st.floats(5, 80), st.floats(10, 60), st.floats(-0.9, 0.9), st.floats(1, 60))
def test_lh_beta_negative_property(c, c2, l, frac, l2):
    d = LeftHandedDesign(c=c, c2=c2, l=l, dl=frac * l, l2=l2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert lh_analyze(d).beta < 0


@settings(max_examples=30, deadline=None)
@given(st.floats(10, 60), st.floats(5, 80), st.floats(10, 60), st.floats(-0.9, 0.9), st.floats(1, 60))
def test_lh_closed_form_vs_quantizer_property(c, c2, l, frac, l2):
    d = LeftHandedDesign(c=c, c2=c2, l=l, dl=frac * l, l2=l2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = lh_analyze(d)
    q = quantize_pm(*lh_matrices(d), [d.cqa, d.cqb], [d.fa, d.fb])
    assert r.f_plus == pytest.approx(q["f_plus"], rel=1e-9)
    assert r.f_minus == pytest.approx(q["f_minus"], rel=1e-9)
    assert r.g12 == pytest.approx(q["g12"], rel=1e-9, abs=1e-12)


def test_locus_zero_row_and_trajectory():
    grid = lh_locus_scan(30.0, 30.0, np.linspace(1, 120, 40), np.linspace(-25, 25, 41))
    j0 = int(np.argmin(np.abs(grid.dl)))
    assert grid.dl[j0] == 0.0
    # with dl = 0 there is no mode-mode coupling, so the mismatch is -alpha/(1 - alpha^2)
    a = grid.alpha[:, j0]
    np.testing.assert_allclose(grid.signed[:, j0], -a / (1 - a ** 2), rtol=1e-12)
    traj = grid.trajectory()
    assert traj.sum() >= 10
    rows, cols = np.nonzero(traj)
    assert rows.max() - rows.min() >= 10


def test_locus_constructed_point():
    # bisect dl on one c2 row to a sign change and check the mismatch vanishes there
    c, l, c2 = 30.0, 30.0, 40.0
    grid = lh_locus_scan(c, l, [c2], np.linspace(-25, 25, 201))
    s = grid.signed[0]
    side = np.sign(1 - grid.alpha[0] ** 2)
    k = next(i for i in range(len(s) - 1) if np.isfinite(s[i]) and np.isfinite(s[i + 1])
             and np.sign(s[i]) != np.sign(s[i + 1]) and side[i] == side[i + 1])
    lo, hi = grid.dl[k], grid.dl[k + 1]

    def mis(dl):
        return lh_locus_scan(c, l, [c2], [dl]).signed[0, 0]

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.sign(mis(mid)) == np.sign(mis(lo)):
            lo = mid
        else:
            hi = mid
    assert abs(mis(0.5 * (lo + hi))) < 1e-6
