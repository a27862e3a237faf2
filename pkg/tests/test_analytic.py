import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from couplerlab.analytic import (DressedCoupler, Qubits, ResonantDenominatorError, TwoModeCoupler, bogoliubov,
                                 decoupled_residual, decoupling_condition, multimode_enhancement, sw_J,
                                 sw_couplings, selectivity_ratio)
from couplerlab.config import table1_spec
from couplerlab.fock import ModeSpec
from couplerlab.hamiltonian import CouplingSpec, SystemSpec, build_hamiltonian, verify_block_decoupling
from couplerlab.report import coupling_report, sw_report_values

G_HALF = [[150.0, -75.0], [75.0, 150.0]]


def _one_excitation_block(c: TwoModeCoupler):
    return np.array([[c.f1, c.lam], [c.lam, c.f2]])


def test_bogoliubov_identity_case():
    g = [[150.0, -200.0], [150.0, 150.0]]
    d = bogoliubov(TwoModeCoupler(3.2, 3.3, 0.0, g))
    assert d.Lambda == 0.0
    assert (d.f1t, d.f2t) == pytest.approx((3.2, 3.3), abs=1e-15)
    np.testing.assert_allclose(d.gt, g, atol=1e-13)


def test_bogoliubov_degenerate_limit():
    d = bogoliubov(TwoModeCoupler(3.3, 3.3, 0.02, np.eye(2)))
    assert d.Lambda == pytest.approx(np.pi / 4)
    assert (d.f1t, d.f2t) == pytest.approx((3.28, 3.32), abs=1e-14)


@pytest.mark.parametrize("f1,f2,lam", [(3.2, 3.4, 0.01), (3.4, 3.2, 0.01), (3.0, 3.1, -0.03), (3.2, 3.2, 0.05)])
def test_bogoliubov_matches_eigh(f1, f2, lam):
    c = TwoModeCoupler(f1, f2, lam, np.eye(2))
    d = bogoliubov(c)
    w, v = np.linalg.eigh(_one_excitation_block(c))
    np.testing.assert_allclose([d.f1t, d.f2t], w, atol=1e-12)
    # lower dressed mode is cos(L) c1 - sin(L) c2
    lower = np.array([np.cos(d.Lambda), -np.sin(d.Lambda)])
    assert abs(abs(lower @ v[:, 0]) - 1.0) < 1e-12


def test_decoupling_trivial():
    cond = decoupling_condition([[150.0, 0.0], [0.0, 150.0]])
    assert cond.feasible and cond.alpha == 0.0 and cond.lam_over_delta == 0.0


def test_decoupling_half():
    cond = decoupling_condition(G_HALF)
    assert cond.feasible
    assert cond.alpha == pytest.approx(0.5)
    assert cond.lam_over_delta == pytest.approx(2 / 3)
    delta = 0.5
    c = TwoModeCoupler(3.0, 3.0 + delta, cond.lam_over_delta * delta, G_HALF)
    assert decoupled_residual(c) < 1e-9
    assert bogoliubov(c).Lambda == pytest.approx(cond.Lambda, abs=1e-12)


def test_decoupling_table1_infeasible():
    cond = decoupling_condition([[150.0, -200.0], [150.0, 150.0]])
    assert not cond.feasible
    assert cond.ratios == pytest.approx((4 / 3, 1.0))


def test_decoupling_degenerate_branch():
    cond = decoupling_condition([[100.0, -100.0], [100.0, 100.0]])
    assert cond.feasible and cond.degenerate
    assert cond.Lambda == pytest.approx(np.pi / 4)
    assert decoupled_residual(TwoModeCoupler(3.0, 3.0, 0.01, [[100.0, -100.0], [100.0, 100.0]])) < 1e-9


def test_decoupling_zero_diagonal_raises():
    with pytest.raises(ZeroDivisionError):
        decoupling_condition([[0.0, 1.0], [1.0, 1.0]])


def test_residual_without_mixing():
    g = [[150.0, -200.0], [120.0, 150.0]]
    assert decoupled_residual(TwoModeCoupler(3.0, 3.3, 0.0, g)) == pytest.approx(200.0)


def test_residual_linear_in_lambda_offset():
    delta = 0.5
    lam0 = 2 / 3 * delta
    res = [decoupled_residual(TwoModeCoupler(3.0, 3.0 + delta, lam0 * (1 + e), G_HALF)) for e in (0.005, 0.01, 0.02)]
    assert res[1] / res[0] == pytest.approx(2.0, rel=0.02)
    assert res[2] / res[1] == pytest.approx(2.0, rel=0.02)


def test_rotated_rwa_model_is_block_diagonal():
    delta = 0.5
    lam = 2 / 3 * delta
    d = bogoliubov(TwoModeCoupler(3.0, 3.0 + delta, lam, G_HALF))
    modes = (ModeSpec("qa", "transmon", 4.0, -0.3, 3), ModeSpec("m1", "linear", d.f1t, 0.0, 3),
             ModeSpec("m2", "linear", d.f2t, 0.0, 3), ModeSpec("qb", "transmon", 3.6, -0.35, 3))
    cs = tuple(CouplingSpec(q, m, float(d.gt[i, k]), "rwa") for i, q in enumerate(("qa", "qb"))
               for k, m in enumerate(("m1", "m2")))
    H = build_hamiltonian(SystemSpec(modes, cs))
    assert verify_block_decoupling(H, [["qa", "m1"], ["m2", "qb"]]) < 1e-10


def test_sw_zero_column_contributes_nothing():
    q = Qubits(4.0, 3.6, -0.3, -0.35)
    d = DressedCoupler(0.0, 3.0, 3.2, np.array([[100.0, 0.0], [80.0, 90.0]]))
    d1 = DressedCoupler(0.0, 3.0, 3.2, np.array([[100.0, 0.0], [80.0, 0.0]]))
    assert sw_J(0, 0, d, q) == pytest.approx(sw_J(0, 0, d1, q), abs=0)


def test_sw_single_mode_degenerate():
    q = Qubits(4.0, 4.0, -0.3, -0.3)
    d = DressedCoupler(0.0, 3.5, 9.0, np.array([[100.0, 0.0], [80.0, 0.0]]))
    assert sw_J(0, 0, d, q) == pytest.approx(100.0 * 80.0 / (3.5 - 4.0) * 1e-3, rel=1e-12)


def test_sw_resonant_denominator_named():
    q = Qubits(4.0, 3.6, -0.3, -0.35)
    d = DressedCoupler(0.0, 3.3, 3.6005, np.ones((2, 2)))
    with pytest.raises(ResonantDenominatorError, match="qubit b"):
        sw_J(0, 0, d, q)


def test_sw_mode_relabel_symmetry():
    q = Qubits(4.0, 3.6, -0.3, -0.35)
    gt = np.array([[120.0, -90.0], [70.0, 110.0]])
    d = DressedCoupler(0.0, 3.1, 3.3, gt)
    d_swapped = DressedCoupler(0.0, 3.3, 3.1, gt[:, ::-1])
    for m, n in ((0, 0), (0, 1), (1, 0)):
        assert sw_J(m, n, d, q) == pytest.approx(sw_J(m, n, d_swapped, q), rel=1e-14)


def test_opposite_parity_zero_crossing():
    # g~_a1 g~_b1 = -g~_a2 g~_b2; mode 1 fixed, mode 2 scanned through the anharmonic window
    q = Qubits(3.6, 3.6, -0.3, -0.3)
    gt = np.array([[100.0, 100.0], [100.0, -100.0]])
    scan = np.linspace(3.32, 3.58, 400)
    j01 = np.array([sw_J(0, 1, DressedCoupler(0.0, 3.0, f, gt), q) for f in scan])
    j00 = np.array([sw_J(0, 0, DressedCoupler(0.0, 3.0, f, gt), q) for f in scan])
    assert np.any(np.sign(j01[:-1]) != np.sign(j01[1:]))
    k = int(np.argmin(np.abs(j01)))
    assert abs(j00[k]) > 1.0


def test_selectivity_ratio():
    assert selectivity_ratio(3.0, 3.0, 3.0) == 1.0
    assert selectivity_ratio(2.0, 0.0, 0.0) == float("inf")
    assert selectivity_ratio(-5.0, 0.5, -0.5) == pytest.approx(10.0)


def test_multimode_single_and_arithmetic():
    e = multimode_enhancement(1, 50.0, 4.0, 3.5)
    assert e.exact == pytest.approx(50.0 ** 2 / 0.5 * 1e-3)
    assert e.estimate == pytest.approx(e.exact)
    assert multimode_enhancement(3, 50.0, 4.0, 3.5).estimate == pytest.approx(15.0)
    with pytest.raises(ZeroDivisionError):
        multimode_enhancement(2, 50.0, 4.0, 4.0)


@pytest.mark.parametrize("fcs", [(3.5,), (3.45, 3.5, 3.55), (3.4, 3.45, 3.5, 3.55, 3.59)])
def test_multimode_exact_sum_vs_block_eigen(fcs):
    # oracle: one-excitation block of two degenerate qubits and m modes, half the splitting
    m, g0, fq = len(fcs), 40.0, 4.0
    H = np.diag([fq, fq, *fcs])
    H[0, 2:] = H[2:, 0] = H[1, 2:] = H[2:, 1] = g0 * 1e-3
    w, v = np.linalg.eigh(H)
    qubit_like = np.argsort(np.sum(np.abs(v[:2]) ** 2, axis=0))[-2:]
    J_num = 0.5 * abs(w[qubit_like[1]] - w[qubit_like[0]]) * 1e3
    assert g0 * 1e-3 / (fq - max(fcs)) <= 0.1
    assert multimode_enhancement(m, g0, fq, list(fcs)).exact == pytest.approx(J_num, rel=0.1)


def test_sw_vs_numerical_j00_small_coupling():
    # weak-coupling RWA model, g~ / detuning <= 0.05, no direct term
    spec = table1_spec(f1=3.0, f2=3.1).scaled_couplings(0.1).with_coupling("qa", "qb", g=0.0).as_rwa()
    num = coupling_report(spec, "procrustes").J00
    assert sw_report_values(spec)["J00"] == pytest.approx(num, rel=0.1)


@settings(max_examples=30, deadline=None)
@given(st.floats(2.8, 3.6), st.floats(2.8, 3.6), st.floats(-0.05, 0.05))
def test_frame_equivalence_two_excitation(f1, f2, lam):
    c = TwoModeCoupler(f1, f2, lam, np.eye(2))
    d = bogoliubov(c)
    # two-excitation block of the RWA coupler on |20>, |11>, |02>
    s2 = np.sqrt(2.0) * lam
    H2 = np.array([[2 * f1, s2, 0], [s2, f1 + f2, s2], [0, s2, 2 * f2]])
    expected = sorted([2 * d.f1t, d.f1t + d.f2t, 2 * d.f2t])
    np.testing.assert_allclose(np.linalg.eigvalsh(H2), expected, atol=1e-12)


def test_sw_couplings_keys():
    d = bogoliubov(TwoModeCoupler(3.2, 3.3, 0.01, [[150.0, -200.0], [150.0, 150.0]]))
    out = sw_couplings(d, Qubits(4.0, 3.6, -0.3, -0.35))
    assert set(out) == {"J00", "J01", "J10"}
    assert all(np.isfinite(v) for v in out.values())
