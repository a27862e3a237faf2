"""Lumped-element three-cell coupler circuits and a generic normal-mode quantizer.

Element values are given in fF and nH, qubit frequencies in GHz.  Mode
frequencies are reported in GHz and couplings in MHz.  Mode "+" is the
common (phi_1 + phi_2)/2 coordinate and mode "-" the difference phi_1 - phi_2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

FF = 1e-15
NH = 1e-9
THREE_MODE_THRESHOLD = 0.05


def _rad_to_ghz(w):
    return np.asarray(w) / (2 * np.pi * 1e9)


def _rad_to_mhz(w):
    return np.asarray(w) / (2 * np.pi * 1e6)


@dataclass(frozen=True)
class LeftHandedDesign:
    c: float = 30.0
    c2: float = 30.0
    l: float = 30.0
    dl: float = 3.0
    l2: float = 20.0
    ca: float = 5.0
    cb: float = 5.0
    cqa: float = 80.0
    cqb: float = 80.0
    fa: float = 4.0
    fb: float = 3.6

    @property
    def sigma(self) -> float:
        return 2 * self.l * self.l2 + self.l ** 2 - self.dl ** 2

    @property
    def l1(self) -> float:
        return self.l + self.dl

    @property
    def l3(self) -> float:
        return self.l - self.dl

    def validate(self):
        for name in ("c", "c2", "l", "l2", "ca", "cb", "cqa", "cqb", "fa", "fb"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not abs(self.dl) < self.l:
            raise ValueError("need |dl| < l")
        if not self.sigma > 0:
            raise ValueError("need 2 l l2 + l^2 - dl^2 > 0")


@dataclass(frozen=True)
class RightHandedDesign:
    """``l`` and ``dl`` satisfy 2/l = 1/l1 + 1/l3 and 2/dl = 1/l1 - 1/l3 (dl = inf is symmetric)."""

    c: float = 30.0
    c2: float = 30.0
    l: float = 30.0
    dl: float = math.inf
    l2: float = 20.0
    ca: float = 5.0
    cb: float = 5.0
    cqa: float = 80.0
    cqb: float = 80.0
    fa: float = 4.0
    fb: float = 3.6

    @property
    def l1(self) -> float:
        return 1.0 / (1.0 / self.l + 1.0 / self.dl)

    @property
    def l3(self) -> float:
        return 1.0 / (1.0 / self.l - 1.0 / self.dl)

    def validate(self):
        for name in ("c", "c2", "l", "l2", "ca", "cb", "cqa", "cqb", "fa", "fb"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not abs(self.dl) > self.l:
            raise ValueError("need |dl| > l so that both outer inductances are positive")


@dataclass(frozen=True)
class CircuitReport:
    f_plus: float
    f_minus: float
    g12: float
    g: np.ndarray  # MHz, rows (a, b), columns (+, -)
    alpha: float
    beta: float
    beta_g: float
    g12_over_delta12: float
    g12_over_delta12_closed: float
    three_mode: bool = False
    notes: tuple = field(default=())

    @property
    def couplings(self) -> dict:
        return {"g_a+": self.g[0, 0], "g_a-": self.g[0, 1], "g_b+": self.g[1, 0], "g_b-": self.g[1, 1]}


@dataclass(frozen=True)
class NormalModes:
    freqs: np.ndarray  # GHz, ascending
    omega: np.ndarray  # rad/s
    D: np.ndarray  # rows are eigenvectors of C^-1/2 Linv C^-1/2
    A: np.ndarray  # D sqrt(C), in sqrt(fF)
    Ctilde: np.ndarray  # Cint A^-1, in sqrt(fF)
    decoupling_residual: float


def _sqrtm_spd(C):
    w, v = np.linalg.eigh(C)
    if np.any(w <= 0):
        raise ValueError("capacitance matrix must be positive definite")
    return (v * np.sqrt(w)) @ v.T, (v / np.sqrt(w)) @ v.T


def normal_modes(C, Linv, Cint=None) -> NormalModes:
    """Normal modes of 1/2 phi'^T C phi' - 1/2 phi^T Linv phi.

    ``C`` in fF and ``Linv`` in 1/nH; ``Cint`` holds one row per qubit with
    the capacitive weights of each coordinate (fF).
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Linv = np.atleast_2d(np.asarray(Linv, dtype=float))
    if not np.allclose(C, C.T) or not np.allclose(Linv, Linv.T):
        raise ValueError("C and Linv must be symmetric")
    sq, isq = _sqrtm_spd(C)
    w2, vecs = np.linalg.eigh(isq @ Linv @ isq)
    if np.any(w2 < -1e-12 * max(1.0, np.abs(w2).max())):
        raise ValueError("Linv must be positive semidefinite")
    omega = np.sqrt(np.clip(w2, 0, None) / (FF * NH))
    D = vecs.T
    A = D @ sq
    n = C.shape[0]
    Cint = np.zeros((0, n)) if Cint is None else np.atleast_2d(np.asarray(Cint, dtype=float))
    Ct = Cint @ np.linalg.inv(A)
    resid = float("nan")
    if Ct.shape == (2, 2):
        resid = float(min(max(abs(Ct[0, 0]), abs(Ct[1, 1])), max(abs(Ct[0, 1]), abs(Ct[1, 0]))))
    return NormalModes(_rad_to_ghz(omega), omega, D, A, Ct, resid)


def qubit_mode_couplings(Ctilde, omega, cq, fq) -> np.ndarray:
    """g_ik = -Ctilde_ik sqrt(w_k w_i / c_qi), MHz."""
    Ct = np.asarray(Ctilde, dtype=float)
    wq = 2 * np.pi * np.asarray(fq, dtype=float) * 1e9
    cq = np.asarray(cq, dtype=float)
    # Ctilde in sqrt(fF), cq in fF: the ratio is dimensionless
    g = -Ct * np.sqrt(np.outer(wq / cq, omega))
    return _rad_to_mhz(g)


def quantize_pm(C, Linv, Cint, cq, fq) -> dict:
    """Quantize the +/- coordinates as uncoupled oscillators plus a flux-flux coupling.

    Uses the diagonal of (C, Linv) for the mode frequencies and treats the
    off-diagonal inverse inductance as the mode-mode coupling, which is the
    form the closed-form circuit expressions take.
    """
    C = np.asarray(C, dtype=float)
    Linv = np.asarray(Linv, dtype=float)
    if abs(C[0, 1]) > 1e-12 * abs(C).max():
        raise ValueError("quantize_pm expects a diagonal capacitance matrix")
    nm = normal_modes(np.diag(np.diag(C)), np.diag(np.diag(Linv)), Cint)
    # keep +/- ordering rather than ascending frequency
    w = np.sqrt(np.diag(Linv) / np.diag(C) / (FF * NH))
    K = Linv / np.sqrt(np.outer(np.diag(C), np.diag(C)))
    g12 = K[0, 1] / (FF * NH) / (2 * np.sqrt(w[0] * w[1]))
    Ct = np.asarray(Cint, dtype=float) / np.sqrt(np.diag(C))
    g = qubit_mode_couplings(Ct, w, cq, fq)
    return {"f_plus": float(_rad_to_ghz(w[0])), "f_minus": float(_rad_to_ghz(w[1])),
            "g12": float(_rad_to_mhz(g12)), "g": g, "normal_modes": nm}


def lh_matrices(d: LeftHandedDesign) -> tuple:
    """(C, Linv, Cint) of the left-handed coupler in the +/- coordinates.

    The qubit rows use the general-inductance expressions for phi_0 and
    phi_0 + phi_1 + phi_2 in terms of phi_+ and phi_-.
    """
    c, c2, l, l2 = d.c, d.c2, d.l, d.l2
    sig = d.sigma
    C = np.diag([2 * c + 4 * c2, c / 2])
    Linv = np.array([[2 / l, -d.dl / sig], [-d.dl / sig, 1 / (2 * l + 4 * l2)]])
    l1, l3 = d.l1, d.l3
    s_gen = l1 * l2 + l1 * l3 + l2 * l3
    node_a = np.array([-(2 * l1 * l2 + l1 * l3) / s_gen, -l1 * l3 / (2 * s_gen)])
    node_b = np.array([(l1 * l3 + 2 * l2 * l3) / s_gen, -l1 * l3 / (2 * s_gen)])
    Cint = np.array([d.ca * node_a, d.cb * node_b])
    return C, Linv, Cint


def rh_matrices(d: RightHandedDesign) -> tuple:
    """(C, Linv, Cint) of the right-handed coupler from its node Lagrangian.

    The cyclic node phi_0 is eliminated from the kinetic term, then the
    remaining nodes are rotated to the +/- coordinates.
    """
    c1 = c3 = d.c
    c2 = d.c2
    e0, e1, e2 = np.eye(3)
    Cn = (c1 * np.outer(e0, e0) + c2 * np.outer(e0 + e1, e0 + e1)
          + c3 * np.outer(e0 + e1 + e2, e0 + e1 + e2))
    # phi_0' = -(C_00)^-1 C_0r phi_r'
    elim = -Cn[0, 1:] / Cn[0, 0]
    Cr = Cn[1:, 1:] - np.outer(Cn[1:, 0], Cn[0, 1:]) / Cn[0, 0]
    T = np.array([[1.0, 0.5], [1.0, -0.5]])  # (phi_1, phi_2) = T (phi_+, phi_-)
    C = T.T @ Cr @ T
    Ln = np.diag([1 / d.l1, 1 / d.l3]) + np.ones((2, 2)) / d.l2
    Linv = T.T @ Ln @ T
    node_a = elim @ T
    node_b = (elim + np.array([1.0, 1.0])) @ T
    Cint = np.array([d.ca * node_a, d.cb * node_b])
    C[np.abs(C) < 1e-12 * np.abs(C).max()] = 0.0
    return C, Linv, Cint


def _three_mode_note(d, c_plus):
    ratio = max(d.ca, d.cb) / c_plus
    if ratio >= THREE_MODE_THRESHOLD:
        return True, (f"three-mode regime: coupling capacitance ratio {ratio:.3f} >= "
                      f"{THREE_MODE_THRESHOLD}; the extra coupler-node mode is not negligible",)
    msg = (f"extra coupler-node mode dropped (coupling capacitance ratio {ratio:.3f} < "
           f"{THREE_MODE_THRESHOLD})")
    warnings.warn(msg, stacklevel=3)
    return False, (msg,)


def _closed_ratio(Linv12, lp, lm, cp, cm):
    return -(Linv12 / 2) * (lp * lm) ** 0.75 * (cp * cm) ** 0.25 / (np.sqrt(lm * cm) - np.sqrt(lp * cp))


def lh_analyze(d: LeftHandedDesign) -> CircuitReport:
    d.validate()
    if d.l + d.dl == 0:
        raise ZeroDivisionError("alpha is singular for l + dl = 0")
    c, c2, l, dl, l2 = d.c * FF, d.c2 * FF, d.l * NH, d.dl * NH, d.l2 * NH
    ca, cb, cqa, cqb = d.ca * FF, d.cb * FF, d.cqa * FF, d.cqb * FF
    sig = 2 * l * l2 + l ** 2 - dl ** 2
    cp, cm, lp, lm = 2 * c + 4 * c2, c / 2, l / 2, 2 * l + 4 * l2
    wp = 1 / np.sqrt(l * (c + 2 * c2))
    wm = 1 / np.sqrt((l + 2 * l2) * c)
    wa, wb = 2 * np.pi * d.fa * 1e9, 2 * np.pi * d.fb * 1e9
    g12 = -dl / (2 * sig) * (lp * lm / (cp * cm)) ** 0.25
    shift = 2 * l2 * dl / sig
    common = (l ** 2 - dl ** 2) / (2 * sig)
    g = np.array([
        [ca * (1 + shift) * np.sqrt(wp * wa / (cp * cqa)), ca * common * np.sqrt(wm * wa / (cm * cqa))],
        [-cb * (1 - shift) * np.sqrt(wp * wb / (cp * cqb)), cb * common * np.sqrt(wm * wb / (cm * cqb))],
    ])
    alpha = -((l + dl + 2 * l2) / (l + dl)) * np.sqrt(wp * c / (wm * (c + 2 * c2)))
    beta = -(l ** 2 - dl ** 2) / ((l + 2 * l2 + dl) * (l + 2 * l2 - dl)) * (c + 2 * c2) / c
    beta_g = g[0, 1] * g[1, 1] / (g[0, 0] * g[1, 0])
    three, notes = _three_mode_note(d, d.c * 2 + 4 * d.c2)
    return CircuitReport(
        f_plus=float(_rad_to_ghz(wp)), f_minus=float(_rad_to_ghz(wm)), g12=float(_rad_to_mhz(g12)),
        g=_rad_to_mhz(g), alpha=float(alpha), beta=float(beta), beta_g=float(beta_g),
        g12_over_delta12=float(g12 / (wm - wp)),
        g12_over_delta12_closed=float(_closed_ratio(-dl / sig, lp, lm, cp, cm)),
        three_mode=three, notes=notes)


def rh_analyze(d: RightHandedDesign) -> CircuitReport:
    d.validate()
    c, c2, l, l2 = d.c * FF, d.c2 * FF, d.l * NH, d.l2 * NH
    ca, cb, cqa, cqb = d.ca * FF, d.cb * FF, d.cqa * FF, d.cqb * FF
    cp = 2 * c
    cm = c * c2 / (2 * (2 * c + c2))
    Lp = 1 / (2 / l + 4 / l2)
    Lm = 2 * l
    wp = np.sqrt(1 + 2 * l / l2) / np.sqrt(l * c)
    wm = np.sqrt(1 + 2 * c / c2) / np.sqrt(l * c)
    wa, wb = 2 * np.pi * d.fa * 1e9, 2 * np.pi * d.fb * 1e9
    inv_dl = 0.0 if math.isinf(d.dl) else 1 / (d.dl * NH)
    g12 = inv_dl / 2 * (Lp * Lm / (cp * cm)) ** 0.25
    share = 0.5 * c2 / (2 * c + c2)
    g = np.array([
        [ca * np.sqrt(wp * wa / (cp * cqa)), ca * share * np.sqrt(wm * wa / (cm * cqa))],
        [-cb * np.sqrt(wp * wb / (cp * cqb)), cb * share * np.sqrt(wm * wb / (cm * cqb))],
    ])
    alpha = g[1, 0] / g[1, 1]
    beta_g = g[0, 1] * g[1, 1] / (g[0, 0] * g[1, 0])
    three, notes = _three_mode_note(d, 2 * d.c)
    den = wm - wp
    return CircuitReport(
        f_plus=float(_rad_to_ghz(wp)), f_minus=float(_rad_to_ghz(wm)), g12=float(_rad_to_mhz(g12)),
        g=_rad_to_mhz(g), alpha=float(alpha), beta=float(beta_g), beta_g=float(beta_g),
        g12_over_delta12=float(g12 / den) if den != 0 else float("nan"),
        g12_over_delta12_closed=float(_closed_ratio(inv_dl, Lp, Lm, cp, cm)) if den != 0 else float("nan"),
        three_mode=three, notes=notes)


def lh_decoupling_l2(c: float, c2: float, l: float, dl: float) -> float:
    """Middle inductance (nH) that makes the left-handed beta equal to -1.

    Solves (l + 2 l2)^2 = k l^2 - (k - 1) dl^2 with k = (c + 2 c2)/c.
    """
    k = (c + 2 * c2) / c
    rad = k * l ** 2 - (k - 1) * dl ** 2
    if rad < 0:
        raise ValueError(f"no real solution: k l^2 - (k-1) dl^2 = {rad:.4g} < 0")
    return (math.sqrt(rad) - l) / 2


@dataclass(frozen=True)
class LocusGrid:
    c2: np.ndarray  # fF, axis 1
    dl: np.ndarray  # nH, axis 2
    l2: np.ndarray  # nH per cell
    mismatch: np.ndarray  # |g12/D12 - alpha/(1 - alpha^2)|
    signed: np.ndarray  # g12/D12 - alpha/(1 - alpha^2)
    alpha: np.ndarray
    valid: np.ndarray

    def zero_cells(self) -> np.ndarray:
        """Cells adjacent to a sign change of the mismatch that is not a pole of alpha/(1-alpha^2)."""
        s, v = self.signed, self.valid
        side = np.sign(1 - self.alpha ** 2)
        mark = np.zeros_like(v)
        for axis in (0, 1):
            a = [slice(None)] * 2
            b = [slice(None)] * 2
            a[axis], b[axis] = slice(None, -1), slice(1, None)
            a, b = tuple(a), tuple(b)
            flip = (v[a] & v[b] & (np.sign(s[a]) != np.sign(s[b])) & (side[a] == side[b]))
            mark[a] |= flip
            mark[b] |= flip
        return mark

    def trajectory(self) -> np.ndarray:
        """Largest connected set of zero cells (8-connectivity)."""
        lab, n = ndimage.label(self.zero_cells(), structure=np.ones((3, 3)))
        if n == 0:
            return np.zeros_like(self.valid)
        sizes = ndimage.sum(np.ones_like(lab), lab, index=np.arange(1, n + 1))
        return lab == (1 + int(np.argmax(sizes)))


def lh_locus_scan(c: float, l: float, c2_values, dl_values, **design) -> LocusGrid:
    """Scan |g12/D12 - alpha/(1 - alpha^2)| over (c2, dl) with l2 set for beta = -1."""
    c2_values = np.asarray(c2_values, dtype=float)
    dl_values = np.asarray(dl_values, dtype=float)
    shape = (c2_values.size, dl_values.size)
    signed = np.full(shape, np.nan)
    alpha = np.full(shape, np.nan)
    l2g = np.full(shape, np.nan)
    valid = np.zeros(shape, dtype=bool)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, c2 in enumerate(c2_values):
            for j, dl in enumerate(dl_values):
                try:
                    l2 = lh_decoupling_l2(c, c2, l, dl)
                    rep = lh_analyze(LeftHandedDesign(c=c, c2=c2, l=l, dl=dl, l2=l2, **design))
                except (ValueError, ZeroDivisionError):
                    continue
                a = rep.alpha
                l2g[i, j], alpha[i, j] = l2, a
                if abs(1 - a * a) < 1e-9:
                    continue
                signed[i, j] = rep.g12_over_delta12 - a / (1 - a * a)
                valid[i, j] = np.isfinite(signed[i, j])
    return LocusGrid(c2_values, dl_values, l2g, np.abs(signed), signed, alpha, valid)
