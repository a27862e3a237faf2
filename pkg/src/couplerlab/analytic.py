"""Closed-form two-mode coupler analysis in the rotating-wave picture.

Frequencies in GHz, qubit-coupler couplings in MHz.  The coupling matrix
``g`` has rows (qubit a, qubit b) and columns (mode 1, mode 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

RESONANCE_GUARD_GHZ = 1e-3


class ResonantDenominatorError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class TwoModeCoupler:
    f1: float
    f2: float
    lam: float
    g: np.ndarray  # MHz, [[g_a1, g_a2], [g_b1, g_b2]]

    def __post_init__(self):
        g = np.array(self.g, dtype=float).reshape(2, 2)
        if not (np.all(np.isfinite(g)) and np.isfinite([self.f1, self.f2, self.lam]).all()):
            raise ValueError("coupler parameters must be finite")
        g.flags.writeable = False
        object.__setattr__(self, "g", g)

    @property
    def delta12(self) -> float:
        return self.f2 - self.f1


@dataclass(frozen=True)
class DressedCoupler:
    Lambda: float
    f1t: float
    f2t: float
    gt: np.ndarray  # MHz, rows (a, b), columns (dressed mode 1, dressed mode 2)


@dataclass(frozen=True)
class Qubits:
    fa: float
    fb: float
    da: float = 0.0
    db: float = 0.0


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def bogoliubov(coupler: TwoModeCoupler) -> DressedCoupler:
    """Rotate the two coupler modes into their uncoupled combinations.

    Lambda = atan2(2 lam, f2 - f1) / 2; the lower dressed mode is
    cos(L) c1 - sin(L) c2 and the qubit couplings rotate accordingly.
    """
    d = coupler.delta12
    Lam = 0.5 * np.arctan2(2.0 * coupler.lam, d)
    root = np.hypot(d, 2.0 * coupler.lam)
    mean = coupler.f1 + coupler.f2
    # dressed mode k = sum_j R[k, j] c_j, so g~ = g R^T
    gt = coupler.g @ rotation(Lam).T
    return DressedCoupler(float(Lam), 0.5 * (mean - root), 0.5 * (mean + root), gt)


@dataclass(frozen=True)
class DecouplingCondition:
    feasible: bool
    alpha: Optional[float]
    Lambda: Optional[float]
    lam_over_delta: Optional[float]
    ratios: tuple  # (-g_a2/g_a1, g_b1/g_b2)
    degenerate: bool = False


def decoupling_condition(g, rtol: float = 1e-9) -> DecouplingCondition:
    """Mixing angle that confines each qubit to its own dressed mode, if any.

    Requires -g_a2/g_a1 == g_b1/g_b2 == alpha; then tan(Lambda) = alpha and
    lam/Delta12 = alpha/(1 - alpha^2).  |alpha| = 1 needs a degenerate pair
    (Delta12 = 0, Lambda = +-pi/4) and returns ``lam_over_delta = inf``.
    """
    g = np.asarray(g, dtype=float).reshape(2, 2)
    if g[0, 0] == 0.0 or g[1, 1] == 0.0:
        raise ZeroDivisionError("decoupling condition needs g_a1 and g_b2 nonzero")
    ra = -g[0, 1] / g[0, 0]
    rb = g[1, 0] / g[1, 1]
    ratios = (float(ra), float(rb))
    if abs(ra - rb) > rtol * max(abs(ra), abs(rb), 1.0):
        return DecouplingCondition(False, None, None, None, ratios)
    alpha = 0.5 * (ra + rb)
    Lam = float(np.arctan(alpha))
    if abs(abs(alpha) - 1.0) <= rtol:
        return DecouplingCondition(True, float(np.sign(alpha)), float(np.sign(alpha) * np.pi / 4),
                                   float("inf"), ratios, degenerate=True)
    return DecouplingCondition(True, float(alpha), Lam, float(alpha / (1.0 - alpha ** 2)), ratios)


def decoupled_residual(coupler: TwoModeCoupler) -> float:
    """Largest cross coupling max(|g~_a2|, |g~_b1|) after rotation, MHz."""
    gt = bogoliubov(coupler).gt
    return float(max(abs(gt[0, 1]), abs(gt[1, 0])))


def sw_J(m: int, n: int, dressed: DressedCoupler, qubits: Qubits) -> float:
    """Second-order exchange J_mn between |m+1,n> and |m,n+1>, MHz.

    J_mn = sum_k (g~_ak g~_bk / 2) [1/(w~_k - w_a - m d_a) + 1/(w~_k - w_b - n d_b)].
    """
    total = 0.0
    for k, fk in enumerate((dressed.f1t, dressed.f2t)):
        ga, gb = dressed.gt[0, k], dressed.gt[1, k]
        den_a = fk - qubits.fa - m * qubits.da
        den_b = fk - qubits.fb - n * qubits.db
        for den, who in ((den_a, "a"), (den_b, "b")):
            if abs(den) < RESONANCE_GUARD_GHZ:
                raise ResonantDenominatorError(
                    f"dressed mode {k + 1} is within 1 MHz of qubit {who} (m={m}, n={n}): "
                    f"denominator {den * 1e3:.4f} MHz")
        # g in MHz, denominators in GHz: (MHz^2 / GHz) * 1e-3 = MHz
        total += 0.5 * ga * gb * (1.0 / den_a + 1.0 / den_b) * 1e-3
    return float(total)


def sw_couplings(dressed: DressedCoupler, qubits: Qubits) -> dict:
    return {"J00": sw_J(0, 0, dressed, qubits),
            "J01": sw_J(0, 1, dressed, qubits),
            "J10": sw_J(1, 0, dressed, qubits)}


def selectivity_ratio(J00: float, J01: float, J10: float) -> float:
    """2|J00| / (|J01| + |J10|); +inf when the two-excitation couplings vanish."""
    den = abs(J01) + abs(J10)
    if den == 0.0:
        return float("inf")
    return 2.0 * abs(J00) / den


@dataclass(frozen=True)
class Enhancement:
    exact: float  # MHz
    estimate: float  # MHz


def multimode_enhancement(m: int, g0: float, f_q: float, f_c, ) -> Enhancement:
    """Qubit-qubit exchange through m modes that each couple with g0 (MHz).

    ``f_c`` is a single mode frequency (m degenerate modes) or a sequence of
    m frequencies.  The exact sum is J = (g0^2/2) sum_k 2/(f_q - f_k) for two
    degenerate qubits; the estimate is m g0^2 / (f_q - mean f_c).
    """
    fcs = np.full(m, float(f_c)) if np.isscalar(f_c) else np.asarray(f_c, dtype=float)
    if m < 1 or fcs.size != m:
        raise ValueError("need m >= 1 mode frequencies")
    det = f_q - fcs
    if np.any(det == 0.0):
        raise ZeroDivisionError("qubit is resonant with a coupler mode")
    exact = 0.5 * g0 ** 2 * np.sum(2.0 / det) * 1e-3
    estimate = m * g0 ** 2 / (f_q - fcs.mean()) * 1e-3
    return Enhancement(float(exact), float(estimate))


def rotated_coupler_parts(coupler: TwoModeCoupler) -> tuple:
    """(dressed frequencies, rotated g) for building a spec in the dressed-mode frame."""
    d = bogoliubov(coupler)
    return (d.f1t, d.f2t), d.gt
