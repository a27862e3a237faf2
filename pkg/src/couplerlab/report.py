"""Single-point coupling report: J00, J01, J10, ZZ and selectivity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analytic import Qubits, ResonantDenominatorError, TwoModeCoupler, bogoliubov, selectivity_ratio, sw_J
from .hamiltonian import SystemSpec, build_hamiltonian
from .overlap import (LabeledSpectrum, ResonanceError, assign_states, computational_labels,
                      effective_hamiltonian, j_perturbative, zz_shift)

METHODS = ("procrustes", "perturbative", "sw")
J_NAMES = ("J00", "J01", "J10")


@dataclass(frozen=True)
class CouplingReport:
    J00: float  # MHz
    J01: float  # MHz
    J10: float  # MHz
    ZZ: float  # kHz
    ratio: float
    method: str
    valid: dict  # per quantity
    alt: dict = field(default_factory=dict)  # the other overlap extractor, side by side

    @property
    def all_valid(self) -> bool:
        return all(self.valid.values())

    def as_dict(self) -> dict:
        d = {"J00_mhz": self.J00, "J01_mhz": self.J01, "J10_mhz": self.J10, "ZZ_khz": self.ZZ,
             "ratio": self.ratio, "method": self.method, "valid": self.all_valid,
             "valid_detail": dict(self.valid)}
        for k, v in self.alt.items():
            d[f"{k}_mhz"] = v
        return d


def manifold_labels(spec: SystemSpec, qubits: Optional[Sequence[str]] = None) -> dict:
    """Bare labels used by the report, keyed by short names (00, 10, 01, 11, 20, 02)."""
    qa, qb = qubits or (spec.labels[0], spec.labels[-1])
    sa, sb = spec.slot(qa), spec.slot(qb)
    l00, l10, l01, l11 = computational_labels(spec.modes, (sa, sb))
    l20 = list(l00)
    l20[sa] = 2
    l02 = list(l00)
    l02[sb] = 2
    return {"00": l00, "10": l10, "01": l01, "11": l11, "20": tuple(l20), "02": tuple(l02)}


def two_mode_coupler(spec: SystemSpec, qubits: Optional[Sequence[str]] = None):
    """(TwoModeCoupler, Qubits, g_ab in MHz) for a qubit-mode-mode-qubit spec."""
    qa, qb = qubits or (spec.labels[0], spec.labels[-1])
    modes = [m for m in spec.labels if m not in (qa, qb)]
    if len(modes) != 2:
        raise ValueError("the analytic pipeline needs exactly two coupler modes")
    m1, m2 = modes

    def g(a, b):
        try:
            return spec.coupling(a, b).g
        except KeyError:
            return 0.0

    coupler = TwoModeCoupler(spec.mode(m1).freq, spec.mode(m2).freq, g(m1, m2) * 1e-3,
                             [[g(qa, m1), g(qa, m2)], [g(qb, m1), g(qb, m2)]])
    A, B = spec.mode(qa), spec.mode(qb)
    return coupler, Qubits(A.freq, B.freq, A.anharm, B.anharm), g(qa, qb)


def sw_report_values(spec: SystemSpec, qubits=None) -> dict:
    """Second-order couplings (MHz) including the direct qubit-qubit term.

    The direct coupling enters as -g_ab, the sign it takes in the
    effective-Hamiltonian convention used by the overlap extractors.
    """
    coupler, q, gab = two_mode_coupler(spec, qubits)
    dressed = bogoliubov(coupler)
    out = {}
    for name, (m, n) in zip(J_NAMES, ((0, 0), (0, 1), (1, 0))):
        try:
            out[name] = sw_J(m, n, dressed, q) - gab
        except ResonantDenominatorError:
            out[name] = float("nan")
    return out


def overlap_couplings(spectrum: LabeledSpectrum, labels: dict, method: str) -> tuple:
    """(values, validity) of J00, J01, J10 in MHz from one labeled spectrum."""
    pairs = {"J00": (labels["10"], labels["01"]),
             "J01": (labels["11"], labels["02"]),
             "J10": (labels["20"], labels["11"])}
    one = effective_hamiltonian(spectrum, [labels["10"], labels["01"]], allow_invalid=True)
    two = effective_hamiltonian(spectrum, [labels["20"], labels["11"], labels["02"]], allow_invalid=True)
    vals, ok = {}, {}
    for name, (a, b) in pairs.items():
        heff = one if name == "J00" else two
        proc = heff.coupling_mhz(a, b)
        valid = spectrum.valid[a] and spectrum.valid[b]
        if method == "perturbative":
            try:
                vals[name] = j_perturbative(spectrum, (a, b))
            except ResonanceError:
                vals[name] = proc
                valid = False
        else:
            vals[name] = proc
        ok[name] = valid
    return vals, ok


def coupling_report(spec: SystemSpec, method: str = "procrustes",
                    qubits: Optional[Sequence[str]] = None) -> CouplingReport:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    labels = manifold_labels(spec, qubits)
    spectrum = assign_states(build_hamiltonian(spec), list(labels.values()), spec.options.epsilon)
    zz = zz_shift(spectrum, [labels[k] for k in ("00", "10", "01", "11")], allow_invalid=True)
    zz_ok = spectrum.all_valid([labels[k] for k in ("00", "10", "01", "11")])
    alt = {}
    if method == "sw":
        vals = sw_report_values(spec, qubits)
        ok = {k: bool(np.isfinite(v)) for k, v in vals.items()}
    else:
        vals, ok = overlap_couplings(spectrum, labels, method)
        other = "perturbative" if method == "procrustes" else "procrustes"
        ovals, ook = overlap_couplings(spectrum, labels, other)
        alt = {f"{k}_{other}": (v if ook[k] or other == "procrustes" else float("nan"))
               for k, v in ovals.items()}
    valid = dict(ok, ZZ=zz_ok)
    ratio = selectivity_ratio(vals["J00"], vals["J01"], vals["J10"])
    if any(math.isnan(vals[k]) for k in J_NAMES):
        ratio = float("nan")
    return CouplingReport(vals["J00"], vals["J01"], vals["J10"], zz, ratio, method, valid, alt)
