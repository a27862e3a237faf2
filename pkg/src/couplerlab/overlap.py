"""Overlap-method extraction of effective couplings.

Dressed eigenvectors are matched to bare product states by maximal
overlap, the reduced overlap matrix is projected onto the nearest unitary
(orthogonal Procrustes), and the dressed energies are rotated back into
the bare labels to give an effective Hamiltonian whose off-diagonal
elements are the couplings.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .fock import OperatorMatrix, dims_of, index_of
from .hamiltonian import DEFAULT_EPSILON


class InvalidAssignmentError(ValueError):
    """Raised when an extraction needs labels whose assignment is not valid."""


class ResonanceError(InvalidAssignmentError):
    """The perturbative extractor was asked for a hybridized (resonant) pair."""


class RankDeficientWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Ascending energies (GHz) and gauge-fixed eigenvectors stored as columns."""

    energies: np.ndarray
    vectors: np.ndarray
    layout: tuple
    bare_energies: np.ndarray

    @property
    def dims(self) -> tuple:
        return dims_of(self.layout)


def _block_eigh(h: np.ndarray):
    # Parity / excitation-number symmetries make H block diagonal in the
    # product basis; diagonalizing the connected components is exact and cheaper.
    dim = h.shape[0]
    n_comp, comp = connected_components(csr_matrix(np.abs(h) > 0), directed=False)
    if n_comp == 1:
        return np.linalg.eigh(h)
    energies = np.empty(dim)
    vectors = np.zeros((dim, dim), dtype=h.dtype)
    col = 0
    for c in range(n_comp):
        idx = np.flatnonzero(comp == c)
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        n = idx.size
        energies[col:col + n] = w
        vectors[idx, col:col + n] = v
        col += n
    order = np.argsort(energies, kind="stable")
    return energies[order], vectors[:, order]


def fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude component real and positive."""
    k = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[k, np.arange(vectors.shape[1])]
    return vectors * (np.conj(pivot) / np.abs(pivot))


def diagonalize(H) -> Eigensystem:
    """Full eigendecomposition of a Hermitian operator."""
    if isinstance(H, Eigensystem):
        return H
    if isinstance(H, OperatorMatrix):
        m, layout = np.asarray(H.entries), H.layout or (H.dim,)
    else:
        m = np.asarray(H)
        layout = (m.shape[0],)
    if np.iscomplexobj(m) and not np.any(m.imag):
        m = m.real
    energies, vectors = _block_eigh(m)
    return Eigensystem(energies, fix_gauge(vectors), tuple(layout), np.real(np.diag(m)).copy())


@dataclass(frozen=True, eq=False)
class LabeledSpectrum:
    """Eigensystem plus a bare-label assignment with validity metadata."""

    eig: Eigensystem
    labels: tuple
    assignment: dict
    overlaps: dict
    pr: dict
    valid: dict
    epsilon: float = DEFAULT_EPSILON
    manual: frozenset = field(default_factory=frozenset)

    @property
    def energies(self) -> np.ndarray:
        return self.eig.energies

    @property
    def vectors(self) -> np.ndarray:
        return self.eig.vectors

    @property
    def layout(self) -> tuple:
        return self.eig.layout

    def energy(self, label) -> float:
        return float(self.eig.energies[self.assignment[tuple(label)]])

    def vector(self, label) -> np.ndarray:
        return self.eig.vectors[:, self.assignment[tuple(label)]]

    def all_valid(self, labels: Optional[Sequence] = None) -> bool:
        labels = self.labels if labels is None else [tuple(x) for x in labels]
        return all(self.valid[x] for x in labels)


def participation_ratio(vector, bare_basis=None) -> float:
    """Inverse purity of the state's weight distribution over the bare basis."""
    v = np.asarray(vector)
    if bare_basis is not None:
        v = np.asarray(bare_basis).conj().T @ v
    p = np.abs(v) ** 2
    norm = p.sum()
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"participation ratio needs a normalized vector (norm^2 = {norm:.3g})")
    return float(1.0 / np.sum(p ** 2))


def assign_states(H, bare_labels: Sequence, epsilon: float = DEFAULT_EPSILON,
                  manual: Optional[Mapping] = None) -> LabeledSpectrum:
    """Match each bare label to the dressed eigenvector it overlaps most.

    Labels whose best overlap^2 does not exceed ``epsilon``, or that compete
    for the same eigenvector, are flagged invalid.  Competing labels are
    resolved automatically: the eigenvectors with the largest total weight
    on the tied labels are handed out in energy order to the labels sorted
    by bare energy.  ``manual`` maps labels to eigenindices and overrides
    the automatic choice.
    """
    eig = diagonalize(H)
    labels = [tuple(int(n) for n in lab) for lab in bare_labels]
    if len(set(labels)) != len(labels):
        raise ValueError("bare labels must be distinct")
    rows = np.array([index_of(lab, eig.layout) for lab in labels], dtype=int)
    weights = np.abs(eig.vectors[rows, :]) ** 2
    choice = np.argmax(weights, axis=1)
    manual = {tuple(k): int(v) for k, v in (manual or {}).items()}

    assigned = {}
    collided = set()
    claims = {}
    for r, lab in enumerate(labels):
        if lab in manual:
            assigned[r] = manual[lab]
        else:
            claims.setdefault(int(choice[r]), []).append(r)
    taken = set(assigned.values())
    for e, rs in claims.items():
        if len(rs) == 1 and e not in taken:
            assigned[rs[0]] = e
            taken.add(e)
    for e, rs in sorted(claims.items()):
        if len(rs) == 1 and assigned.get(rs[0]) == e:
            continue
        rs = [r for r in rs if r not in assigned]
        if not rs:
            continue
        collided.update(rs)
        score = weights[rs].sum(axis=0)
        score[list(taken)] = -1.0
        cand = np.argsort(-score, kind="stable")[:len(rs)]
        cand = sorted(cand, key=lambda i: (eig.energies[i], i))
        by_bare = sorted(rs, key=lambda r: (eig.bare_energies[rows[r]], rows[r]))
        for r, i in zip(by_bare, cand):
            assigned[r] = int(i)
            taken.add(int(i))

    assignment, overlaps, prs, valid = {}, {}, {}, {}
    for r, lab in enumerate(labels):
        i = assigned[r]
        assignment[lab] = i
        overlaps[lab] = float(weights[r, i])
        prs[lab] = participation_ratio(eig.vectors[:, i])
        if lab in manual:
            valid[lab] = True
        else:
            valid[lab] = bool(overlaps[lab] > epsilon and r not in collided)
    return LabeledSpectrum(eig, tuple(labels), assignment, overlaps, prs, valid,
                           float(epsilon), frozenset(manual))


def nearest_unitary(Ur) -> np.ndarray:
    """Closest unitary to ``Ur`` in Frobenius norm, W V^+ from Ur = W S V^+."""
    m = np.asarray(Ur)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("nearest_unitary needs a square matrix")
    w, s, vh = np.linalg.svd(m)
    if s[-1] < 1e-8:
        warnings.warn(f"reduced overlap matrix is nearly singular (sigma_min = {s[-1]:.2e})",
                      RankDeficientWarning, stacklevel=2)
    return w @ vh


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """Effective Hamiltonian on a set of bare labels (GHz).

    ``U_r[i, j] = <phi_j|psi_i>`` with rows indexed by the dressed states
    assigned to the subspace labels, ``U`` its nearest unitary and
    ``H_eff = U diag(E) U^+``.
    """

    subspace: tuple
    energies: np.ndarray
    U_r: np.ndarray
    U: np.ndarray
    H_eff: np.ndarray
    singular_values: np.ndarray
    valid: bool

    def coupling(self, a, b) -> complex:
        """Coupling J between labels a and b, i.e. <phi_b|H_eff|phi_a>, in GHz."""
        i = self.subspace.index(tuple(a))
        j = self.subspace.index(tuple(b))
        return self.H_eff[j, i]

    def coupling_mhz(self, a, b) -> float:
        return float(np.real(self.coupling(a, b))) * 1e3

    def bare_projection(self) -> np.ndarray:
        """sum_i E_i |psi_i><psi_i| written in the bare labels using U."""
        return self.U.T @ np.diag(self.energies) @ self.U.conj()


def _require_valid(spectrum: LabeledSpectrum, labels, allow_invalid: bool, exc=InvalidAssignmentError):
    bad = [lab for lab in labels if not spectrum.valid[lab]]
    if bad and not allow_invalid:
        raise exc(f"assignment not valid for {bad} (overlap^2 at or below epsilon or tied)")
    return not bad


def effective_hamiltonian(spectrum: LabeledSpectrum, subspace: Sequence,
                          allow_invalid: bool = False) -> EffectiveHamiltonian:
    labels = tuple(tuple(x) for x in subspace)
    missing = [x for x in labels if x not in spectrum.assignment]
    if missing:
        raise KeyError(f"labels {missing} were not assigned")
    ok = _require_valid(spectrum, labels, allow_invalid)
    bare = [index_of(x, spectrum.layout) for x in labels]
    dressed = [spectrum.assignment[x] for x in labels]
    Ur = spectrum.vectors[np.ix_(bare, dressed)].T
    energies = spectrum.energies[dressed]
    s = np.linalg.svd(Ur, compute_uv=False)
    U = nearest_unitary(Ur)
    H = U @ np.diag(energies) @ U.conj().T
    H = 0.5 * (H + H.conj().T)
    return EffectiveHamiltonian(labels, energies, Ur, U, H, s, ok)


def rotation_fit(Ur) -> tuple:
    """Best fit of [[cos t, e^{ip} sin t], [-e^{-ip} sin t, cos t]] to a 2x2 matrix.

    Returns ``(theta, phi)`` with theta in [0, pi].
    """
    u = np.asarray(Ur)
    w = np.conj(u[0, 1]) - u[1, 0]
    theta = float(np.arctan2(np.abs(w), np.real(u[0, 0] + u[1, 1])))
    phi = float(-np.angle(w)) if np.abs(w) > 0 else 0.0
    return theta, phi


def j_perturbative(spectrum: LabeledSpectrum, pair: Sequence) -> float:
    """Coupling between two weakly hybridized labels from a single mixing angle, MHz.

    J = -(E_a - E_b) sin(theta) e^{-i phi}; same sign convention as
    ``EffectiveHamiltonian.coupling(pair[0], pair[1])``.
    """
    a, b = (tuple(x) for x in pair)
    _require_valid(spectrum, (a, b), False, ResonanceError)
    ia, ib = index_of(a, spectrum.layout), index_of(b, spectrum.layout)
    da, db = spectrum.assignment[a], spectrum.assignment[b]
    Ur = spectrum.vectors[np.ix_([ia, ib], [da, db])].T
    theta, phi = rotation_fit(Ur)
    J = -(spectrum.energies[da] - spectrum.energies[db]) * np.sin(theta) * np.exp(-1j * phi)
    if abs(J.imag) > 1e-9 * max(abs(J), 1e-15):
        raise ValueError("perturbative coupling is complex; use effective_hamiltonian")
    return float(J.real) * 1e3


def computational_labels(layout, qubit_slots: Optional[Sequence[int]] = None) -> tuple:
    """Labels |00>, |10>, |01>, |11> with the qubits on ``qubit_slots`` (default first and last)."""
    n = len(dims_of(layout))
    qa, qb = qubit_slots if qubit_slots is not None else (0, n - 1)
    out = []
    for ma, mb in ((0, 0), (1, 0), (0, 1), (1, 1)):
        lab = [0] * n
        lab[qa], lab[qb] = ma, mb
        out.append(tuple(lab))
    return tuple(out)


def zz_shift(spectrum: LabeledSpectrum, labels: Optional[Sequence] = None,
             allow_invalid: bool = False) -> float:
    """E11 + E00 - E10 - E01 over the assigned computational states, kHz."""
    l00, l10, l01, l11 = (tuple(x) for x in (labels or computational_labels(spectrum.layout)))
    _require_valid(spectrum, (l00, l10, l01, l11), allow_invalid)
    e = spectrum.energy
    return (e(l11) + e(l00) - e(l10) - e(l01)) * 1e6


def blockwise_effective(H, regions: Sequence[Sequence], epsilon: float = DEFAULT_EPSILON,
                        allow_invalid: bool = False) -> list:
    """Independent effective Hamiltonians for disjoint label regions of one spectrum."""
    regions = [[tuple(x) for x in r] for r in regions]
    flat = [x for r in regions for x in r]
    if len(set(flat)) != len(flat):
        raise ValueError("regions must be disjoint")
    spectrum = H if isinstance(H, LabeledSpectrum) else assign_states(H, flat, epsilon)
    return [effective_hamiltonian(spectrum, r, allow_invalid) for r in regions]
