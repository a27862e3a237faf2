"""Exact propagation under piecewise-constant Hamiltonians and iSWAP scans."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fock import dims_of, index_of
from .hamiltonian import SystemSpec, hamiltonian_matrix
from .overlap import computational_labels, diagonalize

PHASE_MASK_AMPLITUDE = 1e-6


@dataclass(frozen=True)
class Segment:
    spec: SystemSpec
    duration: float  # ns

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment durations must be positive")


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        layouts = {s.spec.levels for s in segs}
        if len(layouts) != 1:
            raise ValueError("all segments must share the same truncation")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, spec: SystemSpec, duration: float) -> "PulseSchedule":
        return cls((Segment(spec, duration),))

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def layout(self) -> tuple:
        return self.segments[0].spec.modes


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray  # ns
    states: np.ndarray  # (n_times, dim)
    layout: tuple

    def amplitude(self, label) -> np.ndarray:
        return self.states[:, index_of(label, self.layout)]

    def population(self, label) -> np.ndarray:
        return np.abs(self.amplitude(label)) ** 2

    def phase(self, label) -> np.ndarray:
        return np.angle(self.amplitude(label))

    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.states) ** 2, axis=1))


def _initial_state(psi0, layout) -> np.ndarray:
    dim = int(np.prod(dims_of(layout)))
    if isinstance(psi0, tuple) or (isinstance(psi0, list) and len(psi0) == len(layout)):
        v = np.zeros(dim, dtype=complex)
        v[index_of(psi0, layout)] = 1.0
        return v
    v = np.asarray(psi0, dtype=complex)
    if v.shape != (dim,):
        raise ValueError(f"initial state must be a basis label or a vector of length {dim}")
    return v


def sample_times(total: float, samples_per_ns: float) -> np.ndarray:
    n = int(round(total * samples_per_ns))
    t = np.arange(n + 1) / samples_per_ns
    if t[-1] < total - 1e-12:
        t = np.append(t, total)
    return np.minimum(t, total)


def propagate(energies, vectors, psi, times) -> np.ndarray:
    """States V exp(-2 pi i E t) V^+ psi at each time; psi may hold several columns."""
    c = vectors.conj().T @ psi
    phases = np.exp(-2j * np.pi * np.outer(times, energies))
    if c.ndim == 1:
        return (phases * c) @ vectors.T
    # (n_t, dim, n_states)
    return np.einsum("jk,tk,ks->tjs", vectors, phases, c, optimize=True)


def evolve(schedule: PulseSchedule, psi0, samples_per_ns: float = 10) -> EvolutionTrace:
    """Evolve ``psi0`` exactly through each rectangular segment."""
    layout = schedule.layout
    psi = _initial_state(psi0, layout)
    grid = sample_times(schedule.duration, samples_per_ns)
    out = np.empty((grid.size, psi.size), dtype=complex)
    t0 = 0.0
    filled = np.zeros(grid.size, dtype=bool)
    for k, seg in enumerate(schedule.segments):
        t1 = t0 + seg.duration
        last = k == len(schedule.segments) - 1
        sel = (grid >= t0 - 1e-12) & ((grid <= t1 + 1e-12) if last else (grid < t1 - 1e-12)) & ~filled
        eig = diagonalize(hamiltonian_matrix(seg.spec))
        E, V = eig.energies, eig.vectors
        if sel.any():
            out[sel] = propagate(E, V, psi, grid[sel] - t0)
            filled |= sel
        psi = propagate(E, V, psi, np.array([seg.duration]))[0]
        t0 = t1
    return EvolutionTrace(grid, out, tuple(layout))


def conditional_phase(t00: EvolutionTrace, t10: EvolutionTrace, t01: EvolutionTrace,
                      t11: EvolutionTrace, labels: Optional[Sequence] = None) -> np.ndarray:
    """Unwrapped arg<11|psi11> + arg<00|psi00> - arg<10|psi10> - arg<01|psi01>.

    Samples where any of the four amplitudes is below 1e-6 are NaN.
    """
    l00, l10, l01, l11 = labels or computational_labels(t00.layout)
    amps = [t11.amplitude(l11), t00.amplitude(l00), t10.amplitude(l10), t01.amplitude(l01)]
    return _cphase(*amps)


def _cphase(a11, a00, a10, a01) -> np.ndarray:
    raw = np.angle(a11) + np.angle(a00) - np.angle(a10) - np.angle(a01)
    ok = np.ones(raw.shape, dtype=bool)
    for a in (a11, a00, a10, a01):
        ok &= np.abs(a) >= PHASE_MASK_AMPLITUDE
    out = np.full(raw.shape, np.nan)
    if raw.ndim == 1:
        out[ok] = np.unwrap(raw[ok])
    else:
        for i in range(raw.shape[0]):
            out[i, ok[i]] = np.unwrap(raw[i, ok[i]])
    return out


def gate_time(times, population, fraction: float = 0.5) -> tuple:
    """First local maximum that reaches ``fraction`` of the global maximum.

    The peak position and height are refined by a parabola through the
    maximum sample and its neighbours.  Returns ``(t, p)``; ``(nan, nan)``
    when the trace has no interior maximum.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(population, dtype=float)
    if p.size < 3:
        return float("nan"), float("nan")
    level = fraction * p.max()
    interior = np.flatnonzero((p[1:-1] >= p[:-2]) & (p[1:-1] > p[2:]) & (p[1:-1] >= level)) + 1
    if interior.size == 0:
        return float("nan"), float("nan")
    i = int(interior[0])
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    den = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
    h = t[i + 1] - t[i]
    peak = y1 - 0.25 * (y0 - y2) * shift
    return float(t[i] + shift * h), float(peak)


@dataclass(frozen=True, eq=False)
class IswapScan:
    fa: np.ndarray  # GHz
    times: np.ndarray  # ns
    p0001: np.ndarray  # (n_fa, n_t), from |1000>
    p1000: np.ndarray  # (n_fa, n_t), from |1000>
    p1001: np.ndarray  # (n_fa, n_t), from |1001>
    phase1001: np.ndarray  # arg<1001|psi_11>, unwrapped
    cphase: np.ndarray  # four-state conditional phase
    qubits: tuple  # (label a, label b)

    def panels(self) -> dict:
        return {"p0001": self.p0001, "p1000": self.p1000, "p1001": self.p1001, "cphase": self.cphase}

    def gate_time(self, row: int) -> tuple:
        return gate_time(self.times, self.p0001[row])


def iswap_scan(spec: SystemSpec, fa_values, fb: Optional[float] = None, t_max: float = 100.0,
               samples_per_ns: float = 10, qubits: Optional[Sequence[str]] = None) -> IswapScan:
    """Sweep qubit a's frequency and record swap populations and phases.

    Each column is evolved from the four computational states under a
    constant Hamiltonian; the qubits default to the first and last modes.
    """
    qa, qb = qubits or (spec.labels[0], spec.labels[-1])
    if fb is not None:
        spec = spec.with_mode(qb, freq=float(fb))
    fa_values = np.atleast_1d(np.asarray(fa_values, dtype=float))
    if fa_values.size == 0:
        raise ValueError("empty f_a range")
    times = sample_times(t_max, samples_per_ns)
    slots = (spec.slot(qa), spec.slot(qb))
    l00, l10, l01, l11 = computational_labels(spec.modes, slots)
    idx = [index_of(x, spec.modes) for x in (l00, l10, l01, l11)]
    dim = spec.dim
    psi = np.zeros((dim, 4), dtype=complex)
    psi[idx, range(4)] = 1.0
    shape = (fa_values.size, times.size)
    p0001, p1000, p1001 = np.empty(shape), np.empty(shape), np.empty(shape)
    ph, amps = np.empty(shape), np.empty((4,) + shape, dtype=complex)
    for r, fa in enumerate(fa_values):
        eig = diagonalize(hamiltonian_matrix(spec.with_mode(qa, freq=float(fa))))
        V = eig.vectors
        # amplitudes <target|psi_s(t)> only for the four computational targets
        c = V.conj().T @ psi
        phases = np.exp(-2j * np.pi * np.outer(times, eig.energies))
        rows = V[idx, :]
        A = np.einsum("jk,tk,ks->tjs", rows, phases, c, optimize=True)  # (t, target, start)
        p0001[r] = np.abs(A[:, 2, 1]) ** 2
        p1000[r] = np.abs(A[:, 1, 1]) ** 2
        p1001[r] = np.abs(A[:, 3, 3]) ** 2
        ph[r] = np.unwrap(np.angle(A[:, 3, 3]))
        for s in range(4):
            amps[s, r] = A[:, s, s]
    cph = _cphase(amps[3], amps[0], amps[1], amps[2])
    return IswapScan(fa_values, times, p0001, p1000, p1001, ph, cph, (qa, qb))
