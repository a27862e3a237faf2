"""Truncated Fock-space operators and basis bookkeeping.

Energies are linear frequencies in GHz throughout the package; a basis
label is a tuple of occupation numbers, one per mode, and the composite
basis is enumerated row-major in mode registration order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence, Union

import numpy as np

BasisLabel = tuple  # tuple[int, ...]

MODE_KINDS = ("transmon", "linear")


@dataclass(frozen=True)
class ModeSpec:
    """A single bosonic mode.

    Parameters
    ----------
    label : str
        Identifier used by couplings and parameter paths.
    kind : {"transmon", "linear"}
    freq : float
        Linear frequency in GHz.
    anharm : float
        Anharmonicity in GHz (zero for linear modes).
    levels : int
        Truncation dimension.
    """

    label: str
    kind: str = "transmon"
    freq: float = 4.0
    anharm: float = 0.0
    levels: int = 5

    def __post_init__(self):
        if self.kind not in MODE_KINDS:
            raise ValueError(f"mode {self.label!r}: unknown kind {self.kind!r}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"mode {self.label!r}: levels must be an integer >= 2")
        if not np.isfinite(self.freq) or not np.isfinite(self.anharm):
            raise ValueError(f"mode {self.label!r}: frequency and anharmonicity must be finite")
        if self.kind == "linear" and self.anharm != 0.0:
            raise ValueError(f"mode {self.label!r}: linear modes have zero anharmonicity")


Layout = Union[Sequence[ModeSpec], Sequence[int]]


def dims_of(layout: Layout) -> tuple:
    """Truncation dimensions of a layout given as modes or plain integers."""
    out = []
    for m in layout:
        d = m.levels if isinstance(m, ModeSpec) else int(m)
        if d < 1:
            raise ValueError("dimensions must be positive")
        out.append(d)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense square matrix acting on the composite Fock space of ``layout``."""

    entries: np.ndarray
    layout: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        if self.layout and int(np.prod(dims_of(self.layout))) != m.shape[0]:
            raise ValueError("matrix dimension does not match the layout")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "layout", tuple(self.layout))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dims(self) -> tuple:
        return dims_of(self.layout) if self.layout else (self.dim,)

    @property
    def basis(self) -> list:
        return basis_labels(self.dims)

    @property
    def labels(self) -> tuple:
        """Mode labels of the layout (empty for integer layouts)."""
        return tuple(m.label for m in self.layout if isinstance(m, ModeSpec))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.layout)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def _wrap(self, other):
        return other.entries if isinstance(other, OperatorMatrix) else other

    def __matmul__(self, other):
        return OperatorMatrix(self.entries @ self._wrap(other), self.layout)

    def __add__(self, other):
        return OperatorMatrix(self.entries + self._wrap(other), self.layout)

    def __sub__(self, other):
        return OperatorMatrix(self.entries - self._wrap(other), self.layout)

    def __mul__(self, scalar):
        return OperatorMatrix(self.entries * scalar, self.layout)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(-self.entries, self.layout)


def ladder(mode: Union[ModeSpec, int]) -> OperatorMatrix:
    """Annihilation operator with <n-1|a|n> = sqrt(n)."""
    levels = mode.levels if isinstance(mode, ModeSpec) else int(mode)
    if levels < 2:
        raise ValueError("ladder operator needs at least two levels")
    layout = (mode,) if isinstance(mode, ModeSpec) else (levels,)
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1.0, levels)), k=1), layout)


def number(mode: Union[ModeSpec, int]) -> OperatorMatrix:
    a = ladder(mode)
    return a.dag() @ a


def lift(op, slot: int, layout: Layout) -> OperatorMatrix:
    """Embed a single-mode operator as I x ... x op x ... x I."""
    dims = dims_of(layout)
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} modes")
    m = np.asarray(op.entries if isinstance(op, OperatorMatrix) else op)
    if m.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator of shape {m.shape} does not fit slot {slot} with {dims[slot]} levels")
    left = int(np.prod(dims[:slot]))
    right = int(np.prod(dims[slot + 1:]))
    full = np.kron(np.kron(np.eye(left), m), np.eye(right))
    return OperatorMatrix(full, tuple(layout))


def index_of(label: Iterable[int], layout: Layout) -> int:
    dims = dims_of(layout)
    label = tuple(int(n) for n in label)
    if len(label) != len(dims):
        raise ValueError(f"label {label} has {len(label)} entries, layout has {len(dims)} modes")
    for n, d in zip(label, dims):
        if not 0 <= n < d:
            raise ValueError(f"occupation {n} outside truncation {d} in label {label}")
    return int(np.ravel_multi_index(label, dims))


def label_of(index: int, layout: Layout) -> BasisLabel:
    dims = dims_of(layout)
    total = int(np.prod(dims))
    if not 0 <= index < total:
        raise ValueError(f"index {index} outside [0, {total})")
    return tuple(int(n) for n in np.unravel_index(index, dims))


@lru_cache(maxsize=64)
def basis_labels(dims: tuple) -> list:
    return [tuple(lab) for lab in product(*(range(d) for d in dims))]


@lru_cache(maxsize=64)
def occupation_table(dims: tuple) -> np.ndarray:
    """Array of shape (dim, n_modes) with the occupation of each basis state."""
    occ = np.array(np.unravel_index(np.arange(int(np.prod(dims))), dims)).T
    occ.flags.writeable = False
    return occ


def embed(op, slots: Sequence[int], layout: Layout) -> np.ndarray:
    """Embed an operator acting on ``slots`` (in that order) into the full space."""
    dims = dims_of(layout)
    slots = list(slots)
    rest = [k for k in range(len(dims)) if k not in slots]
    sub = [dims[k] for k in slots]
    m = np.asarray(op.entries if isinstance(op, OperatorMatrix) else op)
    n_rest = int(np.prod([dims[k] for k in rest])) if rest else 1
    big = np.kron(m, np.eye(n_rest))
    # big acts on the ordering slots + rest; permute back to registration order
    order = slots + rest
    shape = sub + [dims[k] for k in rest]
    t = big.reshape(shape + shape)
    inv = np.argsort(order)
    n = len(dims)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(int(np.prod(dims)), int(np.prod(dims)))


def partial_trace(mat, keep: Sequence[int], layout: Layout) -> np.ndarray:
    """Trace out every slot not in ``keep``; the kept slots stay in the given order."""
    dims = dims_of(layout)
    n = len(dims)
    keep = list(keep)
    drop = [k for k in range(n) if k not in keep]
    t = np.asarray(mat).reshape(dims + dims)
    t = t.transpose(keep + drop + [n + k for k in keep] + [n + k for k in drop])
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    dd = int(np.prod([dims[k] for k in drop])) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)
