"""System specification and Hamiltonian assembly.

H = sum_k [f_k n_k + (d_k/2)(n_k - 1) n_k] + sum_(a,b) g_ab X_ab, with
X_ab = -(A - A^+)(B - B^+) for capacitive ("full") couplings and
X_ab = A^+ B + A B^+ for rotating-wave couplings.  All in GHz.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .fock import ModeSpec, OperatorMatrix, dims_of, embed, lift, ladder, occupation_table, partial_trace

COUPLING_FORMS = ("full", "rwa")
DEFAULT_EPSILON = 0.5 + 1e-9


@dataclass(frozen=True)
class CouplingSpec:
    """Bilinear coupling between two modes; ``g`` is given in MHz."""

    a: str
    b: str
    g: float
    form: str = "full"

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"coupling {self.a}-{self.b} couples a mode to itself")
        if not np.isfinite(self.g):
            raise ValueError(f"coupling {self.a}-{self.b}: g must be finite")
        if self.form not in COUPLING_FORMS:
            raise ValueError(f"coupling {self.a}-{self.b}: unknown form {self.form!r}")

    @property
    def key(self) -> str:
        return f"{self.a}-{self.b}"


@dataclass(frozen=True)
class SpecOptions:
    epsilon: float = DEFAULT_EPSILON
    rwa_all: bool = False

    def __post_init__(self):
        if not 0.5 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in the open interval (0.5, 1)")


@dataclass(frozen=True)
class SystemSpec:
    modes: tuple
    couplings: tuple = ()
    options: SpecOptions = field(default_factory=SpecOptions)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels in {labels}")
        if not labels:
            raise ValueError("a system needs at least one mode")
        for c in self.couplings:
            for lab in (c.a, c.b):
                if lab not in labels:
                    raise ValueError(f"coupling {c.key} references unknown mode {lab!r}")

    @property
    def labels(self) -> tuple:
        return tuple(m.label for m in self.modes)

    @property
    def levels(self) -> tuple:
        return tuple(m.levels for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.levels))

    def slot(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown mode label {label!r}") from None

    def mode(self, label: str) -> ModeSpec:
        return self.modes[self.slot(label)]

    def coupling(self, a: str, b: str) -> CouplingSpec:
        for c in self.couplings:
            if {c.a, c.b} == {a, b}:
                return c
        raise KeyError(f"no coupling between {a!r} and {b!r}")

    def with_mode(self, label: str, **changes) -> "SystemSpec":
        modes = list(self.modes)
        k = self.slot(label)
        modes[k] = replace(modes[k], **changes)
        return replace(self, modes=tuple(modes))

    def with_coupling(self, a: str, b: str, **changes) -> "SystemSpec":
        target = self.coupling(a, b)
        cs = tuple(replace(c, **changes) if c is target else c for c in self.couplings)
        return replace(self, couplings=cs)

    def with_levels(self, levels) -> "SystemSpec":
        if np.isscalar(levels):
            levels = [int(levels)] * len(self.modes)
        if len(levels) != len(self.modes):
            raise ValueError(f"expected {len(self.modes)} truncation levels, got {len(levels)}")
        modes = tuple(replace(m, levels=int(n)) for m, n in zip(self.modes, levels))
        return replace(self, modes=modes)

    def with_options(self, **changes) -> "SystemSpec":
        return replace(self, options=replace(self.options, **changes))

    def scaled_couplings(self, factor: float) -> "SystemSpec":
        return replace(self, couplings=tuple(replace(c, g=c.g * factor) for c in self.couplings))

    def as_rwa(self) -> "SystemSpec":
        return replace(self, couplings=tuple(replace(c, form="rwa") for c in self.couplings))


@lru_cache(maxsize=16)
def _lifted_ladders(dims: tuple) -> tuple:
    out = []
    for k, d in enumerate(dims):
        a = lift(ladder(d), k, dims).entries
        out.append(a)
    return tuple(out)


@lru_cache(maxsize=256)
def coupling_term(dims: tuple, i: int, j: int, form: str) -> np.ndarray:
    """Unit-strength coupling matrix between slots i and j (real, symmetric)."""
    ops = _lifted_ladders(dims)
    a, b = ops[i], ops[j]
    if form == "full":
        m = -(a - a.T) @ (b - b.T)
    else:
        m = a.T @ b + a @ b.T
    m.flags.writeable = False
    return m


def mode_energies(spec: SystemSpec) -> np.ndarray:
    """Diagonal of the uncoupled Hamiltonian (Duffing ladders), GHz."""
    occ = occupation_table(spec.levels)
    diag = np.zeros(occ.shape[0])
    for k, m in enumerate(spec.modes):
        n = occ[:, k]
        diag += m.freq * n + 0.5 * m.anharm * (n - 1) * n
    return diag


def hamiltonian_matrix(spec: SystemSpec) -> np.ndarray:
    """Real symmetric Hamiltonian matrix in GHz."""
    dims = spec.levels
    h = np.diag(mode_energies(spec))
    for c in spec.couplings:
        if c.g == 0.0:
            continue
        form = "rwa" if spec.options.rwa_all else c.form
        h += (c.g * 1e-3) * coupling_term(dims, spec.slot(c.a), spec.slot(c.b), form)
    return h


def build_hamiltonian(spec: SystemSpec) -> OperatorMatrix:
    h = OperatorMatrix(hamiltonian_matrix(spec), spec.modes)
    err = h.hermiticity_error()
    assert err < 1e-12, f"Hamiltonian not Hermitian (max deviation {err:g})"
    return h


def _check_partition(labels: Sequence[str], partition) -> list:
    groups = [list(g) for g in partition]
    flat = [x for g in groups for x in g]
    if sorted(flat) != sorted(labels) or len(set(flat)) != len(flat):
        raise ValueError(f"partition {groups} is not a disjoint cover of {list(labels)}")
    return groups


def sub_spec(spec: SystemSpec, group: Sequence[str]) -> SystemSpec:
    """Restriction of ``spec`` to the modes of ``group`` with intra-group couplings only."""
    group = list(group)
    modes = tuple(spec.mode(lab) for lab in group)
    cs = tuple(c for c in spec.couplings if c.a in group and c.b in group)
    return SystemSpec(modes, cs, spec.options)


def build_blocks(spec: SystemSpec, partition) -> list:
    groups = _check_partition(spec.labels, partition)
    return [build_hamiltonian(sub_spec(spec, g)) for g in groups]


def assemble_blocks(blocks: Sequence[OperatorMatrix], partition, spec: SystemSpec) -> np.ndarray:
    """Sum of the block Hamiltonians embedded into the full registration-order basis."""
    groups = _check_partition(spec.labels, partition)
    out = np.zeros((spec.dim, spec.dim), dtype=np.result_type(*[b.entries for b in blocks]))
    for blk, g in zip(blocks, groups):
        out += embed(blk, [spec.slot(x) for x in g], spec.modes)
    return out


def verify_block_decoupling(H: OperatorMatrix, partition) -> float:
    """Largest matrix element of H that is not a sum of group-local terms (GHz).

    The local part is reconstructed from normalized partial traces onto each
    group, so the residual contains exactly the terms acting nontrivially on
    more than one group.
    """
    layout = H.layout
    if H.labels:
        slots_of = {lab: k for k, lab in enumerate(H.labels)}
        groups = _check_partition(H.labels, partition)
        slot_groups = [[slots_of[x] for x in g] for g in groups]
    else:
        slot_groups = _check_partition(list(range(len(H.dims))), partition)
        layout = H.dims
    dims = dims_of(layout)
    m = np.asarray(H.entries)
    total = m.shape[0]
    mean = np.trace(m) / total
    local = -(len(slot_groups) - 1) * mean * np.eye(total)
    for g in slot_groups:
        d_rest = total // int(np.prod([dims[k] for k in g]))
        local = local + embed(partial_trace(m, g, dims) / d_rest, g, dims)
    return float(np.max(np.abs(m - local)))
