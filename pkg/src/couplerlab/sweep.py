"""Two-dimensional parameter sweeps, grid export and bundled figure protocols."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import ConfigError, apply_path, spec_from_dict, spec_hash, spec_to_dict, table1_spec
from .hamiltonian import SystemSpec
from .report import METHODS, coupling_report

OUTPUTS = ("J00", "J01", "J10", "ZZ", "ratio", "validity")
ALT_OUTPUTS = tuple(f"{j}_{m}" for j in ("J00", "J01", "J10") for m in ("procrustes", "perturbative"))
THREADS_ENV = "COUPLERLAB_THREADS"
PROTOCOL_RANGE = (2.8, 3.6)


@dataclass(frozen=True)
class Axis:
    path: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"axis {self.path}: points must be an integer >= 2")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.points))

    def as_dict(self) -> dict:
        return {"path": self.path, "start": self.start, "stop": self.stop, "points": self.points}


@dataclass(frozen=True)
class SweepSpec:
    base: SystemSpec
    axis1: Axis
    axis2: Axis
    outputs: tuple = OUTPUTS
    method: str = "procrustes"
    notes: tuple = ()

    def __post_init__(self):
        bad = [o for o in self.outputs if o not in OUTPUTS + ALT_OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        for ax in (self.axis1, self.axis2):
            apply_path(self.base, ax.path, ax.start)


@dataclass(frozen=True, eq=False)
class GridResult:
    axis1: np.ndarray
    axis2: np.ndarray
    data: dict  # name -> (n1, n2) array
    valid: dict  # name -> (n1, n2) bool array
    metadata: dict = field(default_factory=dict)

    def __getitem__(self, name) -> np.ndarray:
        return self.data[name]


def _cell_values(spec: SystemSpec, method: str) -> dict:
    rep = coupling_report(spec, method)
    vals = {"J00": rep.J00, "J01": rep.J01, "J10": rep.J10, "ZZ": rep.ZZ, "ratio": rep.ratio,
            "validity": float(rep.all_valid)}
    ok = {"J00": rep.valid["J00"], "J01": rep.valid["J01"], "J10": rep.valid["J10"],
          "ZZ": rep.valid["ZZ"], "validity": True}
    ok["ratio"] = ok["J00"] and ok["J01"] and ok["J10"]
    for j in ("J00", "J01", "J10"):
        vals[f"{j}_{method}"] = vals[j]
        ok[f"{j}_{method}"] = ok[j]
    for k, v in rep.alt.items():
        vals[k] = v
        ok[k] = ok[k.split("_")[0]] and bool(np.isfinite(v))
    return {"values": vals, "valid": ok}


def _row(args) -> list:
    base, p1, v1, p2, values2, method = args
    spec1 = apply_path(base, p1, v1)
    return [_cell_values(apply_path(spec1, p2, v2), method) for v2 in values2]


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        try:
            threads = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    return threads


def run_sweep(s: SweepSpec, threads: Optional[int] = None) -> GridResult:
    """Evaluate the requested outputs on every grid cell.

    Rows (axis 1) are distributed over a process pool; results are placed by
    index so the grid does not depend on execution order.
    """
    threads = resolve_threads(threads)
    v1, v2 = s.axis1.values, s.axis2.values
    jobs = [(s.base, s.axis1.path, x, s.axis2.path, v2, s.method) for x in v1]
    if threads == 1:
        rows = [_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row, jobs))
    shape = (v1.size, v2.size)
    data = {o: np.full(shape, np.nan) for o in s.outputs}
    valid = {o: np.zeros(shape, dtype=bool) for o in s.outputs}
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            for o in s.outputs:
                data[o][i, j] = cell["values"].get(o, np.nan)
                valid[o][i, j] = cell["valid"].get(o, False)
    meta = {
        "spec_hash": spec_hash(s.base),
        "truncation": list(s.base.levels),
        "epsilon": s.base.options.epsilon,
        "tool_version": __version__,
        "method": s.method,
        "axis1": s.axis1.as_dict(),
        "axis2": s.axis2.as_dict(),
        "units": {"J00": "MHz", "J01": "MHz", "J10": "MHz", "ZZ": "kHz", "ratio": "1", "validity": "1"},
        "notes": list(s.notes),
    }
    return GridResult(v1, v2, data, valid, meta)


def format_value(x: float) -> str:
    return "nan" if np.isnan(x) else ("inf" if np.isposinf(x) else f"{x:.12g}")


def write_grid_csv(path, axis1, axis2, values, valid) -> None:
    lines = ["axis1,axis2,value,valid"]
    for i, a in enumerate(axis1):
        for j, b in enumerate(axis2):
            lines.append(f"{format_value(a)},{format_value(b)},{format_value(values[i, j])},"
                         f"{int(bool(valid[i, j]))}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path) -> tuple:
    raw = np.genfromtxt(path, delimiter=",", names=True)
    a1 = np.unique(raw["axis1"])
    a2 = np.unique(raw["axis2"])
    shape = (a1.size, a2.size)
    return a1, a2, raw["value"].reshape(shape), raw["valid"].reshape(shape).astype(bool)


def write_result(result: GridResult, out_dir, prefix: str = "", extra: Optional[dict] = None) -> dict:
    """One CSV per output plus ``<prefix>manifest.json``; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, arr in result.data.items():
        fname = f"{prefix}{name}.csv"
        write_grid_csv(out / fname, result.axis1, result.axis2, arr, result.valid[name])
        files[name] = fname
    manifest = dict(result.metadata, files=files)
    if extra:
        manifest.update(extra)
    (out / f"{prefix}manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def sweep_from_dict(doc: dict, base: Optional[SystemSpec] = None) -> SweepSpec:
    """Build a sweep from a document with ``system`` (or top-level system keys) and ``sweep``."""
    try:
        sw = doc["sweep"]
        if base is None:
            base = spec_from_dict(doc.get("system", doc))
        axes = [Axis(a["path"], float(a["start"]), float(a["stop"]), int(a["points"]))
                for a in (sw["axis1"], sw["axis2"])]
        return SweepSpec(base, axes[0], axes[1], tuple(sw.get("outputs", OUTPUTS)),
                         sw.get("method", "procrustes"))
    except KeyError as exc:
        raise ConfigError(f"sweep description lacks {exc}") from exc


def mode_frequency_sweep(base: SystemSpec, points: int = 60, lo: float = PROTOCOL_RANGE[0],
                         hi: float = PROTOCOL_RANGE[1], method: str = "procrustes",
                         outputs=OUTPUTS) -> SweepSpec:
    note = (f"coupler mode frequencies scanned over {lo}-{hi} GHz on both axes "
            "(the reference figures do not print their ranges)")
    return SweepSpec(base, Axis("modes.c1.freq_ghz", lo, hi, points),
                     Axis("modes.c2.freq_ghz", lo, hi, points), tuple(outputs), method, (note,))


def fig5_protocol(points: int = 60, levels=(5, 4, 4, 5), method: str = "procrustes") -> SweepSpec:
    """Detuned qubits (4.0 and 3.6 GHz): idle-point search."""
    outputs = OUTPUTS + (("J00_perturbative", "J01_perturbative", "J10_perturbative")
                         if method == "procrustes" else ())
    return mode_frequency_sweep(table1_spec(fa=4.0, fb=3.6, levels=levels), points, method=method,
                                outputs=outputs)


def fig7_protocol(points: int = 60, levels=(5, 4, 4, 5), method: str = "procrustes") -> SweepSpec:
    """Resonant qubits (3.6 GHz): gate-point search."""
    return mode_frequency_sweep(table1_spec(fa=3.6, fb=3.6, levels=levels), points, method=method)


FIG9_POINT = {"fb": 3.6, "f1": 3.12, "f2": 3.05}


def fig9_spec(levels=(5, 4, 4, 5)) -> SystemSpec:
    p = FIG9_POINT
    return table1_spec(fa=p["fb"], fb=p["fb"], f1=p["f1"], f2=p["f2"], levels=levels)


def base_from_doc(doc: Optional[dict]) -> Optional[SystemSpec]:
    if doc is None:
        return None
    return spec_from_dict(doc.get("system", doc))


def dump_spec(spec: SystemSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")
