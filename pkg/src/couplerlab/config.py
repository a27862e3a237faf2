"""JSON configuration documents and parameter paths.

A system document has top-level keys ``modes``, ``couplings`` and
``options``; units are part of the key names::

    {"modes": [{"label": "qa", "kind": "transmon", "freq_ghz": 4.0,
                "anharm_ghz": -0.3, "levels": 5}, ...],
     "couplings": [{"a": "qa", "b": "c1", "g_mhz": 150.0, "form": "full"}, ...],
     "options": {"epsilon": 0.500000001, "rwa_all": false}}

Parameter paths address a scalar: ``modes.<label>.freq_ghz``,
``couplings.<a>-<b>.g_mhz`` or ``options.epsilon``.
"""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from .fock import ModeSpec
from .hamiltonian import CouplingSpec, SpecOptions, SystemSpec

MODE_KEYS = {"freq_ghz": "freq", "anharm_ghz": "anharm", "levels": "levels"}
BUILTIN_PREFIX = "builtin:"


class ConfigError(ValueError):
    """Malformed, missing or inconsistent configuration."""


def spec_from_dict(doc: dict) -> SystemSpec:
    try:
        modes = [ModeSpec(label=str(m["label"]), kind=m.get("kind", "transmon"),
                          freq=float(m["freq_ghz"]), anharm=float(m.get("anharm_ghz", 0.0)),
                          levels=int(m.get("levels", 5)))
                 for m in doc["modes"]]
        couplings = [CouplingSpec(str(c["a"]), str(c["b"]), float(c["g_mhz"]), c.get("form", "full"))
                     for c in doc.get("couplings", [])]
        opts = doc.get("options", {})
        unknown = set(opts) - {"epsilon", "rwa_all"}
        if unknown:
            raise ConfigError(f"unknown options {sorted(unknown)}")
        options = SpecOptions(**opts)
        return SystemSpec(tuple(modes), tuple(couplings), options)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid system description: {exc}") from exc


def spec_to_dict(spec: SystemSpec) -> dict:
    return {
        "modes": [{"label": m.label, "kind": m.kind, "freq_ghz": m.freq, "anharm_ghz": m.anharm,
                   "levels": m.levels} for m in spec.modes],
        "couplings": [{"a": c.a, "b": c.b, "g_mhz": c.g, "form": c.form} for c in spec.couplings],
        "options": {"epsilon": spec.options.epsilon, "rwa_all": spec.options.rwa_all},
    }


def spec_hash(spec: SystemSpec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def read_json(path) -> dict:
    """Load a JSON document from disk or from the bundled ``builtin:<name>`` set."""
    path = str(path)
    try:
        if path.startswith(BUILTIN_PREFIX):
            name = path[len(BUILTIN_PREFIX):]
            text = resources.files("couplerlab.data").joinpath(f"{name}.json").read_text()
        else:
            text = Path(path).read_text()
    except (FileNotFoundError, IsADirectoryError, ModuleNotFoundError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc.__class__.__name__}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return doc


def load_spec(path) -> SystemSpec:
    doc = read_json(path)
    return spec_from_dict(doc.get("system", doc))


def apply_path(spec: SystemSpec, path: str, value: float) -> SystemSpec:
    """Return a copy of ``spec`` with the parameter at ``path`` set to ``value``."""
    parts = path.split(".")
    try:
        if parts[0] == "modes" and len(parts) == 3 and parts[2] in MODE_KEYS:
            field_name = MODE_KEYS[parts[2]]
            v = int(value) if field_name == "levels" else float(value)
            return spec.with_mode(parts[1], **{field_name: v})
        if parts[0] == "couplings" and len(parts) == 3 and parts[2] in ("g_mhz",):
            a, b = parts[1].split("-", 1)
            return spec.with_coupling(a, b, g=float(value))
        if parts[0] == "options" and len(parts) == 2 and parts[1] == "epsilon":
            return spec.with_options(epsilon=float(value))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot resolve parameter path {path!r}: {exc}") from exc
    raise ConfigError(f"cannot resolve parameter path {path!r}")


def table1_spec(fa: float = 4.0, fb: float = 3.6, f1: float = 3.2, f2: float = 3.3,
                levels=(5, 4, 4, 5), gab_form: str = "full") -> SystemSpec:
    """Two transmons bridged by two linear coupler modes, reference parameter set."""
    modes = (
        ModeSpec("qa", "transmon", fa, -0.30, levels[0]),
        ModeSpec("c1", "linear", f1, 0.0, levels[1]),
        ModeSpec("c2", "linear", f2, 0.0, levels[2]),
        ModeSpec("qb", "transmon", fb, -0.35, levels[3]),
    )
    couplings = (
        CouplingSpec("qa", "qb", 2.0, gab_form),
        CouplingSpec("qa", "c1", 150.0),
        CouplingSpec("qa", "c2", -200.0),
        CouplingSpec("qb", "c1", 150.0),
        CouplingSpec("qb", "c2", 150.0),
        CouplingSpec("c1", "c2", 10.0),
    )
    return SystemSpec(modes, couplings)
