"""Command-line interface.

Exit status: 0 on success, 1 for configuration or usage errors, 2 when
``--strict`` is given and a validity check fails.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import bogoliubov, decoupled_residual, decoupling_condition, selectivity_ratio
from .circuits import LeftHandedDesign, RightHandedDesign, lh_analyze, lh_locus_scan, rh_analyze
from .config import ConfigError, load_spec, read_json, spec_from_dict, table1_spec
from .dynamics import PulseSchedule, Segment, evolve, iswap_scan
from .fock import label_of
from .hamiltonian import build_hamiltonian
from .overlap import assign_states, diagonalize
from .report import coupling_report, sw_report_values, two_mode_coupler
from .sweep import (GridResult, fig5_protocol, fig7_protocol, fig9_spec, FIG9_POINT, resolve_threads,
                    run_sweep, sweep_from_dict, write_grid_csv, write_result)

EXIT_OK, EXIT_CONFIG, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(suppress: bool = False) -> argparse.ArgumentParser:
    # global flags are accepted before and after the subcommand; the copy on
    # the subcommands suppresses defaults so it does not overwrite earlier values
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)
    p.add_argument("--config", metavar="PATH", help="JSON document (or builtin:<name>)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--levels", metavar="N[,N,...]", help="truncation per mode")
    p.add_argument("--epsilon", type=float, metavar="X", help="overlap^2 validity threshold")
    p.add_argument("--method", choices=("procrustes", "perturbative", "sw"),
                   help="coupling extractor (default procrustes)")
    p.add_argument("--threads", type=int, metavar="N", help="worker processes")
    p.add_argument("--strict", action="store_true", help="exit 2 if any assignment is invalid",
                   default=argparse.SUPPRESS if suppress else False)
    return p


def build_parser() -> Parser:
    parser = Parser(prog="couplerlab", description=__doc__.splitlines()[0], parents=[_common()])
    common = _common(suppress=True)
    parser.add_argument("--version", action="version", version=f"couplerlab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser, required=True)

    p = sub.add_parser("spectrum", parents=[common], help="labeled low-lying spectrum")
    p.add_argument("--count", type=int, default=12)
    sub.add_parser("couplings", parents=[common], help="J00, J01, J10, ZZ at one point")
    sub.add_parser("sweep", parents=[common], help="2D sweep described by the config's 'sweep' key")
    sub.add_parser("evolve", parents=[common], help="evolve a pulse schedule")
    p = sub.add_parser("iswap", parents=[common], help="iSWAP chevron over qubit a frequency")
    p.add_argument("--fa", default="3.5:3.7:41", metavar="START:STOP:POINTS")
    p.add_argument("--fb", type=float, default=FIG9_POINT["fb"])
    p.add_argument("--tmax", type=float, default=100.0)
    p.add_argument("--samples", type=float, default=10.0, help="samples per ns")
    p = sub.add_parser("circuit", parents=[common], help="coupler circuit report")
    p.add_argument("design", choices=("lh", "rh"))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="design field override (fF, nH, GHz)")
    p.add_argument("--locus", action="store_true", help="also scan the decoupling locus (lh)")
    sub.add_parser("analytic", parents=[common], help="rotated-mode and perturbative report")
    p = sub.add_parser("reproduce", parents=[common], help="bundled figure protocols")
    p.add_argument("figure", choices=("fig5", "fig7", "fig8", "fig9"))
    p.add_argument("--points", type=int, default=None, help="grid points per axis")
    return parser


def _levels(text):
    if text is None:
        return None
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"--levels expects integers, got {text!r}") from None
    return vals[0] if len(vals) == 1 else vals


def _spec(args, default=None):
    if args.config:
        spec = load_spec(args.config)
    elif default is not None:
        spec = default
    else:
        raise ConfigError("this command needs --config")
    lv = _levels(args.levels)
    if lv is not None:
        spec = spec.with_levels(lv)
    if args.epsilon is not None:
        spec = spec.with_options(epsilon=args.epsilon)
    return spec


def _emit(obj, args, name):
    text = json.dumps(obj, sort_keys=True, default=_jsonable)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(type(x))


def cmd_spectrum(args):
    spec = _spec(args, table1_spec())
    eig = diagonalize(build_hamiltonian(spec))
    n = min(args.count, eig.energies.size)
    labels = [label_of(int(np.argmax(np.abs(eig.vectors[:, i]))), spec.modes) for i in range(n)]
    spectrum = assign_states(eig, list(dict.fromkeys(labels)), spec.options.epsilon)
    rows = []
    for i in range(n):
        lab = labels[i]
        row = {"index": i, "energy_ghz": float(eig.energies[i]), "label": "".join(map(str, lab)),
               "overlap2": float(np.max(np.abs(eig.vectors[:, i])) ** 2),
               "valid": bool(spectrum.assignment[lab] == i and spectrum.valid[lab])}
        rows.append(row)
        print(f"{i:4d}  {row['energy_ghz']:14.9f} GHz  |{row['label']}>  "
              f"overlap2={row['overlap2']:.4f}  valid={int(row['valid'])}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "spectrum.json").write_text(json.dumps(rows, indent=2) + "\n")
    return EXIT_INVALID if args.strict and not all(r["valid"] for r in rows) else EXIT_OK


def cmd_couplings(args):
    spec = _spec(args)
    rep = coupling_report(spec, args.method or "procrustes")
    _emit(rep.as_dict(), args, "couplings.json")
    return EXIT_INVALID if args.strict and not rep.all_valid else EXIT_OK


def _finish_grid(result: GridResult, args, extra=None, prefix=""):
    if args.out:
        write_result(result, args.out, prefix=prefix, extra=extra)
    summary = {}
    for name, arr in result.data.items():
        finite = arr[np.isfinite(arr)]
        if finite.size:
            summary[name] = {"min_abs": float(np.min(np.abs(finite))), "max_abs": float(np.max(np.abs(finite)))}
    flags = result.data.get("validity")
    summary["invalid_cells"] = 0 if flags is None else int((flags == 0).sum())
    print(json.dumps(summary, sort_keys=True))
    if args.strict and summary["invalid_cells"]:
        return EXIT_INVALID
    return EXIT_OK


def cmd_sweep(args):
    if not args.config:
        raise ConfigError("sweep needs --config with a 'sweep' section")
    doc = read_json(args.config)
    s = sweep_from_dict(doc, _spec(args))
    if args.method:
        s = type(s)(s.base, s.axis1, s.axis2, s.outputs, args.method)
    return _finish_grid(run_sweep(s, resolve_threads(args.threads)), args)


def cmd_evolve(args):
    if not args.config:
        raise ConfigError("evolve needs --config with a schedule")
    doc = read_json(args.config)
    try:
        segs = []
        for seg in doc["segments"]:
            sys_doc = read_json(seg["config"]) if "config" in seg else seg["system"]
            spec = spec_from_dict(sys_doc.get("system", sys_doc))
            lv = _levels(args.levels)
            if lv is not None:
                spec = spec.with_levels(lv)
            segs.append(Segment(spec, float(seg["duration_ns"])))
        schedule = PulseSchedule(tuple(segs))
        psi0 = tuple(int(n) for n in doc["psi0"])
        track = [tuple(int(n) for n in lab) for lab in doc.get("track", [psi0])]
        rate = float(doc.get("samples_per_ns", 10))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid schedule: {exc}") from exc
    trace = evolve(schedule, psi0, rate)
    header = ["time_ns"] + [f"P_{''.join(map(str, t))}" for t in track] + \
             [f"phase_{''.join(map(str, t))}" for t in track]
    cols = [trace.times] + [trace.population(t) for t in track] + [trace.phase(t) for t in track]
    lines = [",".join(header)] + [",".join(f"{c[i]:.12g}" for c in cols) for i in range(trace.times.size)]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.csv").write_text("\n".join(lines) + "\n")
    final = {f"P_{''.join(map(str, t))}": float(trace.population(t)[-1]) for t in track}
    final["norm_drift"] = float(np.max(np.abs(trace.norm() - 1)))
    print(json.dumps(final, sort_keys=True))
    return EXIT_OK


def _range(text):
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"expected START:STOP:POINTS, got {text!r}") from None


def _write_iswap(scan, args, spec):
    panels = {"p0001": scan.p0001, "p1000": scan.p1000, "p1001": scan.p1001, "cphase": scan.cphase,
              "phase1001": scan.phase1001}
    row = int(np.argmin(np.abs(scan.fa - spec.mode(scan.qubits[1]).freq)))
    tg, peak = scan.gate_time(row)
    best = int(np.argmax(scan.p0001.max(axis=1)))
    tb, pb = scan.gate_time(best)
    summary = {"fa_resonant_ghz": float(scan.fa[row]), "gate_time_ns": tg, "peak_population": peak,
               "fa_best_ghz": float(scan.fa[best]), "gate_time_best_ns": tb, "peak_best": pb}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, arr in panels.items():
            fname = f"iswap_{name}.csv"
            write_grid_csv(out / fname, scan.fa, scan.times, arr, np.isfinite(arr))
            files[name] = fname
        manifest = {"axis1": "fa_ghz", "axis2": "time_ns", "files": files, "tool_version": __version__,
                    "truncation": list(spec.levels), "summary": summary}
        (out / "iswap_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_iswap(args):
    spec = _spec(args, fig9_spec())
    scan = iswap_scan(spec, _range(args.fa), args.fb, args.tmax, args.samples)
    return _write_iswap(scan, args, spec.with_mode(spec.labels[-1], freq=args.fb))


def _design(args):
    cls = LeftHandedDesign if args.design == "lh" else RightHandedDesign
    names = {f.name for f in fields(cls)}
    values = {}
    if args.config:
        doc = read_json(args.config)
        for k, v in doc.items():
            key = k.rsplit("_", 1)[0] if k.rsplit("_", 1)[-1] in ("ff", "nh", "ghz") else k
            values[key] = float(v)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = float(v)
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown design fields {sorted(unknown)}; known: {sorted(names)}")
    return cls(**values)


def cmd_circuit(args):
    d = _design(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            rep = lh_analyze(d) if args.design == "lh" else rh_analyze(d)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from exc
    obj = {k: v for k, v in asdict(rep).items() if k != "g"}
    obj.update({k: float(v) for k, v in rep.couplings.items()})
    obj["design"] = asdict(d)
    _emit(obj, args, f"circuit_{args.design}.json")
    if args.locus and args.design == "lh":
        c2 = np.linspace(1.0, 120.0, 60)
        dl = np.linspace(-0.8 * d.l, 0.8 * d.l, 61)
        grid = lh_locus_scan(d.c, d.l, c2, dl, ca=d.ca, cb=d.cb, cqa=d.cqa, cqb=d.cqb, fa=d.fa, fb=d.fb)
        if args.out:
            write_grid_csv(Path(args.out) / "locus_mismatch.csv", c2, dl, grid.mismatch, grid.valid)
            write_grid_csv(Path(args.out) / "locus_trajectory.csv", c2, dl,
                           grid.trajectory().astype(float), grid.valid)
        print(json.dumps({"locus_cells": int(grid.trajectory().sum()),
                          "min_mismatch": float(np.nanmin(grid.mismatch))}))
    return EXIT_OK


def cmd_analytic(args):
    spec = _spec(args, fig9_spec())
    coupler, qubits, gab = two_mode_coupler(spec)
    dressed = bogoliubov(coupler)
    cond = decoupling_condition(coupler.g)
    sw = sw_report_values(spec)
    obj = {"Lambda": dressed.Lambda, "f1t_ghz": dressed.f1t, "f2t_ghz": dressed.f2t,
           "gt_mhz": dressed.gt, "decoupling": asdict(cond),
           "cross_residual_mhz": decoupled_residual(coupler), "g_ab_mhz": gab,
           **{f"{k}_sw_mhz": v for k, v in sw.items()},
           "ratio_sw": selectivity_ratio(sw["J00"], sw["J01"], sw["J10"])}
    _emit(obj, args, "analytic.json")
    return EXIT_OK


def cmd_reproduce(args):
    lv = _levels(args.levels)
    levels = (5, 4, 4, 5) if lv is None else ((lv,) * 4 if isinstance(lv, int) else tuple(lv))
    out = args.out or f"out/{args.figure}"
    args.out = out
    if args.figure == "fig9":
        spec = fig9_spec(levels)
        scan = iswap_scan(spec, np.linspace(3.5, 3.7, 41), FIG9_POINT["fb"], 100.0, 10)
        return _write_iswap(scan, args, spec)
    points = args.points or 60
    if args.figure == "fig5":
        s = fig5_protocol(points, levels, args.method or "procrustes")
    else:
        s = fig7_protocol(points, levels, args.method or "procrustes")
    if args.epsilon is not None:
        s = type(s)(s.base.with_options(epsilon=args.epsilon), s.axis1, s.axis2, s.outputs, s.method, s.notes)
    result = run_sweep(s, resolve_threads(args.threads))
    if args.figure == "fig8":
        result = GridResult(result.axis1, result.axis2,
                            {k: result.data[k] for k in ("ratio", "J00", "J01", "J10")},
                            {k: result.valid[k] for k in ("ratio", "J00", "J01", "J10")}, result.metadata)
    return _finish_grid(result, args, {"protocol": args.figure})


COMMANDS = {"spectrum": cmd_spectrum, "couplings": cmd_couplings, "sweep": cmd_sweep, "evolve": cmd_evolve,
            "iswap": cmd_iswap, "circuit": cmd_circuit, "analytic": cmd_analytic, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"couplerlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


cli = main

if __name__ == "__main__":
    sys.exit(main())
