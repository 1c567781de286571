"""Command-line front end.

Subcommands map one-to-one onto the library surface; every JSON payload
carries the tool version, the modified-character descriptor, the window
policy in effect, and the list of heuristic shortcuts taken, so a result
file is self-describing. CSV floats are printed with 17 significant digits
so they round-trip to the exact double.
"""
import argparse
import configparser
import dataclasses
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analysis, lfunction, series, torus
from .characters import conductor, enumerate_characters, parity
from .errors import ModcharError, ValidationError, exit_code_for
from .lfunction import BoundedValue
from .modchar import exponents, growth_record, make_modified, partial_sums
from .torus import TorusConfig


# ---------------------------------------------------------------- parsing

def _parse_phase(text: str):
    """Phases come in as 'num/den' (exact) or a float literal."""
    text = text.strip()
    try:
        if "/" in text or text.lstrip("+-").isdigit():
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"bad phase {text!r}: {e}")


def _parse_mods(text: str) -> dict:
    """'p:phase,p:phase' with phase per _parse_phase."""
    mods = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ValidationError(f"bad modification {part!r}: expected p:phase")
        ps, phs = part.split(":", 1)
        try:
            p = int(ps)
        except ValueError:
            raise ValidationError(f"bad prime {ps!r} in modification {part!r}")
        if p in mods:
            raise ValidationError(f"prime {p} listed twice in --mods")
        mods[p] = _parse_phase(phs)
    if not mods:
        raise ValidationError("--mods is empty")
    return mods


def _parse_int(text: str) -> int:
    # accepts 1e6-style exponents for convenience
    v = float(text)
    if v != int(v):
        raise ValidationError(f"expected an integer, got {text!r}")
    return int(v)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ValidationError(f"bad complex number {text!r}")


def _parse_list(text: str, conv):
    return [conv(t) for t in text.split(",") if t.strip()]


def _character(args):
    chars = enumerate_characters(args.modulus)
    if not 0 <= args.char_index < len(chars):
        raise ValidationError(
            f"char-index {args.char_index} out of range for modulus "
            f"{args.modulus} ({len(chars)} characters)")
    return chars[args.char_index]


def _modified(args):
    return make_modified(_character(args), _parse_mods(args.mods))


def _torus_cfg(args) -> TorusConfig:
    primes = tuple(_parse_list(args.primes, _parse_int))
    if args.theta:
        theta = tuple(_parse_list(args.theta, _parse_phase))
    else:
        theta = tuple(Fraction(0) for _ in primes)
    return TorusConfig.from_primes(primes, theta)


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path: str, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _jsonable(obj):
    if isinstance(obj, BoundedValue):
        v = complex(obj.value)
        return {"re": v.real, "im": v.imag, "abs_error": _jsonable(obj.abs_error)}
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def _emit_json(path: str, payload: dict):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _envelope(result, f=None, window_policy=None, heuristics=()):
    return {
        "tool_version": __version__,
        "f": f.descriptor() if f is not None else None,
        "window_policy": window_policy,
        "heuristics": list(heuristics),
        "result": result,
    }


# ---------------------------------------------------------------- commands

def _cmd_char_table(args) -> int:
    chars = enumerate_characters(args.modulus)
    rows = []
    for i, chi in enumerate(chars):
        vals = []
        for a in range(1, args.modulus + 1):
            ph = chi(a)
            vals.append("-" if ph is None else str(ph.fraction))
        rows.append((i, conductor(chi), int(chi.is_primitive()),
                     parity(chi), chi.order(), ";".join(vals)))
    _write_csv(args.out, ("index", "conductor", "primitive", "parity",
                          "order", "phase_fractions"), rows)
    return 0


def _cmd_partial_sums(args) -> int:
    f = _modified(args)
    trace = partial_sums(f, args.xmax, stride=args.stride)
    rows = []
    for i, x in enumerate(trace.sample_x.tolist()):
        m = trace.sample_M[i]
        rows.append((x, m.real, m.imag, abs(m), float(trace.running_sup[i])))
    _write_csv(args.out, ("x", "M_re", "M_im", "abs_M", "running_sup"), rows)
    if args.json_out:
        T, N, D = exponents(f)
        result = {
            "X": trace.X_max,
            "M_final": _jsonable(complex(trace.sample_M[-1])),
            "sup_abs_M": float(trace.meta["sup_abs_M"]),
            "exponents": {"T": T, "N": N, "D": float(D)},
            "growth_record": growth_record(f, trace.X_max, D)
            if trace.X_max >= 10 else [],
        }
        _emit_json(args.json_out, _envelope(result, f=f))
    return 0


def _cmd_series_eval(args) -> int:
    f = _modified(args)
    s = _parse_complex(args.s)
    result = {"s": s}
    heur = []
    if args.route in ("euler", "both"):
        result["euler"] = series.F_euler(f, s, best_effort=True)
    if args.route in ("integral", "both"):
        trace = partial_sums(f, args.xmax)
        bv, details = series.F_integral(f, s, trace, safety=args.safety,
                                        with_details=True)
        result["integral"] = bv
        result["integral_details"] = details
        heur = details.get("heuristics", [])
    if args.route == "both":
        gap = abs(result["euler"].value - result["integral"].value)
        budget = result["euler"].abs_error + result["integral"].abs_error
        result["gap"] = gap
        result["within_bounds"] = bool(gap <= budget)
    _emit_json(args.out, _envelope(result, f=f, heuristics=heur))
    return 0


def _cmd_poles(args) -> int:
    f = _modified(args)
    locs = series.poles_of_inverse_Ef(f, args.t_lo, args.t_hi)
    _write_csv(args.out, ("p", "z", "t"), [(c.p, c.z, c.t) for c in locs])
    return 0


def _cmd_orbit(args) -> int:
    cfg = _torus_cfg(args)
    hits = torus.box_hits(cfg, args.n_lo, args.n_hi, args.eps)
    rows = []
    for n in hits.tolist():
        pt = torus.orbit_point(cfg, n)
        rows.append((n, *pt.floats().tolist()))
    header = ("n",) + tuple(f"coord_{i + 1}" for i in range(cfg.d))
    _write_csv(args.out, header, rows)
    return 0


def _cmd_discrepancy(args) -> int:
    cfg = _torus_cfg(args)
    rows = []
    for x in _parse_list(args.x_grid, _parse_int):
        pts = np.array([torus.orbit_point(cfg, n).floats()
                        for n in range(1, x + 1)])
        exact = math.nan
        et = math.nan
        if args.mode in ("exact", "both"):
            exact = torus.exact_star_discrepancy(pts).exact_Dstar
        if args.mode in ("et", "both"):
            et = torus.et_bound(cfg, x, args.y).et_bound
        rows.append((x, exact, et, args.y))
    _write_csv(args.out, ("x", "exact_Dstar", "et_bound", "y"), rows)
    return 0


def _cmd_baker(args) -> int:
    cfg = _torus_cfg(args)
    fit = torus.baker_profile(cfg, args.M, method=args.method)
    records = fit.metadata["records"]
    _write_csv(args.out, ("m_inf", "record_min_dist"),
               [(int(k), float(v)) for k, v in records])
    if args.json_out:
        result = {
            "kappa_hat": fit.metadata.get("kappa_hat"),
            "exponent": fit.exponent,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "flags": list(fit.flags),
            "method": fit.metadata.get("method"),
            "m0_convention": fit.metadata.get("m0_convention"),
        }
        _emit_json(args.json_out, _envelope(result, heuristics=list(fit.flags)))
    return 0


def _cmd_l_eval(args) -> int:
    chi = _character(args)
    s = _parse_complex(args.s)
    bv = lfunction.l_function(s, chi, best_effort=True)
    result = {"s": s, "L": bv, "modulus": args.modulus,
              "char_index": args.char_index}
    if chi.is_primitive() and not chi.is_principal():
        result["root_number"] = lfunction.root_number(chi)
    _emit_json(args.out, _envelope(result))
    return 0


def _cmd_fe_check(args) -> int:
    chi = _character(args)
    s = _parse_complex(args.s)
    residual, budget = lfunction.fe_check(s, chi)
    result = {"s": s, "residual": residual, "budget": budget,
              "passed": bool(residual <= budget)}
    _emit_json(args.out, _envelope(result))
    return 0


def _cmd_plancherel_check(args) -> int:
    f = _modified(args)
    trace = partial_sums(f, args.xmax)
    rep = analysis.plancherel_check(f, args.sigma, trace, args.tcut,
                                    slack=args.slack)
    policy = {"X": args.xmax, "T_cut": args.tcut, "slack": args.slack}
    _emit_json(args.out, _envelope(rep, f=f, window_policy=policy,
                                   heuristics=list(rep.flags)))
    return 0


def _cmd_spike_scan(args) -> int:
    f = _modified(args)
    rep = analysis.spike_scan(f, args.sigma, (args.n_lo, args.n_hi),
                              eps=args.eps, r_average=args.r_average,
                              with_l=not args.skip_l)
    lemma1 = rep.metadata.get("lemma1_lhs", [])
    rows = [(n, a, b, c, lemma1[i] if i < len(lemma1) else math.nan)
            for i, (n, a, b, c) in enumerate(rep.hits)]
    _write_csv(args.out, ("n", "inv_Ef_scaled", "abs_E_chi",
                          "normalized_ratio", "lemma1_lhs"), rows)
    if args.json_out:
        summary = {
            "sigma": rep.sigma, "T": rep.T, "window": list(rep.window),
            "flags": list(rep.flags),
            "metadata": {k: v for k, v in rep.metadata.items()
                         if k != "lemma1_lhs"},
        }
        policy = {"window": list(rep.window), "eps": rep.metadata["eps"]}
        _emit_json(args.json_out, _envelope(summary, f=f, window_policy=policy,
                                            heuristics=list(rep.flags)))
    return 0


def _cmd_omega_fit(args) -> int:
    f = _modified(args)
    sigmas = _parse_list(args.sigmas, float)
    trace = partial_sums(f, args.xmax)
    lhs = [analysis.plancherel_lhs(f, s, trace) for s in sigmas]
    fit = analysis.omega_fit(sigmas, [b.value for b in lhs])
    result = {
        "sigmas": sigmas,
        "lhs_values": [b.value for b in lhs],
        "lhs_abs_errors": [b.abs_error for b in lhs],
        "fit": fit,
    }
    policy = {"X": args.xmax, "sigmas": sigmas}
    _emit_json(args.out, _envelope(result, f=f, window_policy=policy,
                                   heuristics=["tail-envelope-empirical-x4"]))
    return 0


# ---------------------------------------------------------------- sweep

_SWEEP_OUTPUTS = {
    # operation -> list of (flag, file suffix); first entry is the primary
    "char-table": [("--out", ".csv")],
    "partial-sums": [("--out", ".csv"), ("--json-out", ".json")],
    "series-eval": [("--out", ".json")],
    "poles": [("--out", ".csv")],
    "orbit": [("--out", ".csv")],
    "discrepancy": [("--out", ".csv")],
    "baker": [("--out", ".csv"), ("--json-out", ".json")],
    "l-eval": [("--out", ".json")],
    "fe-check": [("--out", ".json")],
    "plancherel-check": [("--out", ".json")],
    "spike-scan": [("--out", ".csv"), ("--json-out", ".json")],
    "omega-fit": [("--out", ".json")],
}

_SWEEP_SECTIONS = {"experiment", "args", "grid"}
_EXPERIMENT_KEYS = {"operation", "out_dir", "workers"}


def _load_sweep_config(path: str):
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str          # keys are CLI flag names; keep case
    read = cp.read(path)
    if not read:
        raise ValidationError(f"cannot read sweep config {path!r}")
    unknown = set(cp.sections()) - _SWEEP_SECTIONS
    if unknown:
        raise ValidationError(f"unknown config section(s): {sorted(unknown)}")
    if "experiment" not in cp:
        raise ValidationError("config needs an [experiment] section")
    exp = dict(cp["experiment"])
    bad = set(exp) - _EXPERIMENT_KEYS
    if bad:
        raise ValidationError(f"unknown [experiment] key(s): {sorted(bad)}")
    op = exp.get("operation")
    if op not in _SWEEP_OUTPUTS:
        raise ValidationError(
            f"operation {op!r} is not sweepable; choose from "
            f"{sorted(_SWEEP_OUTPUTS)}")
    fixed = dict(cp["args"]) if "args" in cp else {}
    grid = {}
    if "grid" in cp:
        for key, raw in cp["grid"].items():
            vals = [v.strip() for v in raw.split(",") if v.strip()]
            if not vals:
                raise ValidationError(f"grid key {key!r} has no values")
            grid[key] = vals
    if not grid:
        raise ValidationError("config defines an empty grid")
    out_dir = exp.get("out_dir", "sweep_out")
    workers = int(exp.get("workers", "1"))
    return op, fixed, grid, out_dir, workers


def _cell_argv(op: str, fixed: dict, cell: dict, out_dir: str, cell_id: str):
    argv = [op]
    for k, v in sorted({**fixed, **cell}.items()):
        argv.extend([f"--{k.replace('_', '-')}", v])
    outputs = []
    for flag, suffix in _SWEEP_OUTPUTS[op]:
        path = os.path.join(out_dir, cell_id + suffix)
        argv.extend([flag, path])
        outputs.append(path)
    return argv, outputs


def _run_cell(argv):
    try:
        parser = _build_parser()
        args = parser.parse_args(argv)
        code = args.func(args)
        return code, None
    except ModcharError as e:
        return exit_code_for(e), str(e)
    except argparse.ArgumentError as e:
        return 2, str(e)
    except SystemExit as e:     # argparse paths that bypass exit_on_error
        return int(e.code or 2), "argument parsing failed"


def _cmd_sweep(args) -> int:
    op, fixed, grid, out_dir, workers = _load_sweep_config(args.config)
    workers = int(os.environ.get("MODCHAR_THREADS", workers))
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.json")
    previous = {}
    if args.resume and os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            for cell in json.load(fh).get("cells", []):
                previous[cell["id"]] = cell
    keys = sorted(grid)
    cells = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cell = dict(zip(keys, combo))
        cell_id = "__".join(f"{k}={cell[k]}" for k in keys)
        cells.append((cell_id, cell))
    results = {}
    todo = []
    for cell_id, cell in cells:
        prev = previous.get(cell_id)
        argv, outputs = _cell_argv(op, fixed, cell, out_dir, cell_id)
        if (args.resume and prev and prev.get("status") == "ok"
                and all(os.path.exists(p) for p in outputs)):
            results[cell_id] = prev
            continue
        todo.append((cell_id, argv, outputs))
    if todo:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            futures = {cell_id: pool.submit(_run_cell, argv)
                       for cell_id, argv, outputs in todo}
        for cell_id, argv, outputs in todo:
            code, message = futures[cell_id].result()
            entry = {"id": cell_id, "argv": argv, "outputs": outputs,
                     "status": "ok" if code == 0 else "failed",
                     "exit_code": code}
            if message:
                entry["error"] = message
            results[cell_id] = entry
    manifest = {
        "tool_version": __version__,
        "config": os.path.abspath(args.config),
        "operation": op,
        "cells": [results[cid] for cid, _ in cells],
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failed = [c for c in manifest["cells"] if c["status"] != "ok"]
    if failed:
        print(f"{len(failed)} of {len(cells)} cells failed; see "
              f"{manifest_path}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- parser

def _add_character_args(p):
    p.add_argument("--modulus", type=_parse_int, required=True)
    p.add_argument("--char-index", type=_parse_int, default=0,
                   help="position in the modulus's character enumeration")


def _add_mods_arg(p):
    p.add_argument("--mods", required=True,
                   help="modified primes as p:phase[,p:phase...]; phase is "
                        "num/den (exact) or a float")


def _add_torus_args(p):
    p.add_argument("--primes", required=True, help="comma-separated primes")
    p.add_argument("--theta", default="",
                   help="comma-separated phases, one per prime (default 0)")


def _add_out(p, default="-"):
    p.add_argument("--out", default=default,
                   help="output path, - for standard output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modchar-lab",
        description="numerical laboratory for partial sums of modified "
                    "Dirichlet characters",
        exit_on_error=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("char-table", exit_on_error=False,
                       help="list the characters of a modulus")
    p.add_argument("--modulus", type=_parse_int, required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_char_table)

    p = sub.add_parser("partial-sums", exit_on_error=False,
                       help="stream M(x) with sampled checkpoints")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--xmax", type=_parse_int, required=True)
    p.add_argument("--stride", type=_parse_int, default=1)
    _add_out(p)
    p.add_argument("--json-out", default="",
                   help="optional growth-summary JSON path")
    p.set_defaults(func=_cmd_partial_sums)

    p = sub.add_parser("series-eval", exit_on_error=False,
                       help="evaluate F(s) by Euler route, integral route, or both")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--s", required=True)
    p.add_argument("--route", choices=("euler", "integral", "both"),
                   default="both")
    p.add_argument("--xmax", type=_parse_int, default=10 ** 6)
    p.add_argument("--safety", type=float, default=series.DEFAULT_SAFETY)
    _add_out(p)
    p.set_defaults(func=_cmd_series_eval)

    p = sub.add_parser("poles", exit_on_error=False,
                       help="near-zero lattice of E_f on a vertical strip")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--t-lo", type=float, required=True)
    p.add_argument("--t-hi", type=float, required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_poles)

    p = sub.add_parser("orbit", exit_on_error=False,
                       help="box hits of the log-prime orbit")
    _add_torus_args(p)
    p.add_argument("--n-lo", type=_parse_int, required=True)
    p.add_argument("--n-hi", type=_parse_int, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("discrepancy", exit_on_error=False,
                       help="exact star discrepancy and the harmonic bound")
    _add_torus_args(p)
    p.add_argument("--x-grid", required=True)
    p.add_argument("--mode", choices=("exact", "et", "both"), default="both")
    p.add_argument("--y", type=_parse_int, default=100,
                   help="frequency cutoff for the harmonic bound")
    _add_out(p)
    p.set_defaults(func=_cmd_discrepancy)

    p = sub.add_parser("baker", exit_on_error=False,
                       help="record minima of ||m . alpha|| vs |m|_inf")
    _add_torus_args(p)
    p.add_argument("--M", type=_parse_int, required=True)
    p.add_argument("--method", choices=("auto", "exhaustive", "lll"),
                   default="auto")
    _add_out(p)
    p.add_argument("--json-out", default="", help="optional fit JSON path")
    p.set_defaults(func=_cmd_baker)

    p = sub.add_parser("l-eval", exit_on_error=False,
                       help="evaluate L(s, chi) with an error bound")
    _add_character_args(p)
    p.add_argument("--s", required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_l_eval)

    p = sub.add_parser("fe-check", exit_on_error=False,
                       help="completed-L functional equation residual")
    _add_character_args(p)
    p.add_argument("--s", required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_fe_check)

    p = sub.add_parser("plancherel-check", exit_on_error=False,
                       help="two-route weighted mean of |M|^2")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--xmax", type=_parse_int, default=10 ** 6)
    p.add_argument("--tcut", type=float, default=10 ** 3)
    p.add_argument("--slack", type=float, default=0.02)
    _add_out(p)
    p.set_defaults(func=_cmd_plancherel_check)

    p = sub.add_parser("spike-scan", exit_on_error=False,
                       help="diagnostics at torus box hits")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n-lo", type=_parse_int, required=True)
    p.add_argument("--n-hi", type=_parse_int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--r-average", action="store_true")
    p.add_argument("--skip-l", action="store_true",
                   help="skip the L-dependent hit fields")
    _add_out(p)
    p.add_argument("--json-out", default="", help="optional summary JSON path")
    p.set_defaults(func=_cmd_spike_scan)

    p = sub.add_parser("omega-fit", exit_on_error=False,
                       help="sigma-scaling exponent of the weighted mean")
    _add_character_args(p)
    _add_mods_arg(p)
    p.add_argument("--sigmas", required=True,
                   help="comma-separated sigma grid")
    p.add_argument("--xmax", type=_parse_int, default=10 ** 6)
    _add_out(p)
    p.set_defaults(func=_cmd_omega_fit)

    p = sub.add_parser("sweep", exit_on_error=False,
                       help="Cartesian-grid experiment runner")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true",
                   help="re-run only failed or missing cells")
    p.set_defaults(func=_cmd_sweep)

    return parser


def run(argv) -> int:
    try:
        parser = _build_parser()
        try:
            args = parser.parse_args(argv)
        except argparse.ArgumentError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        except SystemExit as e:  # --help/--version, or argparse's own error path
            return int(e.code or 0)
        return args.func(args)
    except ModcharError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
