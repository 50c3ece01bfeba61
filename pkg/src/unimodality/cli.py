"""Command-line front end.

Examples:
  unimodality density --measure bernoulli:1 --process free --t 4 --grid 513
  unimodality sweep --measure bernoulli:1 --process gaussian --t-list 0.25,0.5,1,2
  unimodality critical-time --measure bernoulli:1 --process free --bracket 0.5,16
  unimodality counterexample --process gaussian --a 2 --n 6 --delta 1e-4 --t 1
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from . import biane, counterexamples, modality, thresholds
from .kernels import ConvolvedDensity, ProcessKind, density
from .measures import (MeasureValidationError, QuadratureError, dump_measure, measure_to_dict,
                       parse_inline, parse_measure)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_NO_WITNESS = 0, 2, 3, 4
NUMERICAL_ERRORS = (ArithmeticError, QuadratureError, biane.InversionError, modality.WindowTooSmallError,
                    modality.DegenerateProfileError, FloatingPointError)


class UsageError(ValueError):
    pass


def _version() -> str:
    try:
        return metadata.version("unimodality")
    except metadata.PackageNotFoundError:
        return "unknown"


def _floats(text: str, name: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"--{name}: expected {count} numbers")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--{name}: values must be finite")
    return vals


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _load_measure(args):
    if args.measure and args.measure_file:
        raise UsageError("give only one of --measure and --measure-file")
    if args.measure_file:
        return parse_measure(Path(args.measure_file).read_bytes())
    if args.measure:
        return parse_inline(args.measure)
    raise UsageError("a measure is required (--measure or --measure-file)")


def _process(args, required=True):
    if args.process is None:
        if required:
            raise UsageError("--process is required for this command")
        return None
    return ProcessKind.parse(args.process)


def _positive_t(t, name="t"):
    if t is None or not t > 0:
        raise UsageError(f"--{name} must be positive")
    return t


def _write(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")


def _csv(meta: dict, header: list, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# unimodality {_version()}\n")
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _report(command: str, inputs: dict, result, diagnostics=None) -> str:
    doc = {"command": command, "inputs": inputs, "result": result,
           "diagnostics": {"version": _version(), **(diagnostics or {})}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- verbs --------------------------------------------------------------------

def run_density(args) -> str:
    mu = _load_measure(args)
    kind = _process(args)
    t = _positive_t(args.t)
    if kind is ProcessKind.FREE_SEMICIRCLE:
        if args.window:
            raise UsageError("--window does not apply to the free process (grid follows the support)")
        prof = biane.free_density_profile(mu, t, args.grid or 513)
        x, p = prof.x, prof.p
    else:
        cd = ConvolvedDensity(mu, kind, t)
        n = args.grid or 4096
        if n < 2:
            raise UsageError("--grid must be at least 2")
        window = _floats(args.window, "window", 2) if args.window else modality.default_window(cd)
        if not window[0] < window[1]:
            raise UsageError("--window needs lo < hi")
        x = np.linspace(window[0], window[1], n)
        p = np.atleast_1d(density(cd, x))
    meta = {"command": "density", "measure": json.dumps(measure_to_dict(mu), sort_keys=True),
            "process": kind.value, "t": _fmt(t)}
    return _csv(meta, ["x", "p"], ([_fmt(a), _fmt(b)] for a, b in zip(x, p)))


def run_modes(args) -> str:
    mu = _load_measure(args)
    kind = _process(args)
    t = _positive_t(args.t)
    kw = {}
    if args.window:
        if kind is ProcessKind.FREE_SEMICIRCLE:
            raise UsageError("--window does not apply to the free process")
        kw["window"] = tuple(_floats(args.window, "window", 2))
    rep = modality.classify(mu, kind, t, grid_size=args.grid, **kw)
    inputs = {"measure": measure_to_dict(mu), "process": kind.value, "t": t, **kw}
    return _report("modes", inputs, rep.as_dict())


def run_sweep(args) -> str:
    mu = _load_measure(args)
    kind = _process(args)
    if not args.t_list:
        raise UsageError("--t-list is required")
    ts = _floats(args.t_list, "t-list")
    if not ts or any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise UsageError("--t-list must be positive and strictly increasing")
    rows = []
    for t in ts:
        rep = modality.classify(mu, kind, t, grid_size=args.grid)
        rows.append([_fmt(t), str(rep.mode_count), str(rep.support_components),
                     "true" if rep.unimodal else "false", ";".join(_fmt(m) for m in rep.mode_locations)])
    meta = {"command": "sweep", "measure": json.dumps(measure_to_dict(mu), sort_keys=True),
            "process": kind.value}
    return _csv(meta, ["t", "mode_count", "support_components", "unimodal", "mode_locations"], rows)


def run_critical_time(args) -> str:
    mu = _load_measure(args)
    kind = _process(args)
    if not args.bracket:
        raise UsageError("--bracket is required")
    lo, hi = _floats(args.bracket, "bracket", 2)
    tol = args.tol if args.tol is not None else 1e-3
    if not tol > 0:
        raise UsageError("--tol must be positive")
    try:
        res = modality.critical_time(mu, kind, (lo, hi), tol=tol)
    except modality.BracketError as exc:
        raise UsageError(str(exc)) from exc
    inputs = {"measure": measure_to_dict(mu), "process": kind.value, "bracket": [lo, hi], "tol": tol}
    result = res.as_dict()
    return _report("critical-time", inputs, result, {"warnings": result.pop("warnings")})


def run_threshold(args) -> str:
    mu = _load_measure(args)
    if not args.theorem:
        raise UsageError("--theorem is required")
    theorem = thresholds.Theorem(args.theorem)
    kind = _process(args, required=False)
    if kind is not None and kind is not theorem.process:
        raise UsageError(f"--process {kind.value} does not match theorem {theorem.value}")
    times = _floats(args.t_list, "t-list") if args.t_list else None
    rep = thresholds.verify_threshold(mu, theorem, n_times=args.n_times, eps=args.eps, times=times)
    inputs = {"measure": measure_to_dict(mu), "theorem": theorem.value, "process": theorem.process.value,
              "n_times": args.n_times, "eps": args.eps}
    return _report("threshold", inputs, rep.as_dict())


def run_counterexample(args) -> str:
    kind = _process(args)
    d = counterexamples.DEFAULTS[kind]
    a = args.a if args.a is not None else d["a"]
    n = args.n if args.n is not None else d["n_atoms"]
    extra = {}
    if kind is ProcessKind.FREE_SEMICIRCLE:
        extra["f_tag"] = args.f or d["f_tag"]
    elif kind is ProcessKind.CLASSICAL_GAUSSIAN:
        extra["delta"] = args.delta if args.delta is not None else d["delta"]
    elif kind is ProcessKind.CAUCHY:
        extra["r"] = args.r if args.r is not None else d["r"]
    spec = counterexamples.CounterexampleSpec(kind, a, n, extra)
    mu = spec.build()
    if args.emit_measure is not None:
        text = dump_measure(mu) + "\n"
        if args.emit_measure == "-":
            return text
        Path(args.emit_measure).write_text(text, encoding="utf-8")
    t = _positive_t(args.t)
    inputs = {"process": kind.value, "a": a, "n": n, **extra, "t": t}
    w = counterexamples.witness_non_unimodal(mu, kind, t)
    return _report("counterexample", inputs, w.as_dict(), {"measure": measure_to_dict(mu)})


def run_witness_search(args) -> str:
    scales = _floats(args.s_list, "s-list") if args.s_list else [0.5, 1.0, 2.0]
    ts = _floats(args.t_list, "t-list") if args.t_list else [0.5, 1.0, 2.0, 4.0, 8.0]
    if any(s <= 0 for s in scales) or any(t <= 0 for t in ts):
        raise UsageError("scales and times must be positive")
    w = counterexamples.strong_unimodality_witness_search(scales, ts)
    inputs = {"s_list": scales, "t_list": ts}
    return _report("witness-search", inputs, None if w is None else w.as_dict())


VERBS = {
    "density": run_density,
    "modes": run_modes,
    "critical-time": run_critical_time,
    "threshold": run_threshold,
    "counterexample": run_counterexample,
    "sweep": run_sweep,
    "witness-search": run_witness_search,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unimodality", description=__doc__.splitlines()[0],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, measure=True, process=True):
        if measure:
            p.add_argument("--measure", help="inline family, e.g. bernoulli:1, uniform:-1,1, triangle:-1,0,1")
            p.add_argument("--measure-file", help="measure JSON document")
        if process:
            p.add_argument("--process", choices=["gaussian", "cauchy", "levy", "free"])
        p.add_argument("--out", help="output path (default: standard output)")

    p = sub.add_parser("density", help="tabulate the density at time t as CSV")
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--window", help="lo,hi (classical processes)")

    p = sub.add_parser("modes", help="modality report at time t as JSON")
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--window", help="lo,hi scan window (classical processes)")

    p = sub.add_parser("sweep", help="modality verdicts over a list of times as CSV")
    common(p)
    p.add_argument("--t-list")
    p.add_argument("--grid", type=int)

    p = sub.add_parser("critical-time", help="bisect for the critical unimodality time")
    common(p)
    p.add_argument("--bracket", help="t_min,t_max")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("threshold", help="compute and verify a sufficient unimodality time")
    common(p)
    p.add_argument("--theorem", choices=[th.value for th in thresholds.Theorem])
    p.add_argument("--n-times", type=int, default=4)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--t-list", help="explicit verification times")

    p = sub.add_parser("counterexample", help="build a truncated counterexample and look for a witness")
    common(p, measure=False)
    p.add_argument("--a", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--f", choices=["one", "exp_square"])
    p.add_argument("--t", type=float)
    p.add_argument("--emit-measure", nargs="?", const="-",
                   help="write the measure JSON to a path, or alone to print it instead of a report")

    p = sub.add_parser("witness-search", help="dilated Bernoulli search for free non-unimodality")
    common(p, measure=False, process=False)
    p.add_argument("--s-list")
    p.add_argument("--t-list")
    return ap


LIST_FLAGS = ("--window", "--bracket", "--t-list", "--s-list", "--measure")


def _join_negative_values(argv):
    """Allow ``--window -1,1``: argparse would otherwise read ``-1,1`` as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in LIST_FLAGS and i + 1 < len(argv) and argv[i + 1][:1] == "-" and argv[i + 1][1:2].isdigit():
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        text = VERBS[args.verb](args)
    except counterexamples.NoWitnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_WITNESS
    except (UsageError, MeasureValidationError, thresholds.HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _write(args, text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
