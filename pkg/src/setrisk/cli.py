"""Command-line surface: validate, eval, check, compose, plot-data.

Exit codes: 0 success (checks: pass), 1 check failed with witness, 2 usage or
validation error.  SETRISK_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import consistency, documents
from .documents import DocumentError, Workspace, dumps
from .measures import (
    AvarMeasure,
    ConvexSuperhedgingMeasure,
    EntropicMeasure,
    SuperhedgingMeasure,
    composed_avar_measure,
)
from .rationals import parse_rational

MEASURE_CHOICES = ("shp", "cshp", "avar", "composed-avar", "entropic")
CHECK_CHOICES = ("mptc", "recursion", "cocycle", "stability", "wmax")


class UsageError(Exception):
    pass


def _load_workspace(path: str) -> Workspace:
    try:
        return Workspace.load(path)
    except FileNotFoundError:
        raise UsageError(f"workspace file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {path}: {exc}")
    except DocumentError as exc:
        raise UsageError(str(exc))


def _named(table: dict, name: Optional[str], kind: str):
    if name is None:
        raise UsageError(f"missing required --{kind} name")
    if name not in table:
        known = ", ".join(sorted(table)) or "none defined"
        raise UsageError(f"unknown {kind} {name!r} (known: {known})")
    return table[name]


def _build_measure(ws: Workspace, args):
    kind = args.measure
    tree = ws.tree
    if kind == "shp":
        return SuperhedgingMeasure(tree, _named(ws.solvency, args.cones, "cones"))
    if kind == "cshp":
        return ConvexSuperhedgingMeasure(tree, _named(ws.solvency, args.cones, "cones"))
    if kind == "avar":
        lam = _named(ws.avar_params, args.lambda_, "lambda")
        return AvarMeasure(tree, lam, m=args.m)
    if kind == "composed-avar":
        lam = _named(ws.avar_params, args.lambda_, "lambda")
        return composed_avar_measure(tree, lam, m=args.m)
    if kind == "entropic":
        return EntropicMeasure(tree, _named(ws.entropic_params, args.lambda_, "lambda"))
    raise UsageError(f"unknown measure {kind!r}")


def _measure_spec(args) -> dict:
    spec = {"name": args.measure}
    if getattr(args, "cones", None):
        spec["cones"] = args.cones
    if getattr(args, "lambda_", None):
        spec["lambda"] = args.lambda_
    if getattr(args, "m", None):
        spec["m"] = args.m
    return spec


def _parse_dirs(text: Optional[str]) -> Optional[List[List[Fraction]]]:
    if not text:
        return None
    out = []
    for chunk in text.split(";"):
        out.append([parse_rational(x) for x in chunk.split(",")])
    return out


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_validate(args) -> int:
    ws = _load_workspace(args.tree)
    names = {
        "payoffs": sorted(ws.payoffs),
        "measures": sorted(ws.measures),
        "cones": sorted(ws.solvency),
        "avar_params": sorted(ws.avar_params),
        "entropic_params": sorted(ws.entropic_params),
        "dual_pairs": sorted(ws.dual_pairs),
    }
    _emit(dumps({"kind": "validate", "ok": True, "names": names}), args.out)
    return 0


def _cmd_eval(args, verb: str = "eval") -> int:
    ws = _load_workspace(args.tree)
    if verb == "compose":
        base = _build_measure(ws, args)
        measure = consistency.compose(base)
        spec = {"composed_of": _measure_spec(args)}
    else:
        measure = _build_measure(ws, args)
        spec = _measure_spec(args)
    X = _named(ws.payoffs, args.payoff, "payoff")
    if args.t is None:
        raise UsageError("missing required --t")
    values = measure.value(X, args.t)
    doc = documents.eval_result_to_doc(
        spec, args.payoff, args.t, values, _parse_dirs(args.dirs)
    )
    _emit(dumps(doc), args.out)
    return 0


def _cmd_check(args) -> int:
    ws = _load_workspace(args.tree)
    measure = _build_measure(ws, args)
    t, s = args.t, args.s
    if t is None or s is None:
        raise UsageError("checks need both --t and --s")
    rerouted = None
    if args.check == "mptc":
        report = consistency.check_mptc_acceptance(measure, t, s)
        if report.verdict == "inapplicable" and not measure.is_polyhedral:
            rerouted = "mptc"
            report = consistency.check_cocycle(measure, t, s, tol=args.tol)
    elif args.check == "recursion":
        X = _named(ws.payoffs, args.payoff, "payoff")
        report = consistency.check_recursion(measure, X, t, s)
    elif args.check == "cocycle":
        pair = None
        if args.pair:
            pair = _named(ws.dual_pairs, args.pair, "pair")
        report = consistency.check_cocycle(measure, t, s, pair=pair, tol=args.tol)
    elif args.check == "stability":
        pairs = None
        if args.pair:
            pairs = [_named(ws.dual_pairs, args.pair, "pair")]
        report = consistency.check_stability(measure, t, s, pairs=pairs)
    elif args.check == "wmax":
        pairs = None
        if args.pair:
            pairs = [_named(ws.dual_pairs, args.pair, "pair")]
        report = consistency.check_Wmax_decomposition(measure, t, s, pairs=pairs)
    else:
        raise UsageError(f"unknown check {args.check!r}")
    doc = documents.report_to_doc(report)
    doc["measure"] = _measure_spec(args)
    if rerouted:
        doc["rerouted_from"] = rerouted
    _emit(dumps(doc), args.out)
    return 0 if report.verdict == "pass" else 1


def _cmd_plot_data(args) -> int:
    try:
        with open(args.result, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read result document: {exc}")
    if doc.get("type") != "polyhedral":
        raise UsageError("plot-data needs a polyhedral eval result document")
    values = doc.get("values", {})
    if args.node not in values:
        raise UsageError(f"unknown node {args.node!r} (known: {', '.join(sorted(values))})")
    try:
        coords = [int(x) for x in args.coords.split(",")]
        csv = documents.plot_data_csv(values[args.node], coords)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(csv, args.out)
    return 0


def _add_measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--measure", required=True, choices=MEASURE_CHOICES)
    p.add_argument("--cones", help="name of a solvency cone/region process")
    p.add_argument("--lambda", dest="lambda_", help="name of a parameter set")
    p.add_argument("--m", type=int, default=None, help="number of eligible assets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setrisk",
        description="Exact set-valued dynamic risk measures on finite scenario trees.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="validate a workspace document")
    p.add_argument("--tree", required=True, help="workspace document (JSON)")
    p.add_argument("--out")

    for verb in ("eval", "compose"):
        p = sub.add_parser(
            verb,
            help="evaluate a measure" if verb == "eval" else "evaluate the composed family",
        )
        p.add_argument("--tree", required=True)
        _add_measure_flags(p)
        p.add_argument("--payoff", required=True)
        p.add_argument("--t", type=int)
        p.add_argument("--dirs", help="support directions, e.g. '1,0;0,1'")
        p.add_argument("--out")

    p = sub.add_parser("check", help="run a consistency check")
    p.add_argument("--tree", required=True)
    _add_measure_flags(p)
    p.add_argument("--check", required=True, choices=CHECK_CHOICES)
    p.add_argument("--t", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--payoff", help="payoff name (recursion check)")
    p.add_argument("--pair", help="dual pair name (cocycle/stability/wmax)")
    p.add_argument("--tol", type=float, default=1e-10, help="entropic tolerance")
    p.add_argument("--out")

    p = sub.add_parser("plot-data", help="dump projected vertices/rays as CSV")
    p.add_argument("--result", required=True, help="eval result document")
    p.add_argument("--node", required=True)
    p.add_argument("--coords", required=True, help="2 or 3 coordinates, e.g. '0,1'")
    p.add_argument("--out")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "validate":
            return _cmd_validate(args)
        if args.verb == "eval":
            return _cmd_eval(args)
        if args.verb == "compose":
            return _cmd_eval(args, verb="compose")
        if args.verb == "check":
            return _cmd_check(args)
        if args.verb == "plot-data":
            return _cmd_plot_data(args)
        raise UsageError(f"unknown verb {args.verb!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DocumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
