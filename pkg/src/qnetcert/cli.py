"""Command-line front end: analyze, simulate, certify, scan, finner.

Exit codes: 0 success, 2 input error, 3 indeterminate numerics.  All report
output is deterministic (sorted keys, fixed atom order); scan CSV rows carry
wall time as their only nondeterministic column.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import catalog
from .classical import StrategyError
from .lp import IndeterminateError, LpError
from .network import Network, NetworkError, check_ecs, check_ndcs, find_pfis
from .outcomes import ColorMatch, color_marginal, token_marginal
from .quantum import InvalidStrategyError, Strategy, coarse_grain, joint_distribution
from .rigidity import (
    VERDICT_INDETERMINATE,
    ambiguous_event,
    certify_nonlocality,
    finner_check,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INDETERMINATE = 3

_ANGLE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")


class InputError(ValueError):
    pass


def parse_angle(text: str) -> float:
    """Parse a decimal angle or an exact pi fraction like ``pi/8`` or ``3pi/4``."""
    m = _ANGLE_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0:
            raise InputError(f"bad angle {text!r}")
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise InputError(f"bad angle {text!r}") from None


@dataclass
class SweepRow:
    theta: float
    verdict: str
    margin: float | None
    event_prob: float | None
    ms: float


def _load_strategy(args) -> tuple[Network, Strategy]:
    target = args.target
    if target.endswith(".json"):
        try:
            strategy = Strategy.from_json(Path(target).read_text())
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise InputError(f"cannot load strategy {target!r}: {exc}") from exc
        return strategy.network, strategy
    theta = parse_angle(args.theta) if getattr(args, "theta", None) else None
    lam = args.lam if getattr(args, "lam", None) is not None else None
    try:
        return catalog.build(target, theta=theta, lam=lam,
                             asym_last=getattr(args, "asym_last", False))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    try:
        net = Network.from_json(Path(args.network).read_text(), allow_redundant=True)
    except (OSError, NetworkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    pfis = find_pfis(net)
    doc = {
        "parties": list(net.parties),
        "sources": {sid: list(net.source_parties(sid)) for sid in net.source_ids},
        "redundant_sources": net.is_redundant(),
        "ndcs": check_ndcs(net),
        "ecs": check_ecs(net),
        "pfis": None if pfis is None else {p: x for p, x in pfis.weights},
    }
    if args.json:
        _emit(args, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        lines = [
            f"parties: {len(net.parties)}  sources: {len(net.source_ids)}",
            f"NDCS: {doc['ndcs']}",
            f"ECS: {doc['ecs']}",
        ]
        if pfis is None:
            lines.append("PFIS: none (rigidity unproven for CM strategies)")
        else:
            lines.append("PFIS: " + " ".join(f"{p}={x:.6g}" for p, x in pfis.weights))
        if doc["redundant_sources"]:
            lines.append("note: network has redundant sources")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    net, strategy = _load_strategy(args)
    dist = joint_distribution(net, strategy.states, strategy.bases)
    if args.coarse == "token":
        dist = coarse_grain(dist, token_marginal)
    elif args.coarse == "color":
        dist = coarse_grain(dist, color_marginal)
    _emit(args, dist.to_json())
    return EXIT_OK


def cmd_certify(args) -> int:
    net, strategy = _load_strategy(args)
    report = certify_nonlocality(net, strategy, ambiguous_event(),
                                 strong_marginals=args.strong_marginals)
    if args.json or args.out:
        _emit(args, report.to_json())
    if not args.out and not args.json:
        line = f"verdict: {report.verdict}"
        if report.margin is not None:
            line += f"  margin: {report.margin:.6g}"
        if report.refusal_reason:
            line += f"  ({report.refusal_reason})"
        print(line)
    return EXIT_OK


def _scan_point(payload) -> SweepRow:
    name, theta, strong = payload
    start = time.perf_counter()
    try:
        net, strategy = catalog.build(name, theta=theta)
        report = certify_nonlocality(net, strategy, ambiguous_event(),
                                     strong_marginals=strong)
        verdict = report.verdict
        margin = report.margin
        prob = report.event_probability
    except IndeterminateError:
        verdict, margin, prob = VERDICT_INDETERMINATE, None, None
    ms = (time.perf_counter() - start) * 1000.0
    return SweepRow(theta=theta, verdict=verdict, margin=margin, event_prob=prob, ms=ms)


def cmd_scan(args) -> int:
    lo = parse_angle(args.start)
    hi = parse_angle(args.stop)
    if args.steps < 2 or hi < lo:
        raise InputError("need at least two steps and stop >= start")
    thetas = [lo + (hi - lo) * k / (args.steps - 1) for k in range(args.steps)]
    jobs = [(args.target, theta, args.strong_marginals) for theta in thetas]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_scan_point, jobs))
    else:
        rows = [_scan_point(job) for job in jobs]
    rows.sort(key=lambda r: r.theta)

    def fmt(x):
        return "" if x is None else repr(x)

    out = args.out
    if out:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "verdict", "margin", "event_prob", "ms"])
            for r in rows:
                w.writerow([repr(r.theta), r.verdict, fmt(r.margin), fmt(r.event_prob), f"{r.ms:.3f}"])
        if not args.no_plot:
            from .figures import render_scan_figure

            render_scan_figure(rows, Path(out).with_suffix(".png"))
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["theta", "verdict", "margin", "event_prob", "ms"])
        for r in rows:
            w.writerow([repr(r.theta), r.verdict, fmt(r.margin), fmt(r.event_prob), f"{r.ms:.3f}"])
    return EXIT_OK


def cmd_finner(args) -> int:
    net, strategy = _load_strategy(args)
    weights = find_pfis(net)
    if weights is None:
        print("error: the network admits no PFIS weights", file=sys.stderr)
        return EXIT_INPUT
    color = args.color
    indicators = {p: (lambda a, c=color: a == ColorMatch(c)) for p in net.parties}
    dist = joint_distribution(net, strategy.states, strategy.bases)
    res = finner_check(dist, weights, indicators)
    doc = {"lhs": res.lhs, "rhs": res.rhs, "gap": res.gap,
           "indicator": f"match color {color}"}
    _emit(args, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _add_strategy_args(p, with_params=True):
    p.add_argument("target", help="catalog name (5-0, ring:n, 1-2, kn:n, coloring:n) or a strategy .json file")
    if with_params:
        p.add_argument("--theta", help="angle in radians or a pi fraction like pi/8")
        p.add_argument("--lam", type=float, help="lambda parameter of the reflection blocks")
        p.add_argument("--asym-last", action="store_true",
                       help="give the last party the balanced block (rings)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnetcert",
        description="Simulate no-input quantum network strategies and certify nonlocality.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structural checks of a network file")
    p.add_argument("network", help="network .json file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="exact joint output distribution")
    _add_strategy_args(p)
    p.add_argument("--coarse", choices=["none", "token", "color"], default="none")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="run the rigidity certification pipeline")
    _add_strategy_args(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--strong-marginals", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scan", help="sweep certification over a parameter range")
    p.add_argument("target")
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--to", dest="stop", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strong-marginals", action="store_true")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the PNG rendered alongside the CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("finner", help="evaluate the Finner inequality for match indicators")
    _add_strategy_args(p)
    p.add_argument("--color", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_finner)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NetworkError, StrategyError, InvalidStrategyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IndeterminateError as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except LpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
