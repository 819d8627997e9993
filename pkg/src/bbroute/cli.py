"""Command-line entry point: ``bbroute <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .circuit import emit_memory_experiment, manifest_json
from .code import BBCode, BBCodeSpec, TABLE_CODES, build_code, build_schedule, code_distance_bruteforce, registry_spec
from .gf2 import DistanceNotFoundError, EnumerationBudgetError
from .layout import METRICS, SearchPolicy, fixed_coupler_layout, search_layout
from .metrics import ReportError, coupler_census, coupler_scaling, max_r, run_report, wire_length_total
from .noise import (
    IMPLEMENTATIONS,
    DescentProblem,
    HardwareParams,
    breakdown_csv,
    landscape,
    p2q_curves,
    p2q_sws,
    steepest_descent_path,
)
from .routing import DIRECTION_POLICIES, route_schedule_lattice, route_schedule_toric, schedule_json

EXIT_OK, EXIT_VALIDATION, EXIT_PIPELINE = 0, 2, 3


class ValidationError(ValueError):
    pass


def _load_code(args) -> BBCode:
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
            return build_code(BBCodeSpec.from_config(cfg))
        except (OSError, ValueError, KeyError) as exc:
            raise ValidationError(f"bad code config: {exc}") from exc
    try:
        return build_code(registry_spec(args.code))
    except KeyError as exc:
        raise ValidationError(f"unknown code {args.code!r}; known: {', '.join(TABLE_CODES)}") from exc


def _load_params(args) -> HardwareParams:
    if not args.params:
        return HardwareParams()
    try:
        return HardwareParams.load(args.params)
    except (OSError, ValueError, TypeError) as exc:
        raise ValidationError(f"bad parameter file: {exc}") from exc


def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


class Output:
    """Writes named artifacts under ``--out`` or prints the primary one."""

    def __init__(self, out: str | None):
        self.dir = Path(out) if out else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str, primary: bool = False) -> None:
        if self.dir:
            (self.dir / name).write_text(text)
        elif primary:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_code(args, out: Output) -> None:
    code = _load_code(args)
    info = {"name": code.name, "l": code.l, "m": code.m, "n": code.n, "k": code.k,
            "a": [str(t) for t in code.spec.a], "b": [str(t) for t in code.spec.b]}
    if args.distance or args.distance_cap:
        try:
            info["d"] = code_distance_bruteforce(code, args.distance_cap)
        except (EnumerationBudgetError, DistanceNotFoundError) as exc:
            raise ValidationError(str(exc)) from exc
    out.emit("code.json", json.dumps(info, indent=1, sort_keys=True), primary=True)


def cmd_layout(args, out: Output) -> None:
    code = _load_code(args)
    layout = search_layout(code, SearchPolicy(metric=args.metric))
    out.emit("layout.json", layout.dumps(), primary=True)


def cmd_route(args, out: Output) -> None:
    code = _load_code(args)
    layout = search_layout(code)
    schedule = build_schedule(code)
    if args.lattice:
        routed = route_schedule_lattice(layout, schedule)
    else:
        routed = route_schedule_toric(layout, schedule, args.direction)
    out.emit("routes.json", schedule_json(routed), primary=True)
    for p in routed:
        out.emit(f"occupancy_pass{p.pass_index}.csv", p.occupancy_csv())


def cmd_noise(args, out: Output) -> None:
    params = _load_params(args)
    rs = range(args.r_max + 1)
    if args.impl == "sws":
        text = breakdown_csv([p2q_sws(r, params, args.detect) for r in rs], gate_ids=list(rs))
        out.emit("breakdown.csv", text, primary=True)
    out.emit("p2q_curves.csv", _csv(p2q_curves(rs, params)), primary=args.impl != "sws")


def cmd_emit(args, out: Output) -> None:
    code = _load_code(args)
    params = _load_params(args)
    layout = search_layout(code)
    routed = route_schedule_toric(layout, build_schedule(code), args.direction)
    cycles = args.cycles
    if cycles is None:
        cycles = TABLE_CODES[code.name][6] if code.name in TABLE_CODES else 1
    circ, manifest = emit_memory_experiment(
        code, layout, routed, params, args.impl, args.detect, cycles, args.basis,
        noiseless=args.noiseless, seed=args.seed,
    )
    out.emit("circuit.stim", circ.to_stim(), primary=True)
    out.emit("manifest.json", manifest_json(manifest))


def cmd_landscape(args, out: Output) -> None:
    code = _load_code(args)
    params = _load_params(args)
    routed = route_schedule_toric(search_layout(code), build_schedule(code), args.direction)
    r = max_r(routed)
    ts = np.linspace(args.t_swap_range[0], args.t_swap_range[1], args.grid)
    tc = np.linspace(args.t1_range[0], args.t1_range[1], args.grid)
    grid = landscape(ts, tc, r, params, args.impl, args.detect)
    rows = [{"t_SWAP": float(a), "T1_cav": float(b), "p2q": float(grid[i, j])}
            for i, a in enumerate(ts) for j, b in enumerate(tc)]
    problem = DescentProblem(r, params, args.impl, args.detect)
    path = steepest_descent_path(problem, (params.t_SWAP, params.T1_cav), args.step, args.points)
    path_rows = [{"t_SWAP": a, "T1_cav": b, "p2q": problem.value((a, b))} for a, b in path]
    out.emit("landscape.csv", _csv(rows))
    out.emit("descent_path.csv", _csv(path_rows), primary=True)


def cmd_census(args, out: Output) -> None:
    names = args.codes or list(TABLE_CODES)
    codes = []
    for name in names:
        try:
            codes.append(build_code(registry_spec(name)))
        except KeyError as exc:
            raise ValidationError(f"unknown code {name!r}") from exc
    rows = []
    for code in codes:
        layout = search_layout(code)
        fixed = fixed_coupler_layout(code)
        ct, cf = coupler_census(layout), coupler_census(fixed)
        ours, base = wire_length_total(layout), wire_length_total(fixed)
        rows.append({"code": code.name, "n": code.n, "toric": ct.total, "fixed": cf.total,
                     "fixed_max_range": cf.max_range, "wire_ours": ours, "wire_fixed": base,
                     "wire_reduction": 1 - ours / base})
    result = {"codes": rows}
    if len(codes) >= 3:
        result["scaling"] = coupler_scaling(codes).to_json()
    out.emit("census.csv", _csv(rows))
    out.emit("census.json", json.dumps(result, indent=1, sort_keys=True), primary=True)


def cmd_report(args, out: Output) -> None:
    params = _load_params(args)
    code = _load_code(args)
    report = run_report(code, params, args.impl, args.detect, args.direction)
    out.emit("report.json", report.dumps(), primary=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="hardware parameter JSON (defaults embedded)")
    common.add_argument("--impl", choices=IMPLEMENTATIONS, default="sws")
    common.add_argument("--detect", action=argparse.BooleanOptionalAction, default=True,
                        help="erasure detection after each SWS gate")
    common.add_argument("--out", help="directory for artifacts; stdout when omitted")
    common.add_argument("--seed", type=int, default=0, help="recorded in emitted artifacts")

    def code_args(p):
        p.add_argument("--code", default="18-4-4", help=f"registry name: {', '.join(TABLE_CODES)}")
        p.add_argument("--config", help="JSON with keys l, m, a_poly, b_poly")

    parser = argparse.ArgumentParser(prog="bbroute", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("code", parents=[common], help="code parameters")
    code_args(p)
    p.add_argument("--distance", action="store_true", help="exhaustive distance (small codes)")
    p.add_argument("--distance-cap", type=int, help="weight-capped distance search")
    p.set_defaults(func=cmd_code)

    p = sub.add_parser("layout", parents=[common], help="searched toric layout as JSON")
    code_args(p)
    p.add_argument("--metric", choices=METRICS, default="l1-cell")
    p.set_defaults(func=cmd_layout)

    for name, func, hlp in (("route", cmd_route, "routed schedule and occupancy"),
                            ("emit", cmd_emit, "noisy memory experiment in stim format"),
                            ("landscape", cmd_landscape, "worst-case p2Q landscape and descent path"),
                            ("report", cmd_report, "end-to-end report")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        code_args(p)
        p.add_argument("--direction", choices=DIRECTION_POLICIES, default="fixed",
                       help="horizontal leg direction policy")
        p.set_defaults(func=func)
        if name == "route":
            p.add_argument("--lattice", action="store_true", help="greedy routing without wrap couplers")
        if name == "emit":
            p.add_argument("--cycles", type=int, default=None, help="defaults to the code distance")
            p.add_argument("--basis", choices=("X", "Z"), default="Z")
            p.add_argument("--noiseless", action="store_true")
        if name == "landscape":
            p.add_argument("--grid", type=int, default=21)
            p.add_argument("--t-swap-range", type=float, nargs=2, default=(0.02, 0.3))
            p.add_argument("--t1-range", type=float, nargs=2, default=(300.0, 3000.0))
            p.add_argument("--points", type=int, default=12)
            p.add_argument("--step", type=float, default=0.05)

    p = sub.add_parser("noise", parents=[common], help="per-r error breakdown and implementation curves")
    p.add_argument("--r-max", type=int, default=40)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("census", parents=[common], help="coupler census, wire length and scaling")
    p.add_argument("--codes", nargs="*", help="registry names (default: all)")
    p.set_defaults(func=cmd_census)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "cycles", None) is not None and args.cycles < 1:
            raise ValidationError("--cycles must be positive")
        if getattr(args, "r_max", 0) < 0:
            raise ValidationError("--r-max must be non-negative")
        args.func(args, Output(args.out))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ReportError as exc:
        if exc.stage == "code":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except Exception as exc:  # noqa: BLE001 - mapped to the pipeline exit code
        print(f"pipeline error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
