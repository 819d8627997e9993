"""Fabrication and performance metrics, and the end-to-end report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .code import BBCode, TABLE_CODES, build_code, build_schedule, registry_spec
from .layout import (
    FixedCouplerLayout,
    TorusLayout,
    fixed_coupler_layout,
    planar_l1,
    search_layout,
    toric_l1,
    toric_l2,
)
from .noise import DEFAULT_PARAMS, HardwareParams, p2q, p2q_curves
from .routing import (
    RoutedPass,
    cycle_duration,
    route_schedule_lattice,
    route_schedule_toric,
)


def planar_l2(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


# --- coupler census -------------------------------------------------------------

@dataclass(frozen=True)
class CouplerCensus:
    """Long-range couplers of one design.

    ``buckets`` counts couplers by planar span on the chip (cavity pitches,
    L1); ``toric_buckets`` uses the toric L1 distance of the endpoints instead.
    """

    design: str
    buckets: dict[int, int]
    toric_buckets: dict[int, int]
    wrap: int
    long_range: int

    @property
    def total(self) -> int:
        return sum(self.buckets.values())

    @property
    def max_range(self) -> int:
        return max(self.buckets, default=0)

    def to_json(self) -> dict:
        return {
            "design": self.design,
            "total": self.total,
            "wrap": self.wrap,
            "long_range": self.long_range,
            "max_range": self.max_range,
            "buckets": {str(k): v for k, v in sorted(self.buckets.items())},
            "toric_buckets": {str(k): v for k, v in sorted(self.toric_buckets.items())},
        }


def wrap_couplers(dims) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """One wrap-around coupler per cavity row and per cavity column."""
    w, h = dims
    horizontal = [((w - 1, y), (0, y)) for y in range(h)]
    vertical = [((x, h - 1), (x, 0)) for x in range(w)]
    return horizontal + vertical


def _bucketize(pairs, dims) -> tuple[dict[int, int], dict[int, int]]:
    planar: dict[int, int] = {}
    toric: dict[int, int] = {}
    for a, b in pairs:
        d = planar_l1(a, b)
        planar[d] = planar.get(d, 0) + 1
        t = toric_l1(a, b, dims)
        toric[t] = toric.get(t, 0) + 1
    return planar, toric


def coupler_census(layout: TorusLayout | FixedCouplerLayout) -> CouplerCensus:
    """Toric design: the W + H wrap couplers. Fixed design: 2n long-range plus its wrap edges."""
    if isinstance(layout, FixedCouplerLayout):
        pairs = [(c.a, c.b) for c in layout.couplers if c.kind in ("long", "wrap")]
        wraps = sum(c.kind == "wrap" for c in layout.couplers)
        planar, toric = _bucketize(pairs, layout.dims)
        return CouplerCensus("fixed", planar, toric, wraps, len(pairs) - wraps)
    pairs = wrap_couplers(layout.dims)
    planar, toric = _bucketize(pairs, layout.dims)
    return CouplerCensus("toric", planar, toric, len(pairs), 0)


@dataclass(frozen=True)
class ScalingFit:
    rows: tuple[tuple[str, int, int, int], ...]  # (code, n, toric, fixed)
    toric_exponent: float
    fixed_exponent: float

    def to_json(self) -> dict:
        return {
            "rows": [dict(zip(("code", "n", "toric", "fixed"), r)) for r in self.rows],
            "toric_exponent": self.toric_exponent,
            "fixed_exponent": self.fixed_exponent,
        }


def coupler_scaling(codes: Sequence[BBCode]) -> ScalingFit:
    """Log-log slope of coupler count versus n for both designs."""
    if len(codes) < 3:
        raise ValueError("coupler scaling needs at least three codes")
    rows = []
    for code in codes:
        w, h = 2 * code.l, 2 * code.m
        toric = w + h
        fixed = coupler_census(fixed_coupler_layout(code)).total
        rows.append((code.name, code.n, toric, fixed))
    n = np.log([r[1] for r in rows])
    if np.ptp(n) == 0:
        raise ValueError("coupler scaling needs codes of different sizes")
    t_exp = float(np.polyfit(n, np.log([r[2] for r in rows]), 1)[0])
    f_exp = float(np.polyfit(n, np.log([r[3] for r in rows]), 1)[0])
    return ScalingFit(tuple(rows), t_exp, f_exp)


# --- wire length ----------------------------------------------------------------

FIXED_CONVENTIONS = ("planar", "toric")


def wire_length_total(layout: TorusLayout | FixedCouplerLayout, convention: str = "planar") -> float:
    """Summed length of all 6n check-data interactions, in cavity pitches.

    For a searched layout each interaction contributes its toric L2 length. For
    the fixed-coupler design each interaction is a physical coupler: nearest
    neighbors count 1 and the rest count their planar L2 span on the chip
    (``convention="planar"``), or toric L2 with wrap edges at 1
    (``convention="toric"``).
    """
    if isinstance(layout, FixedCouplerLayout):
        if convention not in FIXED_CONVENTIONS:
            raise ValueError(f"convention must be one of {FIXED_CONVENTIONS}")
        total = []
        for c in layout.couplers:
            if c.kind == "local":
                total.append(1.0)
            elif convention == "planar":
                total.append(planar_l2(c.a, c.b))
            else:
                total.append(1.0 if c.kind == "wrap" else toric_l2(c.a, c.b, layout.dims))
        return math.fsum(total)
    place = layout.placement
    return math.fsum(toric_l2(place[a], place[b], layout.dims) for a, b, _ in layout.edges())


def reduction(ours: float, baseline: float) -> float:
    return 1.0 - ours / baseline


# --- report ---------------------------------------------------------------------

class ReportError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Report:
    code: str
    n: int
    k: int
    layout: dict
    routing: dict
    cycle_duration: dict
    worst_case_p2q: dict
    census: dict
    wire_length: dict
    p2q_curves: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 - relabelled for the caller
        raise ReportError(name, exc) from exc


def max_r(routed: Iterable[RoutedPass]) -> int:
    return max((route.r for p in routed for route in p.routes), default=0)


def run_report(
    code: str | BBCode,
    params: HardwareParams = DEFAULT_PARAMS,
    impl: str = "sws",
    detect: bool = True,
    policy: str = "fixed",
    curve_r: int = 40,
) -> Report:
    """Full pipeline for one code: layout, routing, durations, noise, census, wire length."""
    if isinstance(code, str):
        code = _stage("code", lambda name: build_code(registry_spec(name)), code)
    schedule = _stage("schedule", build_schedule, code)
    layout = _stage("layout", search_layout, code)
    fixed = _stage("fixed-layout", fixed_coupler_layout, code)
    toric = _stage("route", route_schedule_toric, layout, schedule, policy)
    lattice = _stage("route-lattice", route_schedule_lattice, layout, schedule)

    r_max = max_r(toric)
    t_toric = _stage("duration", cycle_duration, toric, params, impl, detect)
    t_lattice = _stage("duration", cycle_duration, lattice, params, impl, detect)
    worst = {
        "r_max": r_max,
        "sws_detect": p2q(r_max, params, "sws", True),
        "sws_no_detect": p2q(r_max, params, "sws", False),
        "iswap_cz": p2q(r_max, params, "iswap-cz"),
        "cvdv": p2q(r_max, params, "cvdv"),
    }
    c_toric = coupler_census(layout)
    c_fixed = coupler_census(fixed)
    ours = wire_length_total(layout)
    base = wire_length_total(fixed, "planar")
    base_toric = wire_length_total(fixed, "toric")
    return Report(
        code=code.name,
        n=code.n,
        k=code.k,
        layout={
            "dims": list(layout.dims),
            "basis": [str(layout.basis.g1), str(layout.basis.g2)],
            "offsets": {t: list(o) for t, o in layout.offsets},
            "max_cell_l1": layout.max_distance,
            "max_cavity_l1": layout.max_l1(),
            "fixed_max_cavity_l1": fixed.layout.max_l1(),
        },
        routing={
            "policy": policy,
            "toric_rounds": [p.rounds for p in toric],
            "toric_counts": [c for p in toric for c in p.round_counts()],
            "toric_r": [p.round_rs for p in toric],
            "lattice_rounds": [p.rounds for p in lattice],
            "lattice_counts": [p.round_counts() for p in lattice],
            "lattice_r": [p.round_rs for p in lattice],
        },
        cycle_duration={
            "impl": impl,
            "detect": detect,
            "toric_us": t_toric,
            "lattice_us": t_lattice,
            "ratio": t_toric / t_lattice,
        },
        worst_case_p2q=worst,
        census={
            "toric": c_toric.to_json(),
            "fixed": c_fixed.to_json(),
            "ratio": c_toric.total / c_fixed.total,
            "raw_2n": 2 * code.n,
        },
        wire_length={
            "ours": ours,
            "fixed": base,
            "reduction": reduction(ours, base),
            "fixed_toric_convention": base_toric,
            "reduction_toric_convention": reduction(ours, base_toric),
        },
        p2q_curves=p2q_curves(range(curve_r + 1), params),
        settings={"params": params.to_dict(), "impl": impl, "detect": detect, "policy": policy},
    )


def family_codes() -> list[BBCode]:
    return [build_code(registry_spec(name)) for name in TABLE_CODES]
