"""Dimension-ordered (XY) routing of syndrome-extraction gates.

For every gate the photon of the check qubit travels from its cavity to the data
qubit's cavity: first horizontally (X leg), then vertically (Y leg), performs
the SWS gate, and returns along the reverse path. One timestep is one
beamsplitter SWAP.

Within a round every X leg starts at timestep 0 and every Y leg starts once the
longest X leg of the round is done. Modes then wait at their destination until
the last one arrives, so all gates of a round share the same one-way count ``r``
(travel plus idle). The return trip replays the whole round backwards, which
keeps it conflict-free whenever the outbound half is.

Occupancy model: a mode that moves from ``u`` to ``v`` during a timestep uses
both cavities, a waiting mode uses its own. Two modes conflict when they use a
common cavity in the same timestep, so same-direction neighbors need one idle
cavity between them and head-on crossings are caught.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .code import Gate, Pass, SyndromeSchedule
from .layout import Coord, TorusLayout, toric_delta
from .noise import DEFAULT_PARAMS, HardwareParams, gate_time

DIRECTION_POLICIES = ("fixed", "shortest")


class RoutingConflictError(RuntimeError):
    pass


@dataclass(frozen=True)
class Route:
    gate_id: int
    gate: Gate
    src: Coord
    dst: Coord
    x_dir: str  # "left" (decreasing column), "right" or "none"
    x_len: int
    y_dir: str  # "down" (increasing row), "up" or "none"
    y_len: int
    idle: int  # waiting steps inside the one-way trip
    y_start: int  # timestep at which the Y leg begins
    round: int = 0

    @property
    def r(self) -> int:
        return self.x_len + self.y_len + self.idle

    @cached_property
    def timeline(self) -> tuple[Coord, ...]:
        """Outbound cavity at timesteps ``0 .. r`` relative to the round start.

        Coordinates are unwrapped; reduce them modulo the grid for toric routes.
        """
        sx = {"left": -1, "right": 1, "none": 0}[self.x_dir]
        sy = {"up": -1, "down": 1, "none": 0}[self.y_dir]
        x, y = self.src
        out = [(x, y)]
        for t in range(1, self.r + 1):
            if t <= self.x_len:
                x += sx
            elif self.y_start < t <= self.y_start + self.y_len:
                y += sy
            out.append((x, y))
        return tuple(out)


def compute_r(route: Route) -> int:
    """One-way SWAP count: X leg + Y leg + scheduled idles."""
    return route.x_len + route.y_len + route.idle


@dataclass(frozen=True)
class RoutedPass:
    pass_index: int
    routes: tuple[Route, ...]
    dims: Coord
    wrap: bool = True
    dwell: int = 1  # timesteps spent at the destination for the SWS gate

    @property
    def round_rs(self) -> list[int]:
        """One-way count of each round, in order."""
        out: dict[int, int] = {}
        for route in self.routes:
            out[route.round] = max(out.get(route.round, 0), route.r)
        return [out[k] for k in sorted(out)]

    @property
    def rounds(self) -> int:
        return max(1, len(self.round_rs))

    def round_counts(self) -> list[int]:
        counts: dict[int, int] = {}
        for route in self.routes:
            counts[route.round] = counts.get(route.round, 0) + 1
        return [counts[k] for k in sorted(counts)]

    def round_length(self, r: int) -> int:
        """Timesteps of one round trip: out, dwell, back."""
        return 2 * r + self.dwell + 1

    def round_starts(self) -> list[int]:
        starts, t = [], 0
        for r in self.round_rs:
            starts.append(t)
            t += self.round_length(r)
        return starts

    def _wrap(self, c: Coord) -> Coord:
        if not self.wrap:
            return c
        return c[0] % self.dims[0], c[1] % self.dims[1]

    def full_path(self, route: Route) -> list[Coord]:
        """Positions over the round trip of ``route``, padded to the round length."""
        r_round = self.round_rs[route.round]
        out = list(route.timeline) + [route.timeline[-1]] * (r_round - route.r)
        return out + [out[-1]] * self.dwell + out[::-1]

    def usage(self, route: Route) -> Iterable[tuple[int, Coord]]:
        """(absolute timestep, cavity) pairs used by ``route``."""
        start = self.round_starts()[route.round]
        path = [self._wrap(c) for c in self.full_path(route)]
        yield start, path[0]
        for t in range(1, len(path)):
            yield start + t, path[t - 1]
            if path[t] != path[t - 1]:
                yield start + t, path[t]

    def occupancy(self) -> dict[tuple[int, Coord], list[int]]:
        occ: dict[tuple[int, Coord], list[int]] = {}
        for route in self.routes:
            for key in self.usage(route):
                occ.setdefault(key, []).append(route.gate_id)
        return occ

    def occupancy_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["timestep", "col", "row", "gate"])
        for (t, (c, r)), gids in sorted(self.occupancy().items()):
            for g in gids:
                writer.writerow([t, c, r, g])
        return buf.getvalue()

    def to_json(self) -> dict:
        starts = self.round_starts()
        return {
            "pass": self.pass_index,
            "rounds": self.rounds,
            "round_r": self.round_rs,
            "gates": [
                {
                    "id": route.gate_id,
                    "category": str(route.gate.category),
                    "src": list(route.src),
                    "dst": list(route.dst),
                    "x_leg": [route.x_dir, route.x_len],
                    "y_leg": [route.y_dir, route.y_len],
                    "idle": route.idle,
                    "r": route.r,
                    "round": route.round,
                    "start_time": starts[route.round],
                }
                for route in self.routes
            ],
        }


def _adjacent(a: Coord, b: Coord, dims: Coord, wrap: bool) -> bool:
    if wrap:
        dx, dy = toric_delta(a, b, dims)
    else:
        dx, dy = b[0] - a[0], b[1] - a[1]
    return abs(dx) + abs(dy) <= 1


def verify_conflict_free(routed: RoutedPass) -> bool:
    """Full scan: routes are well formed and no cavity is used twice per timestep."""
    seen: set[tuple[int, Coord]] = set()
    for route in routed.routes:
        line = [routed._wrap(c) for c in route.timeline]
        if line[0] != routed._wrap(route.src) or line[-1] != routed._wrap(route.dst):
            return False
        if len(line) != compute_r(route) + 1:
            return False
        if not routed.wrap and any(not (0 <= c < routed.dims[0] and 0 <= r < routed.dims[1]) for c, r in route.timeline):
            return False
        if any(not _adjacent(a, b, routed.dims, routed.wrap) for a, b in zip(line, line[1:])):
            return False
        for key in set(routed.usage(route)):
            if key in seen:
                return False
            seen.add(key)
    return True


def cavity_in_use(routed: RoutedPass, t: int, cavity: Coord) -> bool:
    """Whether a probe mode resting in ``cavity`` at timestep ``t`` would conflict."""
    return any(key == (t, routed._wrap(cavity)) for r in routed.routes for key in routed.usage(r))


# --- toric routing ----------------------------------------------------------------

def _x_leg(check_type: str, dx: int, width: int, policy: str) -> tuple[str, int]:
    if policy == "fixed":
        if check_type == "X":
            n = (-dx) % width
            return ("left", n) if n else ("none", 0)
        n = dx % width
        return ("right", n) if n else ("none", 0)
    if policy == "shortest":
        if dx == 0:
            return "none", 0
        return ("left", -dx) if dx < 0 else ("right", dx)
    raise ValueError(f"direction policy must be one of {DIRECTION_POLICIES}")


def _y_leg(dy: int) -> tuple[str, int]:
    if dy == 0:
        return "none", 0
    return ("up", -dy) if dy < 0 else ("down", dy)


def _synchronize(legs: list[tuple[int, Gate, Coord, Coord, str, int, str, int]], round_index: int) -> list[Route]:
    x_max = max((leg[5] for leg in legs), default=0)
    r = x_max + max((leg[7] for leg in legs), default=0)
    return [
        Route(gid, gate, src, dst, xd, xl, yd, yl, r - xl - yl, x_max, round_index)
        for gid, gate, src, dst, xd, xl, yd, yl in legs
    ]


def route_pass_toric(layout: TorusLayout, pass_: Pass, policy: str = "fixed", dwell: int = 1, verify: bool = True) -> RoutedPass:
    """Route every gate of ``pass_`` in one round on the torus.

    With ``policy="fixed"`` X-check photons always travel left and Z-check photons
    right; ``"shortest"`` takes the shorter horizontal direction per category.
    Y legs take the shorter vertical direction, ties toward increasing row.
    """
    w, h = layout.dims
    place = layout.placement
    legs = []
    for gid, gate in enumerate(pass_.gates):
        src, dst = place[gate.check], place[gate.data]
        dx, dy = toric_delta(src, dst, layout.dims)
        xd, xl = _x_leg(gate.category.check, dx, w, policy)
        yd, yl = _y_leg(dy)
        legs.append((gid, gate, src, dst, xd, xl, yd, yl))
    routed = RoutedPass(pass_.index, tuple(_synchronize(legs, 0)), layout.dims, True, dwell)
    if verify and not verify_conflict_free(routed):
        raise RoutingConflictError(f"pass {pass_.index}: conflicting routes; layout breaks the symmetry preconditions")
    return routed


def route_schedule_toric(layout: TorusLayout, schedule: SyndromeSchedule, policy: str = "fixed", dwell: int = 1) -> list[RoutedPass]:
    return [route_pass_toric(layout, p, policy, dwell) for p in schedule]


# --- lattice baseline -------------------------------------------------------------

def route_pass_lattice_greedy(layout: TorusLayout, pass_: Pass, dwell: int = 1) -> RoutedPass:
    """Greedy XY routing on the same placement without wrap-around couplers.

    Gates are visited in order; a gate joins the current round iff its path
    shares no (timestep, cavity) with the paths already committed to the round.
    The Y-leg start of a round is the longest X leg among the gates still
    waiting when the round opens, and parked modes hold their destination until
    the latest possible arrival of that round.
    """
    place = layout.placement
    pending = []
    for gid, gate in enumerate(pass_.gates):
        (sx, sy), (tx, ty) = place[gate.check], place[gate.data]
        xd, xl = ("left", sx - tx) if tx < sx else (("right", tx - sx) if tx > sx else ("none", 0))
        yd, yl = _y_leg(ty - sy)
        pending.append((gid, gate, (sx, sy), (tx, ty), xd, xl, yd, yl))
    routes: list[Route] = []
    round_index = 0
    while pending:
        x_max = max(leg[5] for leg in pending)
        horizon = x_max + max(leg[7] for leg in pending)
        used: set[tuple[int, Coord]] = set()
        committed, left = [], []
        for leg in pending:
            gid, gate, src, dst, xd, xl, yd, yl = leg
            probe = Route(gid, gate, src, dst, xd, xl, yd, yl, horizon - xl - yl, x_max)
            keys = set(_lattice_usage(probe.timeline))
            if keys & used:
                left.append(leg)
                continue
            used |= keys
            committed.append(leg)
        routes.extend(_synchronize(committed, round_index))
        pending = left
        round_index += 1
    routes.sort(key=lambda r: r.gate_id)
    routed = RoutedPass(pass_.index, tuple(routes), layout.dims, False, dwell)
    return routed


def _lattice_usage(line: Sequence[Coord]) -> Iterable[tuple[int, Coord]]:
    yield 0, line[0]
    for t in range(1, len(line)):
        yield t, line[t - 1]
        if line[t] != line[t - 1]:
            yield t, line[t]


def route_schedule_lattice(layout: TorusLayout, schedule: SyndromeSchedule, dwell: int = 1) -> list[RoutedPass]:
    return [route_pass_lattice_greedy(layout, p, dwell) for p in schedule]


# --- durations ----------------------------------------------------------------------

def pass_duration(routed: RoutedPass, params: HardwareParams = DEFAULT_PARAMS, impl: str = "sws", detect: bool = True) -> float:
    """Sum over rounds of the gate time at the round's one-way count."""
    return sum(gate_time(r, params, impl, detect) for r in routed.round_rs)


def cycle_duration(
    routed_passes: Sequence[RoutedPass],
    params: HardwareParams = DEFAULT_PARAMS,
    impl: str = "sws",
    detect: bool = True,
) -> float:
    """All passes of one extraction cycle plus the measurement/reset allowance."""
    return sum(pass_duration(p, params, impl, detect) for p in routed_passes) + params.meas_reset_time


def schedule_json(routed_passes: Sequence[RoutedPass]) -> str:
    return json.dumps([p.to_json() for p in routed_passes], indent=1, sort_keys=True)
