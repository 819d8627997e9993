"""Symmetry-preserving placement of BB-code qubits on a toric cavity grid.

Every qubit type forms its own ``cell_cols x cell_rows`` torus generated by a
shared monomial basis ``(g1, g2)``; the four tori are stacked with per-type cell
offsets and interleaved into 2x2 cells. Sharing the basis makes every
interaction category a single displacement vector (translation invariance), and
the identical corner assignment in each cell gives cell invariance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .code import (
    BBCode,
    Category,
    Monomial,
    Qubit,
    QUBIT_TYPES,
    all_categories,
    monomial_order,
    transpose_monomial,
)

Coord = tuple[int, int]

# Position of each qubit type inside a 2x2 cell, as (col, row).
CORNERS: dict[str, Coord] = {"L": (0, 0), "X": (1, 0), "Z": (0, 1), "R": (1, 1)}

METRICS = ("l1-cell", "l1-cavity")


class LayoutError(RuntimeError):
    pass


def toric_delta(p: Coord, q: Coord, dims: Coord) -> Coord:
    """Per-axis minimal signed displacement from ``p`` to ``q`` (ties resolve positive)."""
    out = []
    for a, b, size in zip(p, q, dims):
        d = (b - a) % size
        if d > size - d:
            d -= size
        out.append(d)
    return out[0], out[1]


def toric_l1(p: Coord, q: Coord, dims: Coord) -> int:
    dx, dy = toric_delta(p, q, dims)
    return abs(dx) + abs(dy)


def toric_l2(p: Coord, q: Coord, dims: Coord) -> float:
    dx, dy = toric_delta(p, q, dims)
    return math.hypot(dx, dy)


def planar_l1(p: Coord, q: Coord) -> int:
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


@dataclass(frozen=True)
class CellGrid:
    cell_cols: int
    cell_rows: int
    corners: tuple[tuple[str, Coord], ...] = tuple(CORNERS.items())

    @property
    def dims(self) -> Coord:
        """Cavity grid (width, height)."""
        return 2 * self.cell_cols, 2 * self.cell_rows

    @property
    def corner(self) -> dict[str, Coord]:
        return dict(self.corners)


class Basis(NamedTuple):
    g1: Monomial  # horizontal cell axis, order cell_cols
    g2: Monomial  # vertical cell axis, order cell_rows


def _basis_coords(code: BBCode, basis: Basis, grid: CellGrid) -> dict[Monomial, Coord] | None:
    """Inverse of ``(c, r) -> g1**c g2**r``; None unless it is a bijection onto M."""
    l, m = code.l, code.m
    if (
        monomial_order(basis.g1, l, m) != grid.cell_cols
        or monomial_order(basis.g2, l, m) != grid.cell_rows
    ):
        return None
    out: dict[Monomial, Coord] = {}
    for c in range(grid.cell_cols):
        for r in range(grid.cell_rows):
            mono = Monomial((basis.g1.p * c + basis.g2.p * r) % l, (basis.g1.q * c + basis.g2.q * r) % m)
            if mono in out:
                return None
            out[mono] = (c, r)
    return out if len(out) == l * m else None


def candidate_bases(code: BBCode, grid: CellGrid) -> list[Basis]:
    """All ordered bases (g1, g2) with ord(g1)=cell_cols, ord(g2)=cell_rows generating M."""
    if grid.cell_cols * grid.cell_rows != code.half:
        raise LayoutError("cell grid does not tile the monomial group")
    monos = code.monomials()
    orders = {a: monomial_order(a, code.l, code.m) for a in monos}
    firsts = [a for a in monos if orders[a] == grid.cell_cols]
    seconds = [a for a in monos if orders[a] == grid.cell_rows]
    out = []
    for g1 in firsts:
        for g2 in seconds:
            basis = Basis(g1, g2)
            if _basis_coords(code, basis, grid) is not None:
                out.append(basis)
    return out


@dataclass(frozen=True)
class SearchPolicy:
    metric: str = "l1-cell"
    bases: tuple[Basis, ...] | None = None  # restrict the candidate set
    transpose_grid: bool = False  # use an m x l cell grid instead of l x m

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")


@dataclass(frozen=True)
class TorusLayout:
    code: BBCode = field(repr=False)
    grid: CellGrid
    basis: Basis
    offsets: tuple[tuple[str, Coord], ...]  # cell offsets relative to the X torus
    max_distance: int = 0  # objective value under ``metric``
    metric: str = "l1-cell"

    @property
    def dims(self) -> Coord:
        return self.grid.dims

    @property
    def basis_choice(self) -> dict[str, Basis]:
        return {t: self.basis for t in QUBIT_TYPES}

    @cached_property
    def _coords(self) -> dict[Monomial, Coord]:
        coords = _basis_coords(self.code, self.basis, self.grid)
        if coords is None:
            raise LayoutError(f"{self.basis} does not generate the monomial group")
        return coords

    def cell_of(self, qubit: Qubit) -> Coord:
        c, r = self._coords[qubit.label]
        oc, orow = dict(self.offsets)[qubit.kind]
        return (c + oc) % self.grid.cell_cols, (r + orow) % self.grid.cell_rows

    def position(self, qubit: Qubit) -> Coord:
        c, r = self.cell_of(qubit)
        dx, dy = self.grid.corner[qubit.kind]
        return 2 * c + dx, 2 * r + dy

    @cached_property
    def placement(self) -> dict[Qubit, Coord]:
        return {
            Qubit(kind, mono): self.position(Qubit(kind, mono))
            for kind in QUBIT_TYPES
            for mono in self.code.monomials()
        }

    @cached_property
    def occupant(self) -> dict[Coord, Qubit]:
        return {pos: q for q, pos in self.placement.items()}

    def edges(self) -> Iterable[tuple[Qubit, Qubit, Category]]:
        """All 6n check-data interactions."""
        for cat in all_categories():
            for alpha in self.code.monomials():
                yield Qubit(cat.check, alpha), self.code.partner(cat, alpha), cat

    def category_vector(self, cat: Category) -> Coord:
        """Toric-minimal cavity displacement check -> data of one category."""
        check = Qubit(cat.check, Monomial(0, 0))
        return toric_delta(self.position(check), self.position(self.code.partner(cat, check.label)), self.dims)

    def max_l1(self) -> int:
        return max(toric_l1(self.position(a), self.position(b), self.dims) for a, b, _ in self.edges())

    def to_json(self) -> dict:
        return {
            "code": self.code.name,
            "grid": {"cell_cols": self.grid.cell_cols, "cell_rows": self.grid.cell_rows, "dims": list(self.dims)},
            "corners": {k: list(v) for k, v in self.grid.corners},
            "basis": {t: [str(self.basis.g1), str(self.basis.g2)] for t in QUBIT_TYPES},
            "offsets": {k: list(v) for k, v in self.offsets},
            "metric": self.metric,
            "max_distance": self.max_distance,
            "placement": [
                {"qubit": q.kind, "label": str(q.label), "p": q.label.p, "q": q.label.q, "col": c, "row": r}
                for q, (c, r) in sorted(self.placement.items(), key=lambda kv: (QUBIT_TYPES.index(kv[0].kind), kv[0].label))
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _grid_for(code: BBCode, policy: SearchPolicy) -> CellGrid:
    if policy.transpose_grid:
        return CellGrid(code.m, code.l)
    return CellGrid(code.l, code.m)


class _OffsetSpace:
    """Flattened cell-offset lattice with vectorized distance evaluation."""

    def __init__(self, grid: CellGrid, metric: str):
        self.grid = grid
        self.metric = metric
        cols, rows = grid.cell_cols, grid.cell_rows
        self.oc, self.orow = (a.ravel() for a in np.meshgrid(np.arange(cols), np.arange(rows), indexing="ij"))
        self.size = cols * rows
        dc = (self.oc[:, None] - self.oc[None, :]) % cols
        dr = (self.orow[:, None] - self.orow[None, :]) % rows
        self._diff = dc * rows + dr

    def offset(self, idx: int) -> Coord:
        return divmod(int(idx), self.grid.cell_rows)

    def profiles(self, vectors: Sequence[Coord], check: str, data: str) -> tuple[np.ndarray, np.ndarray]:
        """Per offset ``o``: max search distance and summed cavity L2 over ``v_i + o``."""
        cols, rows = self.grid.cell_cols, self.grid.cell_rows
        corner = self.grid.corner
        w, h = self.grid.dims
        worst = np.zeros(self.size, dtype=np.int64)
        total = np.zeros(self.size)
        for vc, vr in vectors:
            cc, rr = (self.oc + vc) % cols, (self.orow + vr) % rows
            dc = (2 * cc + corner[data][0] - corner[check][0]) % w
            dr = (2 * rr + corner[data][1] - corner[check][1]) % h
            dx, dy = np.minimum(dc, w - dc), np.minimum(dr, h - dr)
            if self.metric == "l1-cell":
                d = np.minimum(cc, cols - cc) + np.minimum(rr, rows - rr)
            else:
                d = dx + dy
            worst = np.maximum(worst, d)
            total += np.hypot(dx, dy)
        return worst, total

    def shifted(self, f: np.ndarray) -> np.ndarray:
        """Matrix ``F[a, z] = f[a - z]``."""
        return f[self._diff]


class _BasisProblem:
    """Offset optimization for one basis.

    X-L depends only on the L offset, X-R on the R offset, and Z-L / Z-R on their
    differences with the Z offset, so the joint problem splits into two
    (offset, Z offset) tables.
    """

    def __init__(self, code: BBCode, basis: Basis, space: _OffsetSpace):
        coords = _basis_coords(code, basis, space.grid)
        vec = {cat: coords[code.term(cat)] for cat in all_categories()}

        def prof(check, data):
            return space.profiles([vec[Category(check, data, i)] for i in (1, 2, 3)], check, data)

        xl_w, xl_s = prof("X", "L")
        xr_w, xr_s = prof("X", "R")
        zl_w, zl_s = prof("Z", "L")
        zr_w, zr_s = prof("Z", "R")
        # [o, oZ] tables
        self.wl = np.maximum(xl_w[:, None], space.shifted(zl_w))
        self.wr = np.maximum(xr_w[:, None], space.shifted(zr_w))
        self.sl = xl_s[:, None] + space.shifted(zl_s)
        self.sr = xr_s[:, None] + space.shifted(zr_s)
        self.bound = int(np.maximum(self.wl.min(axis=0), self.wr.min(axis=0)).min())

    def best_total(self, bound: int) -> tuple[float, tuple[int, int, int]]:
        """Least summed length with every category ``<= bound``; offsets (oL, oR, oZ)."""
        sl = np.where(self.wl <= bound, self.sl, np.inf)
        sr = np.where(self.wr <= bound, self.sr, np.inf)
        g, h = sl.min(axis=0), sr.min(axis=0)
        tot = g + h
        best = tot.min()
        oz = int(np.flatnonzero(tot <= best + _EPS)[0])
        ol = int(np.flatnonzero(sl[:, oz] <= g[oz] + _EPS)[0])
        orr = int(np.flatnonzero(sr[:, oz] <= h[oz] + _EPS)[0])
        return float(best), (ol, orr, oz)


_EPS = 1e-9


def search_layout(code: BBCode, policy: SearchPolicy | None = None) -> TorusLayout:
    """Minimize the largest interaction distance over bases and torus offsets.

    The bound ``D`` is the smallest value for which some basis admits offsets
    keeping all twelve categories within ``D``. Among layouts attaining it, the
    one with the least total cavity-unit L2 length is kept; remaining ties go to
    the first basis in enumeration order and the first offsets.
    """
    policy = policy or SearchPolicy()
    grid = _grid_for(code, policy)
    space = _OffsetSpace(grid, policy.metric)
    bases = list(policy.bases) if policy.bases is not None else candidate_bases(code, grid)
    if not bases:
        raise LayoutError("no candidate basis generates the monomial group")
    problems = []
    for basis in bases:
        if _basis_coords(code, basis, grid) is None:
            raise LayoutError(f"{basis} is not a basis for this grid")
        problems.append((basis, _BasisProblem(code, basis, space)))
    bound = min(p.bound for _, p in problems)
    best = None
    for basis, prob in problems:
        if prob.bound > bound:
            continue
        total, found = prob.best_total(bound)
        if best is None or total < best[0] - _EPS:
            best = (total, basis, found)
    _, basis, found = best
    ol, orr, oz = (space.offset(i) for i in found)
    offsets = (("L", ol), ("R", orr), ("X", (0, 0)), ("Z", oz))
    return TorusLayout(code, grid, basis, offsets, bound, policy.metric)


def layout_from_offsets(code: BBCode, grid: CellGrid, basis: Basis, offsets: dict[str, Coord], metric="l1-cell") -> TorusLayout:
    offs = tuple((t, tuple(offsets.get(t, (0, 0)))) for t in QUBIT_TYPES)
    return TorusLayout(code, grid, basis, offs, 0, metric)


def verify_translation_invariance(layout, code: BBCode | None = None) -> bool:
    """True iff each category has a single toric displacement vector."""
    code = code or layout.code
    placement = layout.placement
    w, h = layout.dims
    if len(set(placement.values())) != len(placement):
        return False
    vectors: dict[Category, set[Coord]] = {}
    for cat in all_categories():
        for alpha in code.monomials():
            (cx, cy), (dx, dy) = placement[Qubit(cat.check, alpha)], placement[code.partner(cat, alpha)]
            vectors.setdefault(cat, set()).add(((dx - cx) % w, (dy - cy) % h))
    return all(len(v) == 1 for v in vectors.values())


# --- fixed-coupler baseline --------------------------------------------------

class Coupler(NamedTuple):
    a: Coord
    b: Coord
    kind: str  # "local", "wrap" or "long"
    category: Category | None = None


@dataclass(frozen=True)
class FixedCouplerLayout:
    """Static-coupler baseline: each check has 4 grid neighbors plus 2 long-range partners."""

    layout: TorusLayout
    local_terms: tuple[tuple[str, tuple[int, ...]], ...]  # per (check, data) type: term indices that are local

    @property
    def code(self) -> BBCode:
        return self.layout.code

    @property
    def dims(self) -> Coord:
        return self.layout.dims

    @property
    def placement(self) -> dict[Qubit, Coord]:
        return self.layout.placement

    @cached_property
    def couplers(self) -> list[Coupler]:
        w, h = self.dims
        out = []
        for check, data, cat in self.layout.edges():
            a, b = self.placement[check], self.placement[data]
            if toric_l1(a, b, self.dims) == 1:
                kind = "local" if planar_l1(a, b) == 1 else "wrap"
            else:
                kind = "long"
            out.append(Coupler(a, b, kind, cat))
        return out

    def check_degrees(self) -> dict[Qubit, int]:
        deg: dict[Qubit, int] = {}
        for check, _, _ in self.layout.edges():
            deg[check] = deg.get(check, 0) + 1
        return deg


def fixed_coupler_layout(code: BBCode) -> FixedCouplerLayout:
    """Toric grid embedding where two A-terms and two B-terms are nearest neighbors.

    With L=(0,0), X=(1,0), Z=(0,1), R=(1,1) in each cell, an X check's grid
    neighbors are two L qubits (left/right) and two R qubits (up/down). That
    happens exactly when ``g1 = A_j A_i^-1`` and ``g2 = B_k B_l^-1`` form a basis;
    the remaining A- and B-term edges are the long-range couplers.
    """
    l, m = code.l, code.m
    a, b = code.spec.a, code.spec.b
    grids = [CellGrid(l, m)] + ([CellGrid(m, l)] if l != m else [])
    for grid in grids:
        for i, j in permutations(range(3), 2):
            g1 = code.mul(a[j], code.inv(a[i]))
            if monomial_order(g1, l, m) != grid.cell_cols:
                continue
            for k, ll in permutations(range(3), 2):
                g2 = code.mul(b[k], code.inv(b[ll]))
                basis = Basis(g1, g2)
                coords = _basis_coords(code, basis, grid)
                if coords is None:
                    continue
                ai, bk = coords[a[i]], coords[b[k]]
                neg = lambda v: (-v[0], -v[1])  # noqa: E731
                offsets = {
                    "L": neg(ai),
                    "R": neg(bk),
                    "X": (0, 0),
                    "Z": (-ai[0] - bk[0], -ai[1] - bk[1]),
                }
                layout = layout_from_offsets(code, grid, basis, offsets, metric="fixed")
                local = (("XL", (i + 1, j + 1)), ("XR", (k + 1, ll + 1)), ("ZL", (k + 1, ll + 1)), ("ZR", (i + 1, j + 1)))
                return FixedCouplerLayout(layout, local)
    raise LayoutError(f"{code.name}: no toric nearest-neighbor embedding for the fixed-coupler layout")
