"""GF(2) linear algebra on packed bitset rows.

A row is a Python ``int`` whose bit ``j`` holds column ``j``. This keeps rank,
kernel and coset arithmetic fast for the few-hundred-column matrices of BB codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np


class EnumerationBudgetError(RuntimeError):
    """Raised when a brute-force search would exceed its enumeration budget."""


class DistanceNotFoundError(RuntimeError):
    """Raised when no logical operator exists up to the requested weight cap."""


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    ncols: int

    @classmethod
    def from_dense(cls, matrix) -> BitMatrix:
        arr = np.asarray(matrix, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected a 2D binary matrix")
        rows = []
        for row in arr:
            value = 0
            for j in np.flatnonzero(row):
                value |= 1 << int(j)
            rows.append(value)
        return cls(tuple(rows), int(arr.shape[1]))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, row in enumerate(self.rows):
            for j in bits(row):
                out[i, j] = 1
        return out

    def row_weights(self) -> list[int]:
        return [weight(r) for r in self.rows]

    def column_weights(self) -> list[int]:
        counts = [0] * self.ncols
        for r in self.rows:
            for j in bits(r):
                counts[j] += 1
        return counts

    def transpose(self) -> BitMatrix:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in bits(r):
                cols[j] |= 1 << i
        return BitMatrix(tuple(cols), len(self.rows))

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        """Matrix product ``self @ other`` over GF(2)."""
        if self.ncols != len(other.rows):
            raise ValueError("shape mismatch")
        out = []
        for r in self.rows:
            acc = 0
            for j in bits(r):
                acc ^= other.rows[j]
            out.append(acc)
        return BitMatrix(tuple(out), other.ncols)

    def apply(self, vec: int) -> int:
        """Syndrome ``M v`` packed as an int with bit ``i`` for row ``i``."""
        out = 0
        for i, r in enumerate(self.rows):
            if weight(r & vec) & 1:
                out |= 1 << i
        return out

    def is_zero(self) -> bool:
        return not any(self.rows)


def as_bitmatrix(matrix) -> BitMatrix:
    if isinstance(matrix, BitMatrix):
        return matrix
    return BitMatrix.from_dense(matrix)


def weight(v: int) -> int:
    return v.bit_count()


def bits(v: int) -> Iterable[int]:
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def vec_to_array(v: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    for j in bits(v):
        out[j] = 1
    return out


class RowSpace:
    """Incremental echelon basis keyed by lowest set bit."""

    def __init__(self, rows: Iterable[int] = ()):
        self._pivots: dict[int, int] = {}
        for r in rows:
            self.add(r)

    def reduce(self, v: int) -> int:
        while v:
            low = v & -v
            pivot_row = self._pivots.get(low)
            if pivot_row is None:
                return v
            v ^= pivot_row
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v``; return False if it was already in the span."""
        v = self.reduce(v)
        if not v:
            return False
        self._pivots[v & -v] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def __len__(self) -> int:
        return len(self._pivots)

    def basis(self) -> list[int]:
        return list(self._pivots.values())


def gf2_rank(matrix) -> int:
    return len(RowSpace(as_bitmatrix(matrix).rows))


def _rref(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (rows, pivot columns)."""
    work = [r for r in rows if r]
    pivots: list[int] = []
    out: list[int] = []
    for col in range(ncols):
        mask = 1 << col
        idx = next((i for i, r in enumerate(work) if r & mask), None)
        if idx is None:
            continue
        prow = work.pop(idx)
        work = [r ^ prow if r & mask else r for r in work]
        out = [r ^ prow if r & mask else r for r in out]
        out.append(prow)
        pivots.append(col)
        work = [r for r in work if r]
    return out, pivots


def gf2_kernel(matrix) -> list[int]:
    """Basis of ``{v : M v = 0}`` as packed column vectors."""
    m = as_bitmatrix(matrix)
    rows, pivots = _rref(m.rows, m.ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivot_set:
            continue
        v = 1 << free
        for prow, pcol in zip(rows, pivots):
            if prow >> free & 1:
                v |= 1 << pcol
        basis.append(v)
    return basis


def quotient_basis(kernel: Sequence[int], stabilizers: Sequence[int]) -> list[int]:
    """Vectors of ``kernel`` that are independent modulo ``span(stabilizers)``."""
    space = RowSpace(stabilizers)
    out = []
    for v in kernel:
        if space.add(v):
            out.append(v)
    return out


def symplectic_pairs(xs: Sequence[int], zs: Sequence[int]) -> tuple[list[int], list[int]]:
    """Re-pair two bases so that ``|x_i & z_j|`` is odd iff ``i == j``."""
    xs, zs = list(xs), list(zs)
    out_x: list[int] = []
    out_z: list[int] = []
    while xs:
        x = xs.pop(0)
        j = next((j for j, z in enumerate(zs) if weight(x & z) & 1), None)
        if j is None:
            raise ValueError("bases are not symplectically paired")
        z = zs.pop(j)
        xs = [u ^ x if weight(u & z) & 1 else u for u in xs]
        zs = [w ^ z if weight(w & x) & 1 else w for w in zs]
        out_x.append(x)
        out_z.append(z)
    return out_x, out_z


def css_logicals(hx, hz) -> tuple[list[int], list[int]]:
    """Paired X and Z logical bases of the CSS code ``(hx, hz)``.

    X logicals live in ``ker(hz)`` modulo the row space of ``hx``; Z logicals
    symmetrically.
    """
    hx, hz = as_bitmatrix(hx), as_bitmatrix(hz)
    xl = quotient_basis(gf2_kernel(hz), hx.rows)
    zl = quotient_basis(gf2_kernel(hx), hz.rows)
    if len(xl) != len(zl):
        raise ValueError("inconsistent CSS pair")
    return symplectic_pairs(xl, zl)


def _coset_min_weight(check, stabilizers: Sequence[int], budget: int) -> int | None:
    kernel = gf2_kernel(check)
    if 1 << len(kernel) > budget:
        raise EnumerationBudgetError(
            f"kernel dimension {len(kernel)} exceeds budget 2^{budget.bit_length() - 1}"
        )
    stab = RowSpace(stabilizers)
    best = None
    v = 0
    # Gray-code walk over the whole kernel.
    for i in range(1, 1 << len(kernel)):
        v ^= kernel[(i & -i).bit_length() - 1]
        w = weight(v)
        if best is not None and w >= best:
            continue
        if v not in stab:
            best = w
    return best


def _capped_min_weight(check: BitMatrix, stabilizers: Sequence[int], cap: int) -> int | None:
    """Smallest weight ``<= cap`` of a vector in ker(check) outside span(stabilizers).

    Meet in the middle: every word of weight ``w`` splits into halves of weight
    ``ceil(w/2)`` and ``floor(w/2)`` with equal syndromes.
    """
    n = check.ncols
    cols = check.transpose().rows
    stab = RowSpace(stabilizers)
    half = (cap + 1) // 2
    by_syndrome: dict[int, list[int]] = {}
    by_weight: list[list[tuple[int, int]]] = [[(0, 0)]]
    for w in range(1, half + 1):
        layer = []
        for combo in combinations(range(n), w):
            v = 0
            s = 0
            for j in combo:
                v |= 1 << j
                s ^= cols[j]
            layer.append((v, s))
        by_weight.append(layer)
    for w in range(1, cap + 1):
        lo, hi = w // 2, w - w // 2
        by_syndrome.clear()
        for v, s in by_weight[lo]:
            by_syndrome.setdefault(s, []).append(v)
        for v, s in by_weight[hi]:
            for u in by_syndrome.get(s, ()):
                word = u ^ v
                if weight(word) == w and word not in stab:
                    return w
    return None


def css_distance(hx, hz, weight_cap: int | None = None, budget: int = 1 << 26) -> int | None:
    """Minimum weight of a nontrivial logical operator of the CSS code ``(hx, hz)``.

    Returns ``None`` when the code has no logical qubits. Without ``weight_cap``
    the whole kernel of each check matrix is enumerated (guarded by ``budget``).
    With ``weight_cap`` a meet-in-the-middle search covers all words up to that
    weight and raises :class:`DistanceNotFoundError` if none is a logical.
    """
    hx, hz = as_bitmatrix(hx), as_bitmatrix(hz)
    k = hx.ncols - gf2_rank(hx) - gf2_rank(hz)
    if k == 0:
        return None
    if weight_cap is None:
        dx = _coset_min_weight(hz, hx.rows, budget)
        dz = _coset_min_weight(hx, hz.rows, budget)
    else:
        dx = _capped_min_weight(hz, hx.rows, weight_cap)
        dz = _capped_min_weight(hx, hz.rows, weight_cap)
    found = [d for d in (dx, dz) if d is not None]
    if not found:
        raise DistanceNotFoundError(f"no logical operator of weight <= {weight_cap}")
    return min(found)
