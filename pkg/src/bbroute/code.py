"""Bivariate bicycle codes: monomials, parity checks and the extraction schedule."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .gf2 import BitMatrix, css_distance, css_logicals, gf2_rank

CHECK_TYPES = ("X", "Z")
DATA_TYPES = ("L", "R")
QUBIT_TYPES = ("L", "R", "X", "Z")


class Monomial(NamedTuple):
    """``x**p * y**q`` on the ``l x m`` torus group."""

    p: int
    q: int

    def __str__(self) -> str:
        if self.p == 0 and self.q == 0:
            return "1"
        parts = []
        if self.p:
            parts.append("x" if self.p == 1 else f"x{self.p}")
        if self.q:
            parts.append("y" if self.q == 1 else f"y{self.q}")
        return "".join(parts)


IDENTITY = Monomial(0, 0)


def _check_mono(a: Monomial, l: int, m: int) -> None:
    if not (0 <= a.p < l and 0 <= a.q < m):
        raise ValueError(f"monomial {tuple(a)} is not on the {l}x{m} torus")


def monomial_mul(a: Monomial, b: Monomial, l: int, m: int) -> Monomial:
    _check_mono(a, l, m)
    _check_mono(b, l, m)
    return Monomial((a.p + b.p) % l, (a.q + b.q) % m)


def transpose_monomial(a: Monomial, l: int, m: int) -> Monomial:
    """Group inverse; the transpose of a permutation block is its inverse."""
    return Monomial(-a.p % l, -a.q % m)


def monomial_pow(a: Monomial, k: int, l: int, m: int) -> Monomial:
    return Monomial(a.p * k % l, a.q * k % m)


def monomial_order(a: Monomial, l: int, m: int) -> int:
    k, cur = 1, a
    while cur != IDENTITY:
        cur = Monomial((cur.p + a.p) % l, (cur.q + a.q) % m)
        k += 1
    return k


_TERM = re.compile(r"^(?:x(\d*))?(?:y(\d*))?$")


def parse_polynomial(text: str, l: int, m: int) -> tuple[Monomial, ...]:
    """Parse ``"x3 + y + y2"`` style sums; ``"1"`` is the identity.

    ``x^3`` and ``x**3`` are accepted as well.
    """
    terms = []
    for raw in text.split("+"):
        t = raw.strip().replace("**", "").replace("^", "").replace("*", "").replace(" ", "")
        if t == "1":
            terms.append(IDENTITY)
            continue
        match = _TERM.match(t)
        if not t or match is None:
            raise ValueError(f"cannot parse term {raw!r} in {text!r}")
        px, qy = match.groups()
        p = 0 if px is None else int(px or 1)
        q = 0 if qy is None else int(qy or 1)
        terms.append(Monomial(p % l, q % m))
    return tuple(terms)


@dataclass(frozen=True)
class BBCodeSpec:
    l: int
    m: int
    a: tuple[Monomial, Monomial, Monomial]
    b: tuple[Monomial, Monomial, Monomial]
    name: str = ""

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("torus dimensions must be positive")
        for label, poly in (("A", self.a), ("B", self.b)):
            if len(poly) != 3:
                raise ValueError(f"{label} must have exactly three terms")
            for mono in poly:
                _check_mono(mono, self.l, self.m)
            if len(set(poly)) != 3:
                raise ValueError(f"{label} has repeated monomials: {poly}")

    @classmethod
    def from_strings(cls, l: int, m: int, a_poly: str, b_poly: str, name: str = "") -> BBCodeSpec:
        return cls(l, m, parse_polynomial(a_poly, l, m), parse_polynomial(b_poly, l, m), name)

    @classmethod
    def from_config(cls, cfg: dict) -> BBCodeSpec:
        missing = {"l", "m", "a_poly", "b_poly"} - set(cfg)
        if missing:
            raise ValueError(f"code config missing keys: {sorted(missing)}")
        return cls.from_strings(int(cfg["l"]), int(cfg["m"]), cfg["a_poly"], cfg["b_poly"], cfg.get("name", ""))


# (l, m, A, B, n, k, d)
TABLE_CODES = {
    "18-4-4": (3, 3, "x + 1 + y2", "y + 1 + x2", 18, 4, 4),
    "72-12-6": (6, 6, "x3 + y + y2", "y3 + x + x2", 72, 12, 6),
    "90-8-10": (15, 3, "x9 + y + y2", "1 + x2 + x7", 90, 8, 10),
    "108-8-10": (9, 6, "x3 + y + y2", "y3 + x + x2", 108, 8, 10),
    "144-12-12": (12, 6, "x3 + y + y2", "y3 + x + x2", 144, 12, 12),
    "288-12-18": (12, 12, "x3 + y2 + y7", "y3 + x + x2", 288, 12, 18),
}


def registry_spec(name: str) -> BBCodeSpec:
    try:
        l, m, a, b, *_ = TABLE_CODES[name]
    except KeyError:
        raise KeyError(f"unknown code {name!r}; known: {', '.join(TABLE_CODES)}") from None
    return BBCodeSpec.from_strings(l, m, a, b, name)


class Qubit(NamedTuple):
    kind: str  # one of L, R, X, Z
    label: Monomial


class Category(NamedTuple):
    """Interaction category ``(check type, data type, term index 1..3)``."""

    check: str
    data: str
    i: int

    def __str__(self) -> str:
        return f"({self.check},{self.data},{self.i})"


@dataclass(frozen=True)
class BBCode:
    spec: BBCodeSpec
    hx: BitMatrix = field(repr=False)
    hz: BitMatrix = field(repr=False)

    @property
    def l(self) -> int:
        return self.spec.l

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def half(self) -> int:
        return self.spec.l * self.spec.m

    @property
    def n(self) -> int:
        return 2 * self.half

    @property
    def name(self) -> str:
        return self.spec.name or f"bb-{self.l}x{self.m}"

    def monomials(self) -> list[Monomial]:
        return [Monomial(p, q) for p in range(self.l) for q in range(self.m)]

    def mono_index(self, a: Monomial) -> int:
        return a.p * self.m + a.q

    def mono_at(self, index: int) -> Monomial:
        return Monomial(*divmod(index, self.m))

    def data_index(self, qubit: Qubit) -> int:
        """Column of ``qubit`` in Hx/Hz: L qubits first, then R."""
        offset = {"L": 0, "R": self.half}[qubit.kind]
        return offset + self.mono_index(qubit.label)

    def qubit_index(self, qubit: Qubit) -> int:
        """Global index over all 2n qubits, ordered L, R, X, Z."""
        return QUBIT_TYPES.index(qubit.kind) * self.half + self.mono_index(qubit.label)

    def qubit_at(self, index: int) -> Qubit:
        kind, rest = divmod(index, self.half)
        return Qubit(QUBIT_TYPES[kind], self.mono_at(rest))

    def mul(self, a: Monomial, b: Monomial) -> Monomial:
        return monomial_mul(a, b, self.l, self.m)

    def inv(self, a: Monomial) -> Monomial:
        return transpose_monomial(a, self.l, self.m)

    def term(self, cat: Category) -> Monomial:
        """Monomial ``g`` such that the data partner of check ``alpha`` is ``g * alpha``."""
        a, b = self.spec.a[cat.i - 1], self.spec.b[cat.i - 1]
        if cat.check == "X":
            return a if cat.data == "L" else b
        return self.inv(b) if cat.data == "L" else self.inv(a)

    def partner(self, cat: Category, alpha: Monomial) -> Qubit:
        return Qubit(cat.data, self.mul(self.term(cat), alpha))

    @cached_property
    def k(self) -> int:
        return self.n - gf2_rank(self.hx) - gf2_rank(self.hz)

    @cached_property
    def logicals(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        xl, zl = css_logicals(self.hx, self.hz)
        return tuple(xl), tuple(zl)


def all_categories() -> list[Category]:
    return [Category(c, d, i) for c in CHECK_TYPES for d in DATA_TYPES for i in (1, 2, 3)]


def build_code(spec: BBCodeSpec) -> BBCode:
    l, m = spec.l, spec.m
    half = l * m

    def block(terms) -> list[int]:
        rows = []
        for p in range(l):
            for q in range(m):
                row = 0
                for t in terms:
                    row |= 1 << (((p + t.p) % l) * m + (q + t.q) % m)
                rows.append(row)
        return rows

    inv = lambda poly: [transpose_monomial(t, l, m) for t in poly]  # noqa: E731
    a, b = block(spec.a), block(spec.b)
    bt, at = block(inv(spec.b)), block(inv(spec.a))
    hx = BitMatrix(tuple(x | y << half for x, y in zip(a, b)), 2 * half)
    hz = BitMatrix(tuple(x | y << half for x, y in zip(bt, at)), 2 * half)
    return BBCode(spec, hx, hz)


def check_neighbors(code: BBCode, check_type: str, alpha: Monomial) -> list[tuple[Qubit, Category]]:
    if check_type not in CHECK_TYPES:
        raise ValueError(f"check type must be X or Z, got {check_type!r}")
    _check_mono(alpha, code.l, code.m)
    out = []
    for data in DATA_TYPES:
        for i in (1, 2, 3):
            cat = Category(check_type, data, i)
            out.append((code.partner(cat, alpha), cat))
    return out


def code_k(code: BBCode) -> int:
    return code.k


def logical_operators(code: BBCode) -> tuple[list[int], list[int]]:
    """Paired (X, Z) logical bases as packed data-qubit supports."""
    xl, zl = code.logicals
    return list(xl), list(zl)


def code_distance_bruteforce(code: BBCode, weight_cap: int | None = None) -> int | None:
    """Exact distance; ``None`` means the code has no logical operator."""
    return css_distance(code.hx, code.hz, weight_cap=weight_cap)


# --- syndrome extraction schedule -------------------------------------------

class Gate(NamedTuple):
    """Directed CNOT of one check-data interaction."""

    check: Qubit
    data: Qubit
    category: Category

    @property
    def control(self) -> Qubit:
        return self.check if self.category.check == "X" else self.data

    @property
    def target(self) -> Qubit:
        return self.data if self.category.check == "X" else self.check


@dataclass(frozen=True)
class Pass:
    index: int  # 1..7
    categories: tuple[Category, ...]
    gates: tuple[Gate, ...]
    init: tuple[str, ...] = ()  # check types initialized at the start of the pass
    measure: tuple[str, ...] = ()  # check types measured during/after the pass

    def __len__(self) -> int:
        return len(self.gates)


# Each row: (X-check category, Z-check category); None marks init/measure slots.
PASS_CATEGORIES = (
    (None, Category("Z", "R", 1)),
    (Category("X", "L", 2), Category("Z", "R", 3)),
    (Category("X", "R", 2), Category("Z", "L", 1)),
    (Category("X", "R", 1), Category("Z", "L", 2)),
    (Category("X", "R", 3), Category("Z", "L", 3)),
    (Category("X", "L", 1), Category("Z", "R", 2)),
    (Category("X", "L", 3), None),
)


@dataclass(frozen=True)
class SyndromeSchedule:
    """One extraction cycle.

    Z checks are reset to |0> before pass 1; X checks are prepared in |+> during
    pass 1; Z checks are measured in pass 7 and X checks after it.
    """

    passes: tuple[Pass, ...]

    def __iter__(self):
        return iter(self.passes)

    def __len__(self) -> int:
        return len(self.passes)

    def sizes(self) -> list[int]:
        return [len(p) for p in self.passes]


def build_schedule(code: BBCode) -> SyndromeSchedule:
    passes = []
    for idx, cats in enumerate(PASS_CATEGORIES, start=1):
        active = tuple(c for c in cats if c is not None)
        gates = tuple(
            Gate(Qubit(cat.check, alpha), code.partner(cat, alpha), cat)
            for cat in active
            for alpha in code.monomials()
        )
        init = ("X",) if idx == 1 else ()
        measure = ("Z", "X") if idx == 7 else ()
        passes.append(Pass(idx, active, gates, init, measure))
    return SyndromeSchedule(tuple(passes))


def schedule_is_disjoint(schedule: SyndromeSchedule) -> bool:
    for p in schedule:
        seen = set()
        for g in p.gates:
            if g.check in seen or g.data in seen:
                return False
            seen.add(g.check)
            seen.add(g.data)
    return True
