"""Exact number types and the two exact solvers everything else leans on.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  Gaussian rationals are pairs of them.  The GF(2) solver keeps
row provenance so an inconsistent system comes back with a certificate that
anyone can re-check by XOR; the LP solver is a phase-1 simplex with Bland's
rule, which only ever answers "is there a nonnegative solution".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[int, Fraction, str]

#: enumerate the affine solution set explicitly up to this many variables
ENUMERATION_LIMIT = 24


class MalformedSystemError(ValueError):
    """Rows of a linear system disagree about the number of variables."""


def rational(value: RationalLike) -> Fraction:
    """Parse ``"p/q"``, ``"0"``, ints or Fractions into an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in ".eE"):
            raise ValueError(f"not a rational string: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot make a rational from {type(value).__name__}")


class GaussianRational:
    """An element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0) -> None:
        self.re = rational(re)
        self.im = rational(im)

    @classmethod
    def coerce(cls, value: "GaussianRational | RationalLike") -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return cls(value)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        if not o.im and not self.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.norm2()
        if not n:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __repr__(self) -> str:
        if not self.im:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


I_UNIT = GaussianRational(0, 1)


# --------------------------------------------------------------------------
# GF(2)


def _bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for j, b in enumerate(bits):
        if b not in (0, 1):
            raise MalformedSystemError(f"coefficient {b!r} is not a bit")
        if b:
            value |= 1 << j
    return value


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> j) & 1 for j in range(width))


@dataclass(frozen=True)
class Gf2System:
    """Rows ``(mask, rhs)`` over ``nvars`` variables; bit j of ``mask`` is x_j."""

    nvars: int
    rows: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.nvars < 0:
            raise MalformedSystemError("negative variable count")
        limit = 1 << self.nvars
        for mask, rhs in self.rows:
            if mask < 0 or mask >= limit:
                raise MalformedSystemError(f"row mask {mask:#x} exceeds {self.nvars} variables")
            if rhs not in (0, 1):
                raise MalformedSystemError(f"rhs {rhs!r} is not a bit")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[Sequence[int], int]], nvars: int | None = None) -> "Gf2System":
        rows = [(list(coeffs), rhs) for coeffs, rhs in rows]
        widths = {len(c) for c, _ in rows}
        if nvars is not None:
            widths.add(nvars)
        if len(widths) > 1:
            raise MalformedSystemError(f"ragged rows: widths {sorted(widths)}")
        width = widths.pop() if widths else 0
        return cls(width, tuple((_bits_to_int(c), int(r)) for c, r in rows))

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Certificate:
    """A set of rows whose coefficient XOR is zero and whose rhs XOR is one."""

    rows: frozenset[int]

    def verify(self, system: Gf2System) -> bool:
        mask = rhs = 0
        for r in self.rows:
            m, b = system.rows[r]
            mask ^= m
            rhs ^= b
        return bool(self.rows) and mask == 0 and rhs == 1


@dataclass(frozen=True)
class Gf2Solution:
    """Outcome of :func:`gf2_solve`.

    Consistent systems carry a particular solution and a nullspace basis;
    inconsistent ones carry a :class:`Certificate`.
    """

    nvars: int
    certificate: Certificate | None = None
    particular: int = 0
    basis: tuple[int, ...] = ()
    rank: int = 0

    @property
    def consistent(self) -> bool:
        return self.certificate is None

    @property
    def count(self) -> int:
        return 0 if self.certificate else 1 << len(self.basis)

    @property
    def solutions(self) -> list[tuple[int, ...]]:
        """Every solution as a bit tuple, in a fixed order."""
        if self.certificate is not None:
            return []
        if self.nvars > ENUMERATION_LIMIT:
            raise ValueError(
                f"{self.nvars} variables: use particular + basis instead of enumerating"
            )
        out = []
        for coeffs in product((0, 1), repeat=len(self.basis)):
            v = self.particular
            for c, b in zip(coeffs, self.basis):
                if c:
                    v ^= b
            out.append(int_to_bits(v, self.nvars))
        return sorted(out)


def gf2_solve(system: Gf2System) -> Gf2Solution:
    """Gauss-Jordan elimination over GF(2) with row provenance."""
    n = system.nvars
    # each working row: [mask, rhs, provenance set as int over original rows]
    work = [[m, b, 1 << i] for i, (m, b) in enumerate(system.rows)]
    pivots: list[tuple[int, list[int]]] = []
    for col in range(n):
        bit = 1 << col
        pivot = next((r for r in work if r[0] & bit), None)
        if pivot is None:
            continue
        work.remove(pivot)
        for r in work:
            if r[0] & bit:
                r[0] ^= pivot[0]
                r[1] ^= pivot[1]
                r[2] ^= pivot[2]
        for _, p in pivots:
            if p[0] & bit:
                p[0] ^= pivot[0]
                p[1] ^= pivot[1]
                p[2] ^= pivot[2]
        pivots.append((col, pivot))

    # leftover rows are all-zero; rhs 1 means inconsistency
    bad = [r for r in work if r[1]]
    if bad:
        best = min(bad, key=lambda r: (bin(r[2]).count("1"), r[2]))
        rows = frozenset(i for i in range(len(system.rows)) if best[2] >> i & 1)
        return Gf2Solution(n, certificate=Certificate(rows), rank=len(pivots))

    pivot_cols = {c for c, _ in pivots}
    particular = 0
    for col, row in pivots:
        if row[1]:
            particular |= 1 << col
    basis = []
    for free in range(n):
        if free in pivot_cols:
            continue
        v = 1 << free
        for col, row in pivots:
            if row[0] >> free & 1:
                v |= 1 << col
        basis.append(v)
    return Gf2Solution(n, particular=particular, basis=tuple(basis), rank=len(pivots))


# --------------------------------------------------------------------------
# exact rank over Q or Q(i)


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a matrix with Fraction or GaussianRational entries."""
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    width = len(mat[0])
    if any(len(r) != width for r in mat):
        raise MalformedSystemError("ragged matrix")
    rank = 0
    for col in range(width):
        pivot = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        prow = mat[rank]
        inv = 1 / prow[col] if not isinstance(prow[col], GaussianRational) else GaussianRational(1) / prow[col]
        for i in range(rank + 1, len(mat)):
            f = mat[i][col]
            if f:
                f = f * inv
                mat[i] = [a - f * b if b else a for a, b in zip(mat[i], prow)]
        rank += 1
    return rank


# --------------------------------------------------------------------------
# rational LP feasibility


@dataclass(frozen=True)
class LpResult:
    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    pivots: int = 0

    def __bool__(self) -> bool:
        return self.feasible


@dataclass
class _Tableau:
    rows: list[list[Fraction]]
    basis: list[int]
    cost: list[Fraction]
    pivots: int = field(default=0)

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        inv = 1 / prow[c]
        prow[:] = [v * inv for v in prow]
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            f = row[c]
            if i != r and f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = self.cost[c]
        if f:
            for j in nz:
                self.cost[j] -= f * prow[j]
        self.basis[r] = c
        self.pivots += 1


def lp_feasible(equalities: Sequence[tuple[Sequence[RationalLike], RationalLike]], nvars: int) -> LpResult:
    """Decide whether ``A x = b, x >= 0`` has a solution, exactly.

    Phase-1 simplex on artificials with Bland's smallest-index rule, so it
    terminates on degenerate problems too.  The witness satisfies every
    equality exactly.
    """
    rows: list[list[Fraction]] = []
    for k, (coeffs, rhs) in enumerate(equalities):
        if len(coeffs) != nvars:
            raise MalformedSystemError(f"row {k} has width {len(coeffs)}, expected {nvars}")
        row = [rational(c) for c in coeffs]
        b = rational(rhs)
        if b < 0:
            row = [-c for c in row]
            b = -b
        rows.append(row + [b])

    m = len(rows)
    if m == 0:
        return LpResult(True, tuple(Fraction(0) for _ in range(nvars)))
    width = nvars + m
    table = []
    for i, row in enumerate(rows):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        table.append(row[:nvars] + art + [row[-1]])
    cost = [Fraction(0)] * (width + 1)
    for row in table:
        for j in range(nvars):
            cost[j] -= row[j]
        cost[-1] -= row[-1]
    tab = _Tableau(table, [nvars + i for i in range(m)], cost)

    while True:
        enter = next((j for j in range(width) if tab.cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i, row in enumerate(tab.rows):
            a = row[enter]
            if a > 0:
                key = (row[-1] / a, tab.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        # phase 1 is bounded below by zero, so a leaving row always exists
        assert best is not None
        tab.pivot(best[1], enter)

    if tab.cost[-1] != 0:
        return LpResult(False, None, tab.pivots)
    x = [Fraction(0)] * nvars
    for i, j in enumerate(tab.basis):
        if j < nvars:
            x[j] = tab.rows[i][-1]
    return LpResult(True, tuple(x), tab.pivots)


def check_witness(equalities, witness: Sequence[Fraction]) -> bool:
    """True when ``witness`` is nonnegative and satisfies every equality."""
    if any(v < 0 for v in witness):
        return False
    for coeffs, rhs in equalities:
        if sum(rational(c) * v for c, v in zip(coeffs, witness)) != rational(rhs):
            return False
    return True
