"""Exact dense linear algebra on C^(2^n) over the Gaussian rationals.

Basis index ``b`` encodes ``|b_1 b_2 ... b_n>`` with qubit 1 the most
significant bit, so ``X1 = sigma_x (x) 1 (x) 1``.  Vectors are kept as
Gaussian-integer coordinate lists with a separate squared scale; nothing
here ever takes a square root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .exactkernel import GaussianRational, I_UNIT
from .pauli import PauliOp, commutes, subgroup_generate

if TYPE_CHECKING:
    from .scenario import EmpiricalModel

MAX_MATRIX_QUBITS = 12
MAX_ALGEBRA_QUBITS = 6

ZERO = GaussianRational(0)
ONE = GaussianRational(1)
_I_POWERS = (ONE, I_UNIT, GaussianRational(-1), GaussianRational(0, -1))


class DimensionError(ValueError):
    pass


class InvalidContextError(ValueError):
    pass


class NotStabilisedError(ValueError):
    pass


# --------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class ExactMatrix:
    dim: int
    rows: tuple[tuple[GaussianRational, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "ExactMatrix":
        rows = tuple(tuple(GaussianRational.coerce(v) for v in r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise DimensionError("matrix must be square")
        return cls(len(rows), rows)

    @classmethod
    def identity(cls, dim: int) -> "ExactMatrix":
        return cls(dim, tuple(tuple(ONE if i == j else ZERO for j in range(dim)) for i in range(dim)))

    def __getitem__(self, ij: tuple[int, int]) -> GaussianRational:
        return self.rows[ij[0]][ij[1]]

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.dim != other.dim:
            raise DimensionError(f"{self.dim} vs {other.dim}")
        out = []
        for row in self.rows:
            acc = [ZERO] * other.dim
            for k, a in enumerate(row):
                if not a:
                    continue
                for j, b in enumerate(other.rows[k]):
                    if b:
                        acc[j] = acc[j] + a * b
            out.append(tuple(acc))
        return ExactMatrix(self.dim, tuple(out))

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(
            self.dim,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + other.scale(-1)

    def scale(self, c) -> "ExactMatrix":
        c = GaussianRational.coerce(c)
        return ExactMatrix(self.dim, tuple(tuple(c * a for a in r) for r in self.rows))

    def adjoint(self) -> "ExactMatrix":
        return ExactMatrix(
            self.dim,
            tuple(tuple(self.rows[j][i].conjugate() for j in range(self.dim)) for i in range(self.dim)),
        )

    def apply(self, coords: Sequence[GaussianRational]) -> tuple[GaussianRational, ...]:
        out = []
        for row in self.rows:
            acc = ZERO
            for a, v in zip(row, coords):
                if a and v:
                    acc = acc + a * v
            out.append(acc)
        return tuple(out)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def flatten(self) -> list[GaussianRational]:
        return [a for r in self.rows for a in r]


def kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            rows.append(tuple(x * y for x in ra for y in rb))
    return ExactMatrix(a.dim * b.dim, tuple(rows))


SIGMA = {
    "I": ExactMatrix.from_rows([[1, 0], [0, 1]]),
    "X": ExactMatrix.from_rows([[0, 1], [1, 0]]),
    "Z": ExactMatrix.from_rows([[1, 0], [0, -1]]),
    "Y": ExactMatrix.from_rows([[0, GaussianRational(0, -1)], [I_UNIT, 0]]),
}
_XZ = SIGMA["X"] @ SIGMA["Z"]


def to_matrix(p: PauliOp) -> ExactMatrix:
    """Kronecker product of the per-qubit ``X**x Z**z`` factors times ``i**phase``."""
    if p.n > MAX_MATRIX_QUBITS:
        raise DimensionError(f"{p.n} qubits exceeds the dense-matrix guard")
    factors = {(0, 0): SIGMA["I"], (1, 0): SIGMA["X"], (0, 1): SIGMA["Z"], (1, 1): _XZ}
    out = ExactMatrix.identity(1)
    for j in range(p.n):
        out = kron(out, factors[((p.x >> j) & 1, (p.z >> j) & 1)])
    return out.scale(_I_POWERS[p.phase])


def apply_pauli(p: PauliOp, coords: Sequence[GaussianRational]) -> list[GaussianRational]:
    """``p|v>`` without building the matrix."""
    n = p.n
    if len(coords) != 1 << n:
        raise DimensionError(f"vector of length {len(coords)} for {n} qubits")
    # bit j of p.x is qubit j+1, i.e. bit n-1-j of the basis index
    xm = zm = 0
    for j in range(n):
        if p.x >> j & 1:
            xm |= 1 << (n - 1 - j)
        if p.z >> j & 1:
            zm |= 1 << (n - 1 - j)
    ph = _I_POWERS[p.phase]
    out = [ZERO] * len(coords)
    for b, v in enumerate(coords):
        if not v:
            continue
        # X**x Z**z |b> = (-1)^(z.b) |b xor x>
        c = v * ph
        if bin(zm & b).count("1") % 2:
            c = -c
        out[b ^ xm] = c
    return out


# --------------------------------------------------------------------------
# vectors


def _primitive(coords: Sequence[GaussianRational]) -> tuple[GaussianRational, ...]:
    """Rescale to Gaussian integers with no common rational factor."""
    dens = [c.re.denominator for c in coords] + [c.im.denominator for c in coords]
    lcm = 1
    for d in dens:
        lcm = lcm * d // math.gcd(lcm, d)
    ints = [GaussianRational(c.re * lcm, c.im * lcm) for c in coords]
    g = 0
    for c in ints:
        g = math.gcd(g, int(c.re))
        g = math.gcd(g, int(c.im))
    if g == 0:
        raise ValueError("zero vector")
    out = [GaussianRational(c.re / g, c.im / g) for c in ints]
    # first nonzero coordinate gets a positive real part, or positive imaginary
    lead = next(c for c in out if c)
    if lead.re < 0 or (lead.re == 0 and lead.im < 0):
        out = [-c for c in out]
    return tuple(out)


def inner(u: Sequence[GaussianRational], v: Sequence[GaussianRational]) -> GaussianRational:
    """``<u|v>``, conjugate-linear in ``u``."""
    acc = ZERO
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a.conjugate() * b
    return acc


@dataclass(frozen=True)
class ScaledVector:
    """The vector ``coords / sqrt(scale2)``."""

    coords: tuple[GaussianRational, ...]
    scale2: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.scale2 <= 0:
            raise ValueError("scale2 must be positive")

    @classmethod
    def ray(cls, coords: Iterable) -> "ScaledVector":
        """Primitive representative of a ray, scaled to unit length."""
        prim = _primitive([GaussianRational.coerce(c) for c in coords])
        return cls(prim, sum((c.norm2() for c in prim), Fraction(0)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def nqubits(self) -> int:
        n = self.dim.bit_length() - 1
        if 1 << n != self.dim:
            raise DimensionError(f"dimension {self.dim} is not a power of two")
        return n

    def coord_norm2(self) -> Fraction:
        return sum((c.norm2() for c in self.coords), Fraction(0))

    def is_unit(self) -> bool:
        return self.coord_norm2() == self.scale2

    def inner(self, other: "ScaledVector") -> GaussianRational:
        """Inner product of the raw coordinates; zero iff the rays are orthogonal."""
        return inner(self.coords, other.coords)

    def same_ray(self, other: "ScaledVector") -> bool:
        if self.dim != other.dim:
            return False
        # u ~ v iff u_i v_j == u_j v_i for all i, j
        k = next((i for i, c in enumerate(self.coords) if c), None)
        if k is None or not other.coords[k]:
            return False
        a, b = self.coords[k], other.coords[k]
        return all(x * b == y * a for x, y in zip(self.coords, other.coords))

    def rescaled(self, factor) -> "ScaledVector":
        """Multiply coordinates by a nonzero Gaussian rational; same physical state."""
        f = GaussianRational.coerce(factor)
        return ScaledVector(tuple(c * f for c in self.coords), self.scale2 * f.norm2())


def basis_state(bits: str) -> ScaledVector:
    n = len(bits)
    coords = [ZERO] * (1 << n)
    coords[int(bits, 2)] = ONE
    return ScaledVector(tuple(coords), Fraction(1))


def ghz_state(n: int = 3) -> ScaledVector:
    """``(|0...0> + |1...1>)/sqrt(2)``."""
    coords = [ZERO] * (1 << n)
    coords[0] = ONE
    coords[-1] = ONE
    return ScaledVector(tuple(coords), Fraction(2))


# --------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class ContextSpec:
    observables: tuple[PauliOp, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        obs = tuple(self.observables)
        object.__setattr__(self, "observables", obs)
        if not obs:
            raise InvalidContextError("a context needs at least one observable")
        if len({o.n for o in obs}) != 1:
            raise InvalidContextError("observables act on different qubit counts")
        for o in obs:
            if not o.is_involution():
                raise InvalidContextError(f"{o} does not square to +1")
        for a, b in combinations(obs, 2):
            if not commutes(a, b):
                raise InvalidContextError(f"{a.label()} and {b.label()} do not commute")
        names = tuple(self.names) or tuple(o.label() for o in obs)
        if len(names) != len(obs) or len(set(names)) != len(names):
            raise InvalidContextError("context names must be unique, one per observable")
        object.__setattr__(self, "names", names)

    @classmethod
    def parse(cls, texts: Iterable[str], n: int | None = None) -> "ContextSpec":
        from .pauli import parse_pauli

        return cls(tuple(parse_pauli(t, n) for t in texts))

    @property
    def n(self) -> int:
        return self.observables[0].n

    def __len__(self) -> int:
        return len(self.observables)


@dataclass(frozen=True)
class EigenRay:
    vector: ScaledVector
    eigenvalues: dict[str, int]
    degenerate: bool = False


def _projector_apply(ctx: ContextSpec, signs: Sequence[int], coords):
    v = list(coords)
    for obs, s in zip(ctx.observables, signs):
        av = apply_pauli(obs, v)
        if s > 0:
            v = [(a + b) * Fraction(1, 2) for a, b in zip(v, av)]
        else:
            v = [(a - b) * Fraction(1, 2) for a, b in zip(v, av)]
    return v


def spectral_projector(ctx: ContextSpec, signs: Sequence[int]) -> ExactMatrix:
    """``prod_k (1 + s_k A_k)/2``."""
    dim = 1 << ctx.n
    out = ExactMatrix.identity(dim)
    for obs, s in zip(ctx.observables, signs):
        half = (ExactMatrix.identity(dim) + to_matrix(obs).scale(s)).scale(Fraction(1, 2))
        out = out @ half
    return out


def _orthogonal_basis(vectors: Iterable[Sequence[GaussianRational]]) -> list[tuple[GaussianRational, ...]]:
    """Exact Gram-Schmidt on a spanning list, dropping dependent vectors."""
    basis: list[tuple[GaussianRational, ...]] = []
    norms: list[Fraction] = []
    for v in vectors:
        w = list(v)
        for b, nb in zip(basis, norms):
            c = inner(b, w) / nb
            if c:
                w = [x - c * y for x, y in zip(w, b)]
        if any(w):
            prim = _primitive(w)
            basis.append(prim)
            norms.append(sum((c.norm2() for c in prim), Fraction(0)))
    return basis


def joint_eigenbasis(ctx: ContextSpec) -> list[EigenRay]:
    """Joint eigenvectors of a commuting context, labelled by eigenvalue pattern.

    Each nonzero intersection of spectral projectors contributes an
    orthogonal basis of its range; ranges of dimension > 1 are flagged.
    """
    dim = 1 << ctx.n
    out = []
    for signs in product((1, -1), repeat=len(ctx)):
        cols = []
        for k in range(dim):
            e = [ZERO] * dim
            e[k] = ONE
            cols.append(_projector_apply(ctx, signs, e))
        basis = _orthogonal_basis(cols)
        labels = dict(zip(ctx.names, signs))
        for b in basis:
            out.append(EigenRay(ScaledVector.ray(b), dict(labels), degenerate=len(basis) > 1))
    return out


def eigenvalue(state: ScaledVector, p: PauliOp) -> int | None:
    """+1/-1 if ``state`` is an eigenvector of the Hermitian ``p``, else None."""
    pv = apply_pauli(p, state.coords)
    if all(a == b for a, b in zip(pv, state.coords)):
        return 1
    if all(a == -b for a, b in zip(pv, state.coords)):
        return -1
    return None


def born_probability(state: ScaledVector, ctx: ContextSpec, outcome: Mapping[str, int] | Sequence[int]) -> Fraction:
    """Probability of the joint outcome pattern, as an exact rational."""
    if state.dim != 1 << ctx.n:
        raise DimensionError(f"state of dimension {state.dim} for {ctx.n} qubits")
    if isinstance(outcome, Mapping):
        missing = set(ctx.names) - set(outcome)
        if missing:
            raise ValueError(f"outcome misses {sorted(missing)}")
        signs = [outcome[name] for name in ctx.names]
    else:
        signs = list(outcome)
        if len(signs) != len(ctx):
            raise ValueError("outcome length does not match context")
    if any(s not in (1, -1) for s in signs):
        raise ValueError("outcomes are +1 or -1")
    pv = _projector_apply(ctx, signs, state.coords)
    num = inner(state.coords, pv)
    p = num.re / state.coord_norm2()
    assert num.im == 0 and 0 <= p <= 1
    return p


def context_distribution(state: ScaledVector, ctx: ContextSpec) -> dict[tuple[int, ...], Fraction]:
    return {signs: born_probability(state, ctx, signs) for signs in product((1, -1), repeat=len(ctx))}


def empirical_model_from_state(
    state: ScaledVector, cover: Sequence[ContextSpec], observables: Sequence[str] | None = None
) -> "EmpiricalModel":
    """Exact Born-rule tables, one per context, over a shared observable list.

    ``observables`` fixes the order of the cover's observable list; by
    default names appear in order of first use.
    """
    from .scenario import EmpiricalModel, MeasurementCover

    if not cover:
        raise ValueError("empty cover")
    if len({c.n for c in cover}) != 1:
        raise DimensionError("contexts act on different qubit counts")
    names: list[str] = []
    seen: dict[str, PauliOp] = {}
    for ctx in cover:
        for name, obs in zip(ctx.names, ctx.observables):
            if name in seen:
                if seen[name] != obs:
                    raise InvalidContextError(f"name {name} used for two operators")
                continue
            seen[name] = obs
            names.append(name)
    if observables is not None:
        if sorted(observables) != sorted(names):
            raise InvalidContextError("observable order must list exactly the cover's names")
        names = list(observables)
    mcover = MeasurementCover(tuple(names), tuple(tuple(c.names) for c in cover))
    tables = tuple(context_distribution(state, ctx) for ctx in cover)
    return EmpiricalModel(mcover, tables)


def stabilised_state(gens: Sequence[PauliOp]) -> ScaledVector | None:
    """A common +1 eigenvector of ``gens``, or None if there is none."""
    n = gens[0].n
    dim = 1 << n
    for k in range(dim):
        v = [ZERO] * dim
        v[k] = ONE
        for g in gens:
            gv = apply_pauli(g, v)
            v = [(a + b) * Fraction(1, 2) for a, b in zip(v, gv)]
        if any(v):
            return ScaledVector.ray(v)
    return None


def generated_algebra_dimension(gens: Sequence[PauliOp]) -> int:
    """Complex dimension of the algebra generated by ``gens``.

    Distinct Pauli letter patterns are linearly independent, and phases
    do not change the span, so the dimension is the number of distinct
    ``(x, z)`` pairs in the generated group.
    """
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    if n > MAX_ALGEBRA_QUBITS:
        raise DimensionError(f"{n} qubits exceeds the algebra guard of {MAX_ALGEBRA_QUBITS}")
    group = subgroup_generate(list(gens))
    return len({(g.x, g.z) for g in group})
