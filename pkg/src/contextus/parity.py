"""Valuation constraints as GF(2) systems.

A valuation assigns every observable a value in {+1, -1}; we store it as a
bit with ``nu(A) = (-1)**bit``, so a multiplicative constraint
``nu(A) nu(B) nu(C) = -1`` becomes the row ``a ^ b ^ c = 1``.  Right-hand
sides always come from Pauli phase arithmetic or from eigenvalues of a
state, never typed in by hand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .exactkernel import Certificate, Gf2Solution, Gf2System, gf2_solve, int_to_bits
from .hilbert import ContextSpec, NotStabilisedError, ScaledVector, eigenvalue
from .pauli import PauliOp, multiply, product

MINUS = "−"


class ClosureError(ValueError):
    """The operator list handed to :func:`avn_system` is not a group."""


@dataclass(frozen=True)
class ValuationRow:
    terms: tuple[str, ...]
    sign: int
    provenance: str
    scope: frozenset[str]

    def render(self) -> str:
        lhs = "·".join(f"ν({t})" for t in self.terms) or "1"
        rhs = "+1" if self.sign > 0 else f"{MINUS}1"
        return f"{lhs} = {rhs}"


@dataclass(frozen=True)
class ValuationSystem:
    variables: tuple[str, ...]
    rows: tuple[ValuationRow, ...]

    def __post_init__(self) -> None:
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variable names must be unique")
        known = set(self.variables)
        for row in self.rows:
            if not set(row.terms) <= known:
                raise ValueError(f"row {row.provenance} mentions undeclared variables")
            if not set(row.terms) <= row.scope:
                raise ValueError(f"row {row.provenance} leaves its context")

    @property
    def system(self) -> Gf2System:
        index = {v: j for j, v in enumerate(self.variables)}
        rows = []
        for row in self.rows:
            mask = 0
            for t in row.terms:
                mask ^= 1 << index[t]
            rows.append((mask, 0 if row.sign > 0 else 1))
        return Gf2System(len(self.variables), tuple(rows))

    @property
    def rhs_bits(self) -> tuple[int, ...]:
        return tuple(0 if r.sign > 0 else 1 for r in self.rows)

    @property
    def provenance(self) -> tuple[str, ...]:
        return tuple(r.provenance for r in self.rows)

    def subsystem(self, keep: Sequence[int]) -> "ValuationSystem":
        return ValuationSystem(self.variables, tuple(self.rows[i] for i in keep))

    def with_signs(self, signs: Sequence[int]) -> "ValuationSystem":
        rows = tuple(
            ValuationRow(r.terms, s, r.provenance, r.scope) for r, s in zip(self.rows, signs)
        )
        return ValuationSystem(self.variables, rows)

    def satisfied_by(self, valuation: dict[str, int]) -> bool:
        for row in self.rows:
            v = 1
            for t in row.terms:
                v *= valuation[t]
            if v != row.sign:
                return False
        return True


@dataclass(frozen=True)
class ValuationReport:
    system: ValuationSystem
    solution: Gf2Solution
    derivation: tuple[str, ...] = field(default=())

    @property
    def consistent(self) -> bool:
        return self.solution.consistent

    @property
    def certificate(self) -> Certificate | None:
        return self.solution.certificate

    @property
    def verdict(self) -> str:
        return "CONSISTENT" if self.consistent else "INCONSISTENT"

    def valuations(self) -> list[dict[str, int]]:
        """Every global valuation as a sign map (consistent systems only)."""
        names = self.system.variables
        return [
            {n: (-1) ** b for n, b in zip(names, bits)} for bits in self.solution.solutions
        ]

    def render(self) -> str:
        return "\n".join(self.derivation)


def _sign_of(op: PauliOp) -> int:
    """``op`` is +-(its letter product); return that sign."""
    if op.sign_phase == 0:
        return 1
    if op.sign_phase == 2:
        return -1
    raise ValueError(f"{op} is not Hermitian")


def context_relations(ctx: ContextSpec) -> list[tuple[tuple[int, ...], int]]:
    """A basis of the multiplicative relations inside one context.

    Each relation is ``(indices, sign)`` with ``prod_k A_k = sign * 1``.
    Subsets are tried smallest first and kept when independent of those
    already kept.
    """
    obs = ctx.observables
    n = obs[0].n
    kept: list[tuple[tuple[int, ...], int]] = []
    reduced: list[tuple[int, int]] = []  # (pivot bit, subset mask) in echelon form
    for size in range(1, len(obs) + 1):
        for subset in combinations(range(len(obs)), size):
            prod = product([obs[k] for k in subset], n)
            if not prod.is_identity_up_to_phase():
                continue
            mask = sum(1 << k for k in subset)
            for pivot, row in reduced:
                if mask & pivot:
                    mask ^= row
            if not mask:
                continue
            reduced.append((mask & -mask, mask))
            kept.append((subset, _sign_of(prod)))
    return kept


def context_system(contexts: Sequence[ContextSpec], labels: Sequence[str] | None = None) -> ValuationSystem:
    """FUNC constraints of each context over the union of observable names."""
    names: list[str] = []
    for ctx in contexts:
        for name in ctx.names:
            if name not in names:
                names.append(name)
    rows = []
    for c, ctx in enumerate(contexts):
        tag = labels[c] if labels else f"C{c + 1}"
        for subset, sign in context_relations(ctx):
            terms = tuple(ctx.names[k] for k in subset)
            rows.append(ValuationRow(terms, sign, tag, frozenset(ctx.names)))
    return ValuationSystem(tuple(names), tuple(rows))


PENTAGRAM_SINGLES = ("X1", "X2", "X3", "Z1", "Z2", "Z3")
PENTAGRAM_PRODUCTS = ("X1X2X3", "X1Z2Z3", "Z1X2Z3", "Z1Z2X3")


def pentagram_contexts() -> list[ContextSpec]:
    """The five contexts of the ten-observable pentagram on three qubits."""
    return [
        ContextSpec.parse(["X1", "X2", "X3", "X1X2X3"], 3),
        ContextSpec.parse(["X1", "Z2", "Z3", "X1Z2Z3"], 3),
        ContextSpec.parse(["Z1", "X2", "Z3", "Z1X2Z3"], 3),
        ContextSpec.parse(["Z1", "Z2", "X3", "Z1Z2X3"], 3),
        ContextSpec.parse(list(PENTAGRAM_PRODUCTS), 3),
    ]


def pentagram_observables() -> list[PauliOp]:
    seen = {}
    for ctx in pentagram_contexts():
        for name, obs in zip(ctx.names, ctx.observables):
            seen.setdefault(name, obs)
    return list(seen.values())


def mermin_system() -> ValuationSystem:
    """Ten variables, five rows; the fifth row's sign comes out of the phases."""
    system = context_system(pentagram_contexts())
    order = PENTAGRAM_SINGLES + PENTAGRAM_PRODUCTS
    assert set(system.variables) == set(order)
    return ValuationSystem(order, system.rows)


def ghz_contexts(form: str = "Y") -> list[ContextSpec]:
    """Single-qubit-observable contexts of the three-qubit GHZ argument.

    ``form="Y"`` gives the contexts whose products stabilise the GHZ state
    up to sign; ``form="Z"`` keeps the X/Z labels of the pentagram.
    """
    o = "Y" if form == "Y" else "Z"
    specs = [
        ["X1", "X2", "X3"],
        ["X1", f"{o}2", f"{o}3"],
        [f"{o}1", "X2", f"{o}3"],
        [f"{o}1", f"{o}2", "X3"],
    ]
    return [ContextSpec.parse(s, 3) for s in specs]


def state_dependent_system(state: ScaledVector, contexts: Sequence[ContextSpec]) -> ValuationSystem:
    """One row per context: the product of its observables has a definite value."""
    names: list[str] = []
    rows = []
    for c, ctx in enumerate(contexts):
        prod = product(list(ctx.observables))
        value = eigenvalue(state, prod)
        if value is None:
            raise NotStabilisedError(f"context C{c + 1} ({', '.join(ctx.names)}): state is not an eigenvector of the product")
        for name in ctx.names:
            if name not in names:
                names.append(name)
        rows.append(ValuationRow(tuple(ctx.names), value, f"C{c + 1}", frozenset(ctx.names)))
    names.sort(key=lambda s: (len(s), s))
    return ValuationSystem(tuple(names), tuple(rows))


def _letter_var(op: PauliOp, j: int) -> str:
    return f"{op.letter(j)}{j + 1}"


def avn_system(subgroup: Sequence[PauliOp]) -> ValuationSystem:
    """Local-letter equations for every non-identity element of a Pauli subgroup."""
    members = set(subgroup)
    for a in subgroup:
        for b in subgroup:
            if multiply(a, b) not in members:
                raise ClosureError(f"{a} * {b} leaves the given set")
    for a in subgroup:
        if not a.is_hermitian():
            raise ClosureError(f"{a} is not +-1 times a Hermitian letter product")
    names: list[str] = []
    rows = []
    for op in sorted(subgroup, key=lambda o: (len(o.support), o.letters, o.sign_phase)):
        if op.is_identity_up_to_phase() and op.sign_phase == 0:
            continue
        terms = tuple(_letter_var(op, j) for j in op.support)
        for t in terms:
            if t not in names:
                names.append(t)
        rows.append(ValuationRow(terms, _sign_of(op), str(op), frozenset(terms)))
    names.sort(key=lambda s: (int(s[1:]), s[0]))
    return ValuationSystem(tuple(names), tuple(rows))


def solve(system: ValuationSystem) -> ValuationReport:
    """Decide the system; inconsistent ones get a replayed derivation."""
    sol = gf2_solve(system.system)
    lines: list[str] = []
    if sol.certificate is not None:
        assert sol.certificate.verify(system.system)
        lines = derivation_lines(system, sol.certificate)
    return ValuationReport(system, sol, tuple(lines))


def replay(system: ValuationSystem, certificate: Certificate) -> tuple[int, int]:
    """Multiply the certificate's equations as +-1 identities.

    Returns the (left, right) scalar values of the product.  Every variable
    occurring an even number of times makes the left side exactly 1.
    """
    counts: dict[str, int] = {}
    rhs = 1
    for r in sorted(certificate.rows):
        row = system.rows[r]
        rhs *= row.sign
        for t in row.terms:
            counts[t] = counts.get(t, 0) + 1
    if any(c % 2 for c in counts.values()):
        raise AssertionError("certificate leaves an unpaired valuation")
    return 1, rhs


def derivation_lines(system: ValuationSystem, certificate: Certificate) -> list[str]:
    lines = []
    for r in sorted(certificate.rows):
        row = system.rows[r]
        lines.append(f"  ({r + 1}) {row.render()}    [{row.provenance}]")
    left, right = replay(system, certificate)
    lines.append(
        "multiplying these rows, every ν(·) occurs an even number of times,"
        " so the left side is 1 while the right side is "
        + ("+1" if right > 0 else f"{MINUS}1")
    )
    lines.append(f"{left} = {MINUS}1" if right < 0 else f"{left} = 1")
    return lines


def valuation_from_bits(system: ValuationSystem, bits: Sequence[int]) -> dict[str, int]:
    return {n: (-1) ** b for n, b in zip(system.variables, bits)}


def bits_of(system: ValuationSystem, value: int) -> tuple[int, ...]:
    return int_to_bits(value, len(system.variables))
