"""n-qubit Pauli operators in symplectic form, plus Clifton's Weyl words.

A :class:`PauliOp` is ``i**phase * prod_j X_j**x_j Z_j**z_j`` with the X
factor written left of the Z factor on every qubit, so ``Y = i X Z`` is
stored as ``x=1, z=1, phase=1``.  Bit j of ``x``/``z`` is qubit j+1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PREFIXES = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}

MAX_GROUP_QUBITS = 8


class PauliParseError(ValueError):
    def __init__(self, message: str, text: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class ArityError(ValueError):
    """Operands act on different numbers of qubits."""


class InvalidTripleError(ValueError):
    """An AvN triple candidate is phased or not pairwise commuting."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliOp:
    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("a Pauli operator needs at least one qubit")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bit vectors longer than n")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOp":
        return cls(n, 0, 0)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliOp":
        """Phase-free letters mean the Hermitian operator, so each Y adds i."""
        x = z = 0
        for j, ch in enumerate(letters):
            bx, bz = _LETTER_BITS[ch]
            x |= bx << j
            z |= bz << j
        ny = _popcount(x & z)
        return cls(len(letters), x, z, phase + ny)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOp":
        """``letter`` acting on 1-based ``qubit`` of ``n``."""
        letters = ["I"] * n
        letters[qubit - 1] = letter
        return cls.from_letters("".join(letters))

    # bits ---------------------------------------------------------------
    @property
    def xbits(self) -> tuple[int, ...]:
        return tuple((self.x >> j) & 1 for j in range(self.n))

    @property
    def zbits(self) -> tuple[int, ...]:
        return tuple((self.z >> j) & 1 for j in range(self.n))

    @property
    def letters(self) -> str:
        return "".join(self.letter(j) for j in range(self.n))

    def letter(self, j: int) -> str:
        """Letter on 0-based qubit ``j``."""
        return _BITS_LETTER[((self.x >> j) & 1, (self.z >> j) & 1)]

    @property
    def sign_phase(self) -> int:
        """Phase relative to the Hermitian letter product (Y counted as Y)."""
        return (self.phase - _popcount(self.x & self.z)) % 4

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if (self.x | self.z) >> j & 1)

    def is_identity_up_to_phase(self) -> bool:
        return self.x == 0 and self.z == 0

    def is_hermitian(self) -> bool:
        return self.sign_phase in (0, 2)

    def is_involution(self) -> bool:
        """Squares to +1 exactly."""
        return self.is_hermitian()

    def unsigned(self) -> "PauliOp":
        """The phase-free (Hermitian, global phase +1) letter product."""
        return PauliOp(self.n, self.x, self.z, _popcount(self.x & self.z))

    def negate(self) -> "PauliOp":
        return PauliOp(self.n, self.x, self.z, self.phase + 2)

    # algebra ------------------------------------------------------------
    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def __neg__(self) -> "PauliOp":
        return self.negate()

    # printing -----------------------------------------------------------
    def __str__(self) -> str:
        return _PHASE_PREFIX[self.sign_phase] + self.letters

    def label(self) -> str:
        """Indexed form used for observable names, e.g. ``X1Z2Z3``."""
        body = "".join(f"{self.letter(j)}{j + 1}" for j in self.support) or "I"
        return _PHASE_PREFIX[self.sign_phase] + body

    def __repr__(self) -> str:
        return f"PauliOp({str(self)!r})"


_INDEXED = re.compile(r"([IXYZ])(\d+)")


def parse_pauli(text: str, n: int | None = None) -> PauliOp:
    """Parse ``"XZZ"``, ``"-iY"``, ``"X1*Z2*Z3"`` or ``"X1Z2Z3"``.

    Indexed forms take ``n`` from the largest index unless ``n`` is given.
    """
    if not text or not text.strip():
        raise PauliParseError("empty Pauli string", text, 0)
    s = text.strip()
    start = len(text) - len(text.lstrip())
    pos = 0
    prefix = ""
    for cand in ("-i", "+i", "-", "+", "i"):
        if s.startswith(cand):
            prefix = cand
            break
    pos = len(prefix)
    body = s[pos:]
    if not body:
        raise PauliParseError("missing operator letters", text, start + pos)
    phase = _PREFIXES[prefix]

    if any(ch.isdigit() for ch in body):
        factors: dict[int, str] = {}
        i = 0
        while i < len(body):
            if body[i] == "*":
                i += 1
                continue
            m = _INDEXED.match(body, i)
            if m is None:
                raise PauliParseError(f"unexpected character {body[i]!r}", text, start + pos + i)
            q = int(m.group(2))
            if q < 1:
                raise PauliParseError("qubit indices start at 1", text, start + pos + m.start(2))
            if q in factors:
                raise PauliParseError(f"qubit {q} repeated", text, start + pos + i)
            factors[q] = m.group(1)
            i = m.end()
        width = max(factors)
        if n is not None:
            if width > n:
                raise PauliParseError(f"index {width} exceeds n={n}", text, start + pos)
            width = n
        letters = ["I"] * width
        for q, ch in factors.items():
            letters[q - 1] = ch
        return PauliOp.from_letters("".join(letters), phase)

    for i, ch in enumerate(body):
        if ch not in _LETTER_BITS:
            raise PauliParseError(f"unknown letter {ch!r}", text, start + pos + i)
    if n is not None and len(body) != n:
        raise PauliParseError(f"length {len(body)} does not match n={n}", text, start + pos)
    return PauliOp.from_letters(body, phase)


def _check_arity(p: PauliOp, q: PauliOp) -> None:
    if p.n != q.n:
        raise ArityError(f"{p.n}-qubit operator against {q.n}-qubit operator")


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    """``p @ q``: moving each Z of p past an X of q costs a factor -1."""
    _check_arity(p, q)
    phase = p.phase + q.phase + 2 * _popcount(p.z & q.x)
    return PauliOp(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def product(ops: Iterable[PauliOp], n: int | None = None) -> PauliOp:
    ops = list(ops)
    if not ops:
        if n is None:
            raise ValueError("empty product needs n")
        return PauliOp.identity(n)
    out = ops[0]
    for op in ops[1:]:
        out = multiply(out, op)
    return out


def commutes(p: PauliOp, q: PauliOp) -> bool:
    _check_arity(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def subgroup_generate(gens: Sequence[PauliOp]) -> list[PauliOp]:
    """Multiplicative closure of ``gens`` (identity included), sorted."""
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    for g in gens:
        _check_arity(gens[0], g)
    if n > MAX_GROUP_QUBITS:
        raise ValueError(f"group closure limited to {MAX_GROUP_QUBITS} qubits")
    limit = 4 * 4**n
    group = {PauliOp.identity(n)}
    frontier = list(group)
    while frontier:
        new = []
        for a in frontier:
            for g in gens:
                c = multiply(a, g)
                if c not in group:
                    group.add(c)
                    new.append(c)
        if len(group) > limit:
            raise RuntimeError("closure exceeded the Pauli group order")
        frontier = new
    return sorted(group)


# --------------------------------------------------------------------------
# all-versus-nothing triples


@dataclass(frozen=True)
class AvnVerdict:
    is_triple: bool
    condition1: bool
    condition2: bool
    sandwich_positions: tuple[int, ...]
    all_equal_positions: tuple[int, ...]
    reason: str

    def __bool__(self) -> bool:
        return self.is_triple


def is_avn_triple(e: PauliOp, f: PauliOp, g: PauliOp) -> AvnVerdict:
    """Check the two letterwise conditions of an all-versus-nothing triple.

    Condition 1: on every qubit at least two of the letters agree.
    Condition 2: the number of qubits where ``e`` and ``g`` carry the same
    non-identity letter and ``f`` a different non-identity letter is odd.
    Those are exactly the qubits where ``e f g`` picks up a sign, so the
    count's parity is the sign of ``e f g``.  The number of all-equal
    non-identity qubits is reported alongside for comparison.
    """
    ops = (e, f, g)
    if len({o.n for o in ops}) != 1:
        raise ArityError("triple members act on different qubit counts")
    for o in ops:
        if o.sign_phase != 0:
            raise InvalidTripleError(f"{o} does not have global phase +1")
    for a, b in combinations(ops, 2):
        if not commutes(a, b):
            raise InvalidTripleError(f"{a} and {b} do not commute")

    cond1 = True
    sandwich = []
    all_equal = []
    for j in range(e.n):
        le, lf, lg = e.letter(j), f.letter(j), g.letter(j)
        if le != lf and lf != lg and le != lg:
            cond1 = False
        if le == lf == lg and le != "I":
            all_equal.append(j + 1)
        if le == lg != lf and le != "I" and lf != "I":
            sandwich.append(j + 1)
    cond2 = len(sandwich) % 2 == 1
    if not cond1:
        reason = "condition 1 fails: some qubit carries three distinct letters"
    elif not cond2:
        reason = f"condition 2 fails: sign-carrying qubit count {len(sandwich)} (even)"
    else:
        reason = f"both conditions hold: sign-carrying qubit count {len(sandwich)} (odd)"
    return AvnVerdict(cond1 and cond2, cond1, cond2, tuple(sandwich), tuple(all_equal), reason)


# --------------------------------------------------------------------------
# Weyl words: products of U(p_i) and V(q_i) in normal order


@dataclass(frozen=True)
class WeylWord:
    """``exp(i*pi*phase) * prod_i U_i**u_i V_i**v_i`` with U left of V per index.

    ``U_i**k`` stands for ``U(k p_i)`` and ``V_i**k`` for ``V(k q_i)``.
    """

    phase: Fraction = Fraction(0)
    exps: tuple[tuple[int, int], ...] = ((0, 0), (0, 0), (0, 0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "phase", Fraction(self.phase) % 2)

    @classmethod
    def letter(cls, kind: str, index: int, power: int = 1, dof: int = 3) -> "WeylWord":
        exps = [[0, 0] for _ in range(dof)]
        exps[index - 1][0 if kind == "U" else 1] = power
        return cls(Fraction(0), tuple(tuple(e) for e in exps))

    @classmethod
    def identity(cls, dof: int = 3) -> "WeylWord":
        return cls(Fraction(0), tuple((0, 0) for _ in range(dof)))

    def is_scalar(self) -> bool:
        return all(u == 0 and v == 0 for u, v in self.exps)

    def scalar_sign(self) -> int | None:
        """+1 or -1 when the word is a real scalar, else None."""
        if not self.is_scalar():
            return None
        if self.phase == 0:
            return 1
        if self.phase == 1:
            return -1
        return None

    def __str__(self) -> str:
        parts = []
        for i, (u, v) in enumerate(self.exps, start=1):
            if u:
                parts.append(f"U(p{i})" if u == 1 else f"U({u}p{i})")
            if v:
                parts.append(f"V(q{i})" if v == 1 else f"V({v}q{i})")
        body = " ".join(parts) or "1"
        if self.phase == 0:
            return body
        if self.phase == 1:
            return "-" + body
        return f"exp(i*pi*{self.phase}) {body}"


def weyl_multiply(a: WeylWord, b: WeylWord, pq: Sequence[Fraction | int] | None = None) -> WeylWord:
    """Normal-ordered product.  ``pq[i]`` is ``p_i q_i / pi``.

    Pulling ``U_i**u`` left past ``V_i**v`` gives ``exp(i*pi*u*v*pq[i])``;
    the default ``pq = 1`` makes every elementary swap a factor -1.
    """
    if len(a.exps) != len(b.exps):
        raise ArityError("Weyl words over different numbers of degrees of freedom")
    if pq is None:
        pq = (1,) * len(a.exps)
    phase = a.phase + b.phase
    exps = []
    for (ua, va), (ub, vb), c in zip(a.exps, b.exps, pq):
        phase += Fraction(c) * va * ub
        exps.append((ua + ub, va + vb))
    return WeylWord(phase, tuple(exps))


def weyl_product(words: Iterable[WeylWord], pq=None, dof: int = 3) -> WeylWord:
    out = WeylWord.identity(dof)
    for w in words:
        out = weyl_multiply(out, w, pq)
    return out


def weyl_commutes(a: WeylWord, b: WeylWord, pq=None) -> bool:
    return weyl_multiply(a, b, pq) == weyl_multiply(b, a, pq)


@dataclass(frozen=True)
class CliftonEquation:
    """``nu(letter_1 letter_2 letter_3) = nu(letter_1) nu(letter_2) nu(letter_3)``."""

    label: str
    letters: tuple[WeylWord, ...]

    @property
    def word(self) -> WeylWord:
        return weyl_product(self.letters)

    def __str__(self) -> str:
        inner = " ".join(str(w) for w in self.letters)
        rhs = " ".join(f"nu({w})" for w in self.letters)
        return f"nu({inner}) = {rhs}"


def _L(kind: str, index: int, power: int) -> WeylWord:
    return WeylWord.letter(kind, index, power)


def clifton_equations(negate_third_v3: bool = False) -> list[CliftonEquation]:
    """The four position-momentum FUNC equations.

    The third equation uses ``V(q3)`` so that every letter cancels in the
    product, mirroring the pentagram's sign pattern.  ``negate_third_v3=True``
    switches it to ``V(-q3)``, under which two V_3 letters are left over.
    """
    third_v3 = -1 if negate_third_v3 else 1
    return [
        CliftonEquation("U(-p1)U(-p2)U(-p3)", (_L("U", 1, -1), _L("U", 2, -1), _L("U", 3, -1))),
        CliftonEquation("V(q1)V(q2)U(p3)", (_L("V", 1, 1), _L("V", 2, 1), _L("U", 3, 1))),
        CliftonEquation(
            "V(-q1)U(p2)V(%sq3)" % ("-" if negate_third_v3 else ""),
            (_L("V", 1, -1), _L("U", 2, 1), _L("V", 3, third_v3)),
        ),
        CliftonEquation("U(p1)V(-q2)V(-q3)", (_L("U", 1, 1), _L("V", 2, -1), _L("V", 3, -1))),
    ]


@dataclass(frozen=True)
class CliftonReport:
    func_value: int | None
    operator_value: int | None
    operator_word: WeylWord
    net_exponents: dict[str, int]
    equations: tuple[CliftonEquation, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def contradiction(self) -> bool:
        return (
            self.func_value is not None
            and self.operator_value is not None
            and self.func_value != self.operator_value
        )


def _net_exponents(equations: Sequence[CliftonEquation]) -> dict[str, int]:
    net: dict[str, int] = {}
    for eq in equations:
        for w in eq.letters:
            for i, (u, v) in enumerate(w.exps, start=1):
                if u:
                    net[f"U{i}"] = net.get(f"U{i}", 0) + u
                if v:
                    net[f"V{i}"] = net.get(f"V{i}", 0) + v
    return net


def clifton_contradiction(
    equations: Sequence[CliftonEquation] | None = None, pq=None
) -> CliftonReport:
    """Multiply the equations' two sides.

    Right-hand sides are products of scalars ``nu(U_i)**k``; FUNC turns
    ``nu(U(-p))`` into ``nu(U(p))**-1``, so the product is +1 exactly when
    every letter's net exponent vanishes.  Left-hand sides are multiplied
    as operators with :func:`weyl_multiply`; FUNC on the (mutually commuting)
    product operators gives the value of the resulting scalar.
    """
    default_set = equations is None
    if equations is None:
        equations = clifton_equations()
    net = _net_exponents(equations)
    func_value = 1 if all(k == 0 for k in net.values()) else None
    words = [eq.word for eq in equations]
    dof = len(words[0].exps) if words else 3
    op = weyl_product(words, pq, dof)
    notes = []
    for a, b in combinations(range(len(words)), 2):
        if not weyl_commutes(words[a], words[b], pq):
            notes.append(f"product operators {a + 1} and {b + 1} do not commute")
    if default_set:
        notes.append(
            "third equation uses V(q3); with V(-q3) the V_3 letters do not cancel"
        )
    return CliftonReport(func_value, op.scalar_sign(), op, net, tuple(equations), tuple(notes))


def clifton_abelianised() -> CliftonReport:
    """Control run with every commutation phase switched off."""
    return clifton_contradiction(clifton_equations(), pq=(0, 0, 0))
