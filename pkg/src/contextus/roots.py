"""Rays of the pentagram contexts, their reflection closure, and colourings.

Rays are rescaled to squared norm 2 so every coordinate stays rational
(context-1 rays become half-integer vectors).  The closure engine works on
integer vectors over a common denominator and converts back at the edges.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .hilbert import ContextSpec, joint_eigenbasis

CLOSURE_GUARD = 100_000
MAX_BASIS_RAYS = 64
_PRIMES = (17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


class UnsupportedContextError(ValueError):
    pass


class ClosureDivergenceError(RuntimeError):
    pass


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True, order=True)
class RootVector:
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        coords = tuple(Fraction(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if dot(coords, coords) != 2:
            raise ValueError(f"squared norm {dot(coords, coords)} is not 2")

    def __neg__(self) -> "RootVector":
        return RootVector(tuple(-c for c in self.coords))

    def canonical(self) -> "RootVector":
        """Sign representative of the ray: first nonzero coordinate positive."""
        lead = next(c for c in self.coords if c)
        return self if lead > 0 else -self

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.coords)


def reflect(alpha: Sequence | RootVector, beta: Sequence | RootVector) -> tuple[Fraction, ...]:
    """``beta - 2 (alpha, beta) / (alpha, alpha) alpha``."""
    a = alpha.coords if isinstance(alpha, RootVector) else tuple(Fraction(c) for c in alpha)
    b = beta.coords if isinstance(beta, RootVector) else tuple(Fraction(c) for c in beta)
    aa = dot(a, a)
    if not aa:
        raise ValueError("cannot reflect in the zero vector")
    k = 2 * dot(a, b) / aa
    return tuple(y - k * x for x, y in zip(a, b))


def reflect_root(alpha: RootVector, beta: RootVector) -> RootVector:
    return RootVector(reflect(alpha, beta))


def rays_from_contexts(contexts: Sequence[ContextSpec]) -> list[RootVector]:
    """Joint eigenvectors of every context as sign-canonical norm-2 rays."""
    seen: dict[RootVector, None] = {}
    for ctx in contexts:
        for ray in joint_eigenbasis(ctx):
            coords = ray.vector.coords
            if any(c.im for c in coords):
                raise UnsupportedContextError(f"context {ctx.names} has a non-real eigenvector")
            real = [c.re for c in coords]
            n2 = sum(c * c for c in real)
            # need k with k^2 * n2 == 2 and k rational
            ratio = Fraction(2) / n2
            num, den = math.isqrt(ratio.numerator), math.isqrt(ratio.denominator)
            if num * num != ratio.numerator or den * den != ratio.denominator:
                raise UnsupportedContextError(f"ray of squared norm {n2} has no rational norm-2 rescaling")
            k = Fraction(num, den)
            seen.setdefault(RootVector(tuple(k * c for c in real)).canonical(), None)
    return list(seen)


# --------------------------------------------------------------------------
# closure


@dataclass(frozen=True)
class RootSystem:
    roots: tuple[RootVector, ...]

    def __len__(self) -> int:
        return len(self.roots)

    def __contains__(self, v) -> bool:
        return v in set(self.roots)

    @property
    def dim(self) -> int:
        return len(self.roots[0].coords)

    def antipodal_pairs(self) -> int:
        s = set(self.roots)
        paired = sum(1 for r in self.roots if -r in s)
        return paired // 2

    def check_axioms(self) -> bool:
        """Closed under every mutual reflection; only +-1 multiples present."""
        s = set(self.roots)
        ints, _ = _to_int(self.roots)
        iset = set(ints)
        for a in ints:
            aa = _idot(a, a)
            for b in ints:
                if _reflect_int(a, b, aa) not in iset:
                    return False
        # equal-norm vectors are parallel exactly when (a, b)^2 = |a|^2 |b|^2
        for a in ints:
            for b in ints:
                if a == b or a == tuple(-x for x in b):
                    continue
                if _idot(a, b) ** 2 == _idot(a, a) * _idot(b, b):
                    return False
        return all(-r in s for r in self.roots)

    def inner_products(self) -> set[Fraction]:
        return {dot(a.coords, b.coords) for a in self.roots for b in self.roots}


def _to_int(vectors: Sequence[RootVector]) -> tuple[list[tuple[int, ...]], int]:
    den = 1
    for v in vectors:
        for c in v.coords:
            den = den * c.denominator // math.gcd(den, c.denominator)
    return [tuple(int(c * den) for c in v.coords) for v in vectors], den


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _reflect_int(a, b, aa) -> tuple[int, ...]:
    num = 2 * _idot(a, b)
    if num % aa:
        raise ClosureDivergenceError("reflection coefficient is not an integer (non-crystallographic seed)")
    k = num // aa
    if not k:
        return b
    return tuple(y - k * x for x, y in zip(a, b))


def reflection_closure(seed: Iterable[RootVector], guard: int = CLOSURE_GUARD) -> RootSystem:
    """Add ``s_a(b)`` for all pairs until nothing new appears."""
    seed = list(seed)
    if not seed:
        raise ValueError("empty seed")
    ints, den = _to_int(seed)
    aa = _idot(ints[0], ints[0])
    known: set[tuple[int, ...]] = set()
    order: list[tuple[int, ...]] = []
    queue: list[tuple[int, ...]] = []
    for v in ints:
        for w in (v, tuple(-x for x in v)):
            if w not in known:
                known.add(w)
                order.append(w)
                queue.append(w)
    while queue:
        v = queue.pop()
        for u in list(order):
            for w in (_reflect_int(u, v, aa), _reflect_int(v, u, aa)):
                if w not in known:
                    known.add(w)
                    order.append(w)
                    queue.append(w)
                    if len(known) > guard:
                        raise ClosureDivergenceError(f"closure passed {guard} vectors")
    roots = sorted(RootVector(tuple(Fraction(x, den) for x in v)) for v in known)
    return RootSystem(tuple(roots))


# --------------------------------------------------------------------------
# Coxeter graph


@dataclass(frozen=True)
class CoxeterGraph:
    simple_roots: tuple[RootVector, ...]
    labels: dict[tuple[int, int], int]
    classification: str
    functional: tuple[int, ...] = field(default=())

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return sorted((i, j, m) for (i, j), m in self.labels.items() if m > 2)

    def gram(self) -> list[list[Fraction]]:
        return [[dot(a.coords, b.coords) for b in self.simple_roots] for a in self.simple_roots]

    def degree(self, i: int) -> int:
        return sum(1 for a, b, _ in self.edges if i in (a, b))


def _coxeter_label(a: RootVector, b: RootVector) -> int:
    ab = dot(a.coords, b.coords)
    c = 4 * ab * ab / (dot(a.coords, a.coords) * dot(b.coords, b.coords))
    table = {0: 2, 1: 3, 2: 4, 3: 6}
    if c not in table:
        raise ValueError(f"inner-product ratio {c} gives no crystallographic label")
    return table[int(c)]


def power_functional(t: int, dim: int) -> tuple[int, ...]:
    return tuple(t**k for k in range(dim))


def simple_roots(system: RootSystem, functional: Sequence[int]) -> list[RootVector]:
    values = {r: dot(r.coords, functional) for r in system.roots}
    if any(v == 0 for v in values.values()):
        raise ValueError("functional vanishes on a root")
    positive = [r for r in system.roots if values[r] > 0]
    pos_set = set(c.coords for c in positive)
    simple = []
    for r in positive:
        decomposable = False
        for p in positive:
            if p is r:
                continue
            diff = tuple(x - y for x, y in zip(r.coords, p.coords))
            if diff in pos_set:
                decomposable = True
                break
        if not decomposable:
            simple.append(r)
    simple.sort(key=lambda r: values[r])
    return simple


def coxeter_graph(system: RootSystem, functional: Sequence[int] | None = None) -> CoxeterGraph:
    """Simple roots for a generic functional, pairwise labels, and the diagram type.

    Without an explicit functional the coordinates ``(1, t, t^2, ...)`` are
    used, starting at ``t = 17`` and moving to the next prime whenever a
    root lies in the functional's kernel.
    """
    candidates = [tuple(functional)] if functional is not None else [
        power_functional(t, system.dim) for t in _PRIMES
    ]
    for f in candidates:
        if any(dot(r.coords, f) == 0 for r in system.roots):
            continue
        simple = simple_roots(system, f)
        labels = {}
        for i in range(len(simple)):
            for j in range(i + 1, len(simple)):
                labels[(i, j)] = _coxeter_label(simple[i], simple[j])
        return CoxeterGraph(tuple(simple), labels, classify_diagram(len(simple), labels), tuple(f))
    raise ValueError("every candidate functional vanishes on some root")


def _components(n: int, edges: list[tuple[int, int, int]]) -> list[list[int]]:
    adj = {i: set() for i in range(n)}
    for a, b, _ in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[int] = set()
    comps = []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _classify_component(nodes: list[int], edges: list[tuple[int, int, int]]) -> str:
    n = len(nodes)
    if n == 1:
        return "A1"
    if len(edges) != n - 1:
        return "affine-or-infinite"
    deg = {v: 0 for v in nodes}
    adj = {v: [] for v in nodes}
    for a, b, _ in edges:
        deg[a] += 1
        deg[b] += 1
        adj[a].append(b)
        adj[b].append(a)
    marks = sorted(m for _, _, m in edges if m > 3)
    branch = [v for v in nodes if deg[v] >= 3]
    if not branch:
        ends = [v for v in nodes if deg[v] == 1]
        path = [ends[0]]
        while len(path) < n:
            path.append(next(w for w in adj[path[-1]] if w not in path))
        labels = []
        for a, b in zip(path, path[1:]):
            labels.append(next(m for x, y, m in edges if {x, y} == {a, b}))
        if not marks:
            return f"A{n}"
        if marks == [6] and n == 2:
            return "G2"
        if marks == [4]:
            if labels[0] == 4 or labels[-1] == 4:
                return "B2" if n == 2 else f"B{n}"
            if n == 4 and labels[1] == 4:
                return "F4"
        return "unknown"
    if len(branch) > 1 or deg[branch[0]] != 3 or marks:
        return "unknown"
    c = branch[0]
    arms = []
    for start in adj[c]:
        length, prev, cur = 1, c, start
        while deg[cur] == 2:
            nxt = next(w for w in adj[cur] if w != prev)
            prev, cur = cur, nxt
            length += 1
        arms.append(length)
    arms.sort()
    if arms[0] == 1 and arms[1] == 1:
        return f"D{n}"
    return {(1, 2, 2): "E6", (1, 2, 3): "E7", (1, 2, 4): "E8"}.get(tuple(arms), "unknown")


def classify_diagram(n: int, labels: dict[tuple[int, int], int]) -> str:
    """Name the finite Coxeter type of a diagram by its shape."""
    edges = [(i, j, m) for (i, j), m in labels.items() if m > 2]
    comps = _components(n, edges)
    names = []
    for comp in comps:
        cset = set(comp)
        names.append(_classify_component(comp, [e for e in edges if e[0] in cset]))
    names.sort(key=lambda s: (s[0], -int("".join(ch for ch in s if ch.isdigit()) or 0)))
    return "x".join(names)


def random_functional(dim: int, rng: random.Random) -> tuple[int, ...]:
    return tuple(rng.randint(-10**6, 10**6) for _ in range(dim))


# --------------------------------------------------------------------------
# orthogonal bases and colourings


def orthogonality_graph(rays: Sequence[RootVector]) -> dict[int, set[int]]:
    adj = {i: set() for i in range(len(rays))}
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            if dot(rays[i].coords, rays[j].coords) == 0:
                adj[i].add(j)
                adj[j].add(i)
    return adj


def maximal_cliques(adj: dict[int, set[int]]) -> list[tuple[int, ...]]:
    """Bron-Kerbosch with Tomita pivoting."""
    out: list[tuple[int, ...]] = []

    def expand(r: list[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand([], set(adj), set())
    return sorted(out)


def orthogonal_bases(rays: Sequence[RootVector]) -> list[tuple[int, ...]]:
    """Every complete orthogonal basis among the rays, as sorted index tuples."""
    if len(rays) > MAX_BASIS_RAYS:
        raise ValueError(f"{len(rays)} rays exceeds the guard of {MAX_BASIS_RAYS}")
    if not rays:
        return []
    dim = len(rays[0].coords)
    return [c for c in maximal_cliques(orthogonality_graph(rays)) if len(c) == dim]


@dataclass(frozen=True)
class ColouringResult:
    feasible: bool
    colouring: dict[int, int] | None
    nodes: int
    conflict: tuple[int, ...] = ()
    count: int | None = None

    @property
    def verdict(self) -> str:
        return "FEASIBLE" if self.feasible else "INFEASIBLE"


def colouring_search(
    nrays: int, bases: Sequence[Sequence[int]], find_all: bool = False
) -> ColouringResult:
    """Search for a 0/1 ray colouring with exactly one 1 in every basis.

    Branches on the open basis with the fewest uncoloured rays; choosing a
    ray forces every other ray sharing a basis with it to 0.
    """
    bases = [tuple(b) for b in bases]
    containing: dict[int, list[int]] = {r: [] for r in range(nrays)}
    for k, b in enumerate(bases):
        for r in b:
            containing[r].append(k)
    colour: dict[int, int] = {}
    nodes = 0
    count = 0
    first: dict[int, int] | None = None
    last_conflict: tuple[int, ...] = ()

    def status(k: int) -> tuple[bool, list[int]]:
        ones = [r for r in bases[k] if colour.get(r) == 1]
        free = [r for r in bases[k] if r not in colour]
        return bool(ones), free

    def assign(ray: int) -> list[int] | None:
        """Colour ``ray`` 1, zero its neighbours; return changed rays or None."""
        nonlocal last_conflict
        changed = [ray]
        colour[ray] = 1
        for k in containing[ray]:
            for r in bases[k]:
                if r == ray:
                    continue
                if colour.get(r) == 1:
                    last_conflict = (k,)
                    return _undo(changed)
                if r not in colour:
                    colour[r] = 0
                    changed.append(r)
        # any basis left with no possible 1 is dead
        touched = {k for r in changed for k in containing[r]}
        for k in touched:
            has_one, free = status(k)
            if not has_one and not free:
                last_conflict = (k,)
                return _undo(changed)
        return changed

    def _undo(changed: list[int]) -> None:
        for r in changed:
            colour.pop(r, None)
        return None

    def search() -> bool:
        nonlocal nodes, count, first
        nodes += 1
        best = None
        for k in range(len(bases)):
            has_one, free = status(k)
            if has_one:
                continue
            if best is None or len(free) < len(best[1]):
                best = (k, free)
        if best is None:
            count += 1
            if first is None:
                first = {r: colour.get(r, 0) for r in range(nrays)}
            return not find_all
        for r in best[1]:
            changed = assign(r)
            if changed is None:
                continue
            if search():
                return True
            _undo(changed)
        return False

    search()
    feasible = first is not None
    return ColouringResult(
        feasible,
        first,
        nodes,
        () if feasible else last_conflict,
        count if find_all else None,
    )


# --------------------------------------------------------------------------
# export


def export_roots(system: RootSystem) -> str:
    lines = [" ".join(str(c) for c in r.coords) for r in sorted(system.roots)]
    return "\n".join(lines) + "\n"


def write_roots(system: RootSystem, path: str | Path) -> None:
    Path(path).write_text(export_roots(system), encoding="utf-8")


def read_roots(path: str | Path) -> RootSystem:
    roots = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            roots.append(RootVector(tuple(Fraction(t) for t in line.split())))
    return RootSystem(tuple(roots))
