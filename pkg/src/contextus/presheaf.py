"""Finite posets, set-valued presheaves on them, and their global sections.

Two concrete presheaves live here.  The spectral presheaf sends a commuting
set of observables to its characters (joint eigenvalue patterns); the
coordinate-ring view sends it to the closed points of a ring over signs.
Both use sections of the form ``((name, value), ...)`` with restriction by
filtering, so their global sections can be compared with the GF(2) verdicts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .hilbert import ContextSpec, InvalidContextError, ScaledVector, born_probability, joint_eigenbasis
from .pauli import PauliOp

Section = tuple[tuple[str, int], ...]
MAX_RING_VARIABLES = 20


class PosetError(ValueError):
    pass


class VariableInclusionError(ValueError):
    pass


@dataclass(frozen=True)
class FinitePoset:
    elements: tuple[Hashable, ...]
    leq_pairs: frozenset[tuple[Hashable, Hashable]]

    def __post_init__(self) -> None:
        els = set(self.elements)
        if len(els) != len(self.elements):
            raise PosetError("repeated poset element")
        pairs = set(self.leq_pairs) | {(e, e) for e in self.elements}
        for a, b in pairs:
            if a not in els or b not in els:
                raise PosetError(f"pair ({a}, {b}) uses unknown elements")
        for a, b in pairs:
            if a != b and (b, a) in pairs:
                raise PosetError(f"antisymmetry fails for {a}, {b}")
        for a, b in pairs:
            for c in self.elements:
                if (b, c) in pairs and (a, c) not in pairs:
                    raise PosetError(f"transitivity fails: {a} <= {b} <= {c}")
        object.__setattr__(self, "leq_pairs", frozenset(pairs))

    def leq(self, a, b) -> bool:
        return (a, b) in self.leq_pairs

    def below(self, v) -> list:
        return [u for u in self.elements if self.leq(u, v)]

    def maximal(self) -> list:
        return [v for v in self.elements if not any(v != w and self.leq(v, w) for w in self.elements)]

    def hasse_edges(self) -> list[tuple]:
        edges = []
        for a, b in self.leq_pairs:
            if a == b:
                continue
            if not any(c not in (a, b) and self.leq(a, c) and self.leq(c, b) for c in self.elements):
                edges.append((a, b))
        order = {e: i for i, e in enumerate(self.elements)}
        return sorted(edges, key=lambda ab: (order[ab[1]], order[ab[0]]))


def element_label(element) -> str:
    if isinstance(element, frozenset):
        return "{" + ", ".join(sorted(element, key=_name_key)) + "}"
    return str(element)


def _name_key(name: str):
    return (len(name), name)


def context_poset(contexts: Sequence[Iterable[str]]) -> FinitePoset:
    """Contexts plus every nonempty intersection, ordered by inclusion."""
    sets: list[frozenset[str]] = []
    for c in contexts:
        s = frozenset(c)
        if s not in sets:
            sets.append(s)
    changed = True
    while changed:
        changed = False
        for a, b in combinations(list(sets), 2):
            m = a & b
            if m and m not in sets:
                sets.append(m)
                changed = True
    sets.sort(key=lambda s: -len(s))
    # keep the given order for maximal contexts, then the rest by size
    ordered = [frozenset(c) for c in dict.fromkeys(frozenset(c) for c in contexts)]
    rest = [s for s in sets if s not in ordered]
    rest.sort(key=lambda s: (-len(s), sorted(s, key=_name_key)))
    elements = tuple(ordered + rest)
    pairs = frozenset((a, b) for a in elements for b in elements if a <= b)
    return FinitePoset(elements, pairs)


Restriction = Callable[[Hashable, Hashable, Section], Section]


def restrict_by_names(u, v, section: Section) -> Section:
    """Function restriction for presheaves whose elements are name sets."""
    keep = set(u)
    return tuple((n, x) for n, x in section if n in keep)


@dataclass
class FinitePresheaf:
    poset: FinitePoset
    stalks: dict[Hashable, tuple[Section, ...]]
    restrict: Restriction = restrict_by_names

    def __post_init__(self) -> None:
        missing = set(self.poset.elements) - set(self.stalks)
        if missing:
            raise PosetError(f"no stalk for {[element_label(m) for m in missing]}")

    def check_functoriality(self) -> bool:
        """Identity and composition laws over every composable pair."""
        for u in self.poset.elements:
            for s in self.stalks[u]:
                if self.restrict(u, u, s) != s:
                    return False
        for u, v in self.poset.leq_pairs:
            stalk_u = set(self.stalks[u])
            for s in self.stalks[v]:
                r = self.restrict(u, v, s)
                if r not in stalk_u:
                    return False
            for w in self.poset.elements:
                if not self.poset.leq(v, w):
                    continue
                for s in self.stalks[w]:
                    if self.restrict(u, v, self.restrict(v, w, s)) != self.restrict(u, w, s):
                        return False
        return True


@dataclass
class SearchNode:
    node_id: int
    parent: int | None
    element: Hashable
    section: Section
    accepted: bool


@dataclass
class SearchTrace:
    nodes: list[SearchNode] = field(default_factory=list)

    def add(self, parent, element, section, accepted) -> int:
        nid = len(self.nodes)
        self.nodes.append(SearchNode(nid, parent, element, section, accepted))
        return nid


def global_sections(p: FinitePresheaf, trace: SearchTrace | None = None) -> list[dict]:
    """All compatible families, found by backtracking over maximal elements."""
    maxes = p.poset.maximal()
    lower = {m: set(p.poset.below(m)) for m in maxes}
    shared = {
        (i, j): [u for u in lower[maxes[i]] & lower[maxes[j]]]
        for i in range(len(maxes))
        for j in range(i)
    }
    found: list[dict] = []
    chosen: list[Section] = []

    def fits(i: int, s: Section) -> bool:
        m = maxes[i]
        for u in lower[m]:
            if p.restrict(u, m, s) not in p.stalks[u]:
                return False
        for j in range(i):
            for u in shared[(i, j)]:
                if p.restrict(u, m, s) != p.restrict(u, maxes[j], chosen[j]):
                    return False
        return True

    def extend(i: int, parent: int | None) -> None:
        if i == len(maxes):
            family = {}
            for u in p.poset.elements:
                k = next(k for k, m in enumerate(maxes) if u in lower[m])
                family[u] = p.restrict(u, maxes[k], chosen[k])
            found.append(family)
            return
        for s in p.stalks[maxes[i]]:
            ok = fits(i, s)
            nid = trace.add(parent, maxes[i], s, ok) if trace is not None else None
            if ok:
                chosen.append(s)
                extend(i + 1, nid)
                chosen.pop()

    extend(0, None)
    return found


# --------------------------------------------------------------------------
# spectral presheaf


def _ordered_section(values: Mapping[str, int], order: Sequence[str]) -> Section:
    return tuple((n, values[n]) for n in order if n in values)


def spectral_presheaf(
    contexts: Sequence[ContextSpec],
    poset: FinitePoset | None = None,
    state: ScaledVector | None = None,
) -> FinitePresheaf:
    """Characters of each commuting observable set, restricted by function restriction.

    With a ``state`` only characters of positive Born weight are kept, which
    gives the state-dependent subpresheaf used for the GHZ argument.
    """
    ops: dict[str, PauliOp] = {}
    order: list[str] = []
    for ctx in contexts:
        for name, op in zip(ctx.names, ctx.observables):
            if name in ops and ops[name] != op:
                raise InvalidContextError(f"name {name} used for two operators")
            if name not in ops:
                ops[name] = op
                order.append(name)
    if poset is None:
        poset = context_poset([c.names for c in contexts])
    stalks: dict = {}
    for element in poset.elements:
        names = [n for n in order if n in element]
        if set(names) != set(element):
            raise InvalidContextError(f"{element_label(element)} names unknown observables")
        sub = ContextSpec(tuple(ops[n] for n in names), tuple(names))
        chars = []
        for ray in joint_eigenbasis(sub):
            sec = _ordered_section(ray.eigenvalues, names)
            if sec in chars:
                continue
            if state is not None and not born_probability(state, sub, ray.eigenvalues):
                continue
            chars.append(sec)
        stalks[element] = tuple(chars)
    return FinitePresheaf(poset, stalks)


# --------------------------------------------------------------------------
# coordinate rings over signs


@dataclass(frozen=True)
class CoordinateRing:
    """Sign-valued variables subject to ``prod(vars) = sign`` relations."""

    variables: tuple[str, ...]
    relations: tuple[tuple[tuple[str, ...], int], ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise ValueError("ring variables repeat")
        for mono, sign in self.relations:
            if not set(mono) <= known:
                raise ValueError(f"relation {mono} uses undeclared variables")
            if sign not in (1, -1):
                raise ValueError("relation signs are +1 or -1")

    def presentation(self) -> str:
        rels = ", ".join(
            "".join(m) + ("-1" if s > 0 else "+1") for m, s in self.relations
        )
        base = f"Z2[{', '.join(self.variables)}]"
        return f"{base}/({rels})" if rels else base


@dataclass(frozen=True)
class PSpecPoint:
    """A closed point: the maximal ideal ``(s - a_s)`` and its residue evaluation."""

    assignment: Section

    def value(self, monomial: str | Iterable[str]) -> int:
        if isinstance(monomial, str):
            monomial = (monomial,)
        values = dict(self.assignment)
        out = 1
        for v in monomial:
            out *= values[v]
        return out

    def ideal(self) -> str:
        gens = [f"{n}{'-1' if a > 0 else '+1'}" for n, a in self.assignment]
        return "(" + ", ".join(gens) + ")"


def pspec_points(ring: CoordinateRing) -> list[PSpecPoint]:
    if len(ring.variables) > MAX_RING_VARIABLES:
        raise ValueError(f"{len(ring.variables)} variables exceeds {MAX_RING_VARIABLES}")
    out = []
    for values in product((1, -1), repeat=len(ring.variables)):
        point = PSpecPoint(tuple(zip(ring.variables, values)))
        if all(point.value(m) == s for m, s in ring.relations):
            out.append(point)
    return out


def pspec_functor_points(rings: Mapping[Hashable, CoordinateRing], poset: FinitePoset) -> list[dict]:
    """Families of closed points agreeing along the order (variable inclusion)."""
    for u, v in poset.leq_pairs:
        if not set(rings[u].variables) <= set(rings[v].variables):
            raise VariableInclusionError(
                f"{element_label(u)} <= {element_label(v)} but variables are not included"
            )

    def restrict(u, v, section: Section) -> Section:
        keep = set(rings[u].variables)
        return tuple((n, x) for n, x in section if n in keep)

    stalks = {e: tuple(pt.assignment for pt in pspec_points(rings[e])) for e in poset.elements}
    families = global_sections(FinitePresheaf(poset, stalks, restrict))
    return [{e: PSpecPoint(s) for e, s in fam.items()} for fam in families]


def rings_from_system(system, poset: FinitePoset | None = None) -> tuple[dict, FinitePoset]:
    """One ring per row's context, singletons for the shared observables.

    ``system`` is a :class:`contextus.parity.ValuationSystem` whose rows
    each live in a single context.
    """
    contexts: list[frozenset[str]] = []
    relations: dict[frozenset[str], list] = {}
    for row in system.rows:
        key = frozenset(row.scope)
        if key not in contexts:
            contexts.append(key)
        relations.setdefault(key, []).append((row.terms, row.sign))
    if poset is None:
        poset = context_poset(contexts)
    order = list(system.variables)
    rings = {}
    for e in poset.elements:
        names = tuple(n for n in order if n in e)
        rels = tuple(relations.get(e, ()))
        rings[e] = CoordinateRing(names, rels, element_label(e))
    return rings, poset


# --------------------------------------------------------------------------
# DOT export


def _dot_id(x) -> str:
    return '"' + element_label(x).replace('"', r"\"") + '"'


def poset_to_dot(poset: FinitePoset, name: str = "poset") -> str:
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for e in poset.elements:
        lines.append(f"  {_dot_id(e)};")
    for a, b in poset.hasse_edges():
        lines.append(f"  {_dot_id(a)} -> {_dot_id(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def search_tree_to_dot(trace: SearchTrace, name: str = "search") -> str:
    lines = [f"digraph {name} {{", '  root [label="start"];']
    for node in trace.nodes:
        sec = " ".join(f"{n}{'+' if v > 0 else '-'}" for n, v in node.section)
        colour = "black" if node.accepted else "red"
        label = f"{element_label(node.element)}\\n{sec}"
        lines.append(f'  n{node.node_id} [label="{label}", color={colour}];')
        parent = "root" if node.parent is None else f"n{node.parent}"
        lines.append(f"  {parent} -> n{node.node_id};")
    lines.append("}")
    return "\n".join(lines) + "\n"
