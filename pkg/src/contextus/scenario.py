"""Measurement scenarios, empirical models and the contextuality hierarchy.

Outcomes are +1/-1 throughout.  A *section* over a set of observables is a
tuple of ``(name, value)`` pairs listed in the cover's observable order, so
sections are hashable and restriction is a filter.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exactkernel import LpResult, check_witness, lp_feasible, rational
from .hilbert import (
    ContextSpec,
    NotStabilisedError,
    ScaledVector,
    eigenvalue,
    empirical_model_from_state,
    ghz_state,
    stabilised_state,
)
from .parity import ValuationReport, avn_system, ghz_contexts, solve
from .pauli import AvnVerdict, PauliOp, is_avn_triple, subgroup_generate

Section = tuple[tuple[str, int], ...]
OUTCOMES = (1, -1)
MAX_GLOBAL_OBSERVABLES = 16

_SIGN_CHARS = {"+": 1, "-": -1, "−": -1}


class ScenarioError(ValueError):
    """Malformed scenario data; carries a position when one is known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


class SignallingError(ValueError):
    """Operation needs a no-signalling model; run check_no_signalling first."""


def format_assignment(values: Iterable[int]) -> str:
    return "".join("+" if v > 0 else "-" for v in values)


def parse_assignment(key: str, width: int) -> tuple[int, ...]:
    try:
        values = tuple(_SIGN_CHARS[ch] for ch in key)
    except KeyError as exc:
        raise ScenarioError(f"assignment key {key!r} has a character outside +/-") from exc
    if len(values) != width:
        raise ScenarioError(f"assignment key {key!r} has length {len(values)}, context has {width}")
    return values


def format_section(section: Section) -> str:
    return ", ".join(f"{n}={'+' if v > 0 else '-'}" for n, v in section)


# --------------------------------------------------------------------------
# covers and models


@dataclass(frozen=True)
class MeasurementCover:
    observables: tuple[str, ...]
    contexts: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        obs = tuple(self.observables)
        ctxs = tuple(tuple(c) for c in self.contexts)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "contexts", ctxs)
        if len(set(obs)) != len(obs):
            raise ScenarioError("observable names repeat")
        known = set(obs)
        for i, c in enumerate(ctxs):
            if not c:
                raise ScenarioError(f"context {i} is empty")
            if len(set(c)) != len(c):
                raise ScenarioError(f"context {i} repeats an observable")
            unknown = set(c) - known
            if unknown:
                raise ScenarioError(f"context {i} uses undeclared observables {sorted(unknown)}")
        covered = set().union(*map(set, ctxs)) if ctxs else set()
        if covered != known:
            raise ScenarioError(f"contexts do not cover {sorted(known - covered)}")

    @property
    def maximal(self) -> tuple[bool, ...]:
        sets = [set(c) for c in self.contexts]
        return tuple(
            not any(i != j and s < t for j, t in enumerate(sets)) for i, s in enumerate(sets)
        )

    def order(self, names: Iterable[str]) -> tuple[str, ...]:
        names = set(names)
        return tuple(o for o in self.observables if o in names)


def restrict(section: Section, names: Iterable[str]) -> Section:
    keep = set(names)
    return tuple((n, v) for n, v in section if n in keep)


@dataclass(frozen=True)
class EmpiricalModel:
    cover: MeasurementCover
    tables: tuple[dict[tuple[int, ...], Fraction], ...]

    def __post_init__(self) -> None:
        if len(self.tables) != len(self.cover.contexts):
            raise ScenarioError("one table per context required")
        full = []
        for i, (ctx, table) in enumerate(zip(self.cover.contexts, self.tables)):
            t = {a: Fraction(0) for a in product(OUTCOMES, repeat=len(ctx))}
            for a, p in table.items():
                a = tuple(a)
                if a not in t:
                    raise ScenarioError(f"context {i}: bad assignment {a}")
                p = rational(p)
                if p < 0:
                    raise ScenarioError(f"context {i}: negative probability at {format_assignment(a)}")
                t[a] = p
            total = sum(t.values(), Fraction(0))
            if total != 1:
                raise ScenarioError(f"context {i}: probabilities sum to {total}, not 1")
            full.append(t)
        object.__setattr__(self, "tables", tuple(full))

    def context_sections(self, i: int) -> list[tuple[Section, Fraction]]:
        ctx = self.cover.contexts[i]
        return [(tuple(zip(ctx, a)), p) for a, p in self.tables[i].items()]

    def marginal(self, i: int, names: Sequence[str]) -> dict[Section, Fraction]:
        """Marginal of context ``i``'s table on ``names`` (ordered by the cover)."""
        names = self.cover.order(names)
        out: dict[Section, Fraction] = {}
        for sec, p in self.context_sections(i):
            key = restrict(sec, names)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def support(self, i: int) -> list[Section]:
        return [sec for sec, p in self.context_sections(i) if p]

    def support_pattern(self) -> list[list[int]]:
        """Per context, 1/0 for each assignment in ``+...+`` to ``-...-`` order."""
        return [
            [1 if self.tables[i][a] else 0 for a in product(OUTCOMES, repeat=len(c))]
            for i, c in enumerate(self.cover.contexts)
        ]


# --------------------------------------------------------------------------
# no-signalling


@dataclass(frozen=True)
class Violation:
    context_a: int
    context_b: int
    overlap: tuple[str, ...]
    assignment: Section
    marginals: tuple[Fraction, Fraction]

    def __str__(self) -> str:
        return (
            f"C{self.context_a + 1} vs C{self.context_b + 1} on {{{', '.join(self.overlap)}}}"
            f" at {format_section(self.assignment)}: {self.marginals[0]} != {self.marginals[1]}"
        )


@dataclass(frozen=True)
class NoSignallingResult:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def check_no_signalling(e: EmpiricalModel) -> NoSignallingResult:
    """Compare marginals of every pair of contexts on their overlap."""
    out = []
    ctxs = e.cover.contexts
    for a, b in combinations(range(len(ctxs)), 2):
        overlap = e.cover.order(set(ctxs[a]) & set(ctxs[b]))
        if not overlap:
            continue
        ma, mb = e.marginal(a, overlap), e.marginal(b, overlap)
        for values in product(OUTCOMES, repeat=len(overlap)):
            key = tuple(zip(overlap, values))
            pa, pb = ma.get(key, Fraction(0)), mb.get(key, Fraction(0))
            if pa != pb:
                out.append(Violation(a, b, overlap, key, (pa, pb)))
    return NoSignallingResult(tuple(out))


# --------------------------------------------------------------------------
# support presheaf


@dataclass(frozen=True)
class SupportPresheaf:
    cover: MeasurementCover
    sections: dict[frozenset[str], frozenset[Section]]
    context_support: tuple[frozenset[Section], ...]

    def at(self, names: Iterable[str]) -> frozenset[Section]:
        key = frozenset(names)
        if key in self.sections:
            return self.sections[key]
        if key == frozenset(self.cover.observables):
            return frozenset(self.global_sections())
        raise KeyError(f"{sorted(key)} is not inside any context")

    def global_sections(self, skip: Iterable[int] = ()) -> list[Section]:
        """Families over the whole cover that restrict into every context's support.

        Contexts listed in ``skip`` are ignored, which is how the
        elimination trace finds candidates that only one context kills.
        """
        obs = self.cover.observables
        if len(obs) > MAX_GLOBAL_OBSERVABLES:
            raise ValueError(f"{len(obs)} observables is beyond exhaustive search")
        skip = set(skip)
        position = {o: k for k, o in enumerate(obs)}
        # check each context once its last observable is assigned
        due: dict[int, list[int]] = {}
        for i, ctx in enumerate(self.cover.contexts):
            if i not in skip:
                due.setdefault(max(position[o] for o in ctx), []).append(i)
        found: list[Section] = []
        current: list[int] = []

        def extend(k: int) -> None:
            if k == len(obs):
                found.append(tuple(zip(obs, current)))
                return
            for v in OUTCOMES:
                current.append(v)
                ok = True
                for i in due.get(k, ()):
                    ctx = self.cover.contexts[i]
                    sec = tuple((o, current[position[o]]) for o in self.cover.order(ctx))
                    if sec not in self.context_support[i]:
                        ok = False
                        break
                if ok:
                    extend(k + 1)
                current.pop()

        extend(0)
        return found

    def is_restriction_closed(self) -> bool:
        for names, secs in self.sections.items():
            for sub_size in range(len(names)):
                for sub in combinations(sorted(names), sub_size):
                    lower = self.sections[frozenset(sub)]
                    if any(restrict(s, sub) not in lower for s in secs):
                        return False
        return True


def support_presheaf(e: EmpiricalModel) -> SupportPresheaf:
    ns = check_no_signalling(e)
    if not ns.ok:
        raise SignallingError("model signals; see check_no_signalling for the violations")
    sections: dict[frozenset[str], set[Section]] = {}
    ctx_support = []
    for i, ctx in enumerate(e.cover.contexts):
        supp = e.support(i)
        ordered = [tuple(sorted(s, key=lambda nv: e.cover.observables.index(nv[0]))) for s in supp]
        ctx_support.append(frozenset(ordered))
        for size in range(len(ctx) + 1):
            for sub in combinations(ctx, size):
                key = frozenset(sub)
                bucket = sections.setdefault(key, set())
                names = e.cover.order(sub)
                for s in ordered:
                    bucket.add(restrict(s, names))
    frozen = {k: frozenset(v) for k, v in sections.items()}
    return SupportPresheaf(e.cover, frozen, tuple(ctx_support))


# --------------------------------------------------------------------------
# classification

LEVELS = ("noncontextual", "probabilistic", "possibilistic", "strong")


@dataclass(frozen=True)
class ContextualityClass:
    level: str
    global_distribution: dict[Section, Fraction] | None = None
    non_extendable: tuple[int, Section] | None = None
    elimination: dict[int, tuple[Section, ...]] = field(default_factory=dict)
    global_support: tuple[Section, ...] = ()

    @property
    def verdict(self) -> str:
        return self.level.upper()

    @property
    def strong(self) -> bool:
        return self.level == "strong"

    @property
    def possibilistic(self) -> bool:
        return self.level in ("possibilistic", "strong")

    @property
    def probabilistic(self) -> bool:
        return self.level != "noncontextual"


def marginal_system(
    e: EmpiricalModel, globals_: Sequence[Section] | None = None
) -> tuple[list[tuple[list[Fraction], Fraction]], list[Section]]:
    """Equalities saying a distribution on ``globals_`` reproduces every table.

    ``globals_`` defaults to all ``2**|X|`` global assignments.
    """
    obs = e.cover.observables
    if globals_ is None:
        globals_ = [tuple(zip(obs, vals)) for vals in product(OUTCOMES, repeat=len(obs))]
    globals_ = list(globals_)
    rows = []
    for i, ctx in enumerate(e.cover.contexts):
        names = e.cover.order(ctx)
        index: dict[Section, list[int]] = {}
        for g, sec in enumerate(globals_):
            index.setdefault(restrict(sec, names), []).append(g)
        for a, p in e.tables[i].items():
            key = tuple(sorted(zip(ctx, a), key=lambda nv: names.index(nv[0])))
            hits = index.get(key, [])
            if not hits and not p:
                continue
            coeffs = [Fraction(0)] * len(globals_)
            for g in hits:
                coeffs[g] = Fraction(1)
            rows.append((coeffs, p))
    return rows, globals_


def classify(e: EmpiricalModel) -> ContextualityClass:
    """Place the model on the noncontextual < probabilistic < possibilistic < strong chain."""
    sp = support_presheaf(e)
    glob = sp.global_sections()
    if not glob:
        trace = {
            k: tuple(sp.global_sections(skip=[k])) for k in range(len(e.cover.contexts))
        }
        return ContextualityClass("strong", elimination=trace)

    extendable = [
        {restrict(g, e.cover.order(ctx)) for g in glob} for ctx in e.cover.contexts
    ]
    for i in range(len(e.cover.contexts)):
        for sec in sorted(sp.context_support[i]):
            if sec not in extendable[i]:
                return ContextualityClass(
                    "possibilistic", non_extendable=(i, sec), global_support=tuple(glob)
                )

    # a global distribution can only weight sections in S_e(X)
    rows, cols = marginal_system(e, glob)
    lp: LpResult = lp_feasible(rows, len(cols))
    if not lp.feasible:
        return ContextualityClass("probabilistic", global_support=tuple(glob))
    assert lp.witness is not None and check_witness(rows, lp.witness)
    dist = {sec: w for sec, w in zip(cols, lp.witness) if w}
    return ContextualityClass("noncontextual", global_distribution=dist, global_support=tuple(glob))


def witness_reproduces(e: EmpiricalModel, dist: Mapping[Section, Fraction]) -> bool:
    """Marginalising a global distribution gives back every context table."""
    for i, ctx in enumerate(e.cover.contexts):
        names = e.cover.order(ctx)
        got: dict[Section, Fraction] = {}
        for sec, w in dist.items():
            key = restrict(sec, names)
            got[key] = got.get(key, Fraction(0)) + w
        for sec, p in e.context_sections(i):
            key = tuple(sorted(sec, key=lambda nv: names.index(nv[0])))
            if got.get(key, Fraction(0)) != p:
                return False
    return True


# --------------------------------------------------------------------------
# built-in models


def ghz_model() -> EmpiricalModel:
    """Born-rule model of the GHZ state on the four Y-form contexts."""
    order = ("X1", "X2", "X3", "Y1", "Y2", "Y3")
    return empirical_model_from_state(ghz_state(3), ghz_contexts("Y"), order)


def pr_box_model() -> EmpiricalModel:
    """Two parties, two +-1 observables each, outcomes XOR to x AND y."""
    obs = ("a0", "a1", "b0", "b1")
    contexts = []
    tables = []
    for x in (0, 1):
        for y in (0, 1):
            contexts.append((f"a{x}", f"b{y}"))
            table = {}
            for a, b in product(OUTCOMES, repeat=2):
                abit, bbit = a < 0, b < 0
                table[(a, b)] = Fraction(1, 2) if (abit ^ bbit) == (x & y) else Fraction(0)
            tables.append(table)
    return EmpiricalModel(MeasurementCover(obs, tuple(contexts)), tuple(tables))


def shared_coin_model() -> EmpiricalModel:
    """Both contexts read copies of one fair coin."""
    cover = MeasurementCover(("A", "B", "C"), (("A", "B"), ("B", "C")))
    copy = {(1, 1): Fraction(1, 2), (-1, -1): Fraction(1, 2)}
    return EmpiricalModel(cover, (dict(copy), dict(copy)))


# --------------------------------------------------------------------------
# scenario files


def model_to_json(e: EmpiricalModel) -> dict:
    return {
        "observables": list(e.cover.observables),
        "contexts": [list(c) for c in e.cover.contexts],
        "model": [
            {
                "context": i,
                "rows": {format_assignment(a): str(p) for a, p in table.items()},
            }
            for i, table in enumerate(e.tables)
        ],
    }


def dumps_model(e: EmpiricalModel) -> str:
    return json.dumps(model_to_json(e), indent=2, ensure_ascii=False) + "\n"


def model_from_json(doc: object) -> EmpiricalModel:
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    for key in ("observables", "contexts", "model"):
        if key not in doc:
            raise ScenarioError(f"missing key {key!r}")
    obs = doc["observables"]
    ctxs = doc["contexts"]
    if not isinstance(obs, list) or not all(isinstance(o, str) for o in obs):
        raise ScenarioError("'observables' must be a list of strings")
    if not isinstance(ctxs, list) or not all(isinstance(c, list) for c in ctxs):
        raise ScenarioError("'contexts' must be a list of lists")
    cover = MeasurementCover(tuple(obs), tuple(tuple(c) for c in ctxs))
    tables: list[dict | None] = [None] * len(cover.contexts)
    entries = doc["model"]
    if not isinstance(entries, list):
        raise ScenarioError("'model' must be a list")
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or "context" not in entry or "rows" not in entry:
            raise ScenarioError(f"model[{k}] needs 'context' and 'rows'")
        c = entry["context"]
        if not isinstance(c, int) or not 0 <= c < len(cover.contexts):
            raise ScenarioError(f"model[{k}].context {c!r} is not a context index")
        if tables[c] is not None:
            raise ScenarioError(f"model[{k}]: context {c} given twice")
        rows = entry["rows"]
        if not isinstance(rows, dict):
            raise ScenarioError(f"model[{k}].rows must be an object")
        table = {}
        for key, value in rows.items():
            if not isinstance(value, str):
                raise ScenarioError(f"model[{k}].rows[{key!r}] must be a rational string")
            try:
                table[parse_assignment(key, len(cover.contexts[c]))] = rational(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise ScenarioError(f"model[{k}].rows[{key!r}]: {exc}") from exc
        tables[c] = table
    missing = [i for i, t in enumerate(tables) if t is None]
    if missing:
        raise ScenarioError(f"no table for contexts {missing}")
    return EmpiricalModel(cover, tuple(tables))


def loads_model(text: str) -> EmpiricalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, exc.lineno, exc.colno) from exc
    return model_from_json(doc)


def load_model(path: str | Path) -> EmpiricalModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# all-versus-nothing end to end


@dataclass(frozen=True)
class AvnReport:
    generators: tuple[PauliOp, ...]
    triple: AvnVerdict | None
    signed_generators: tuple[PauliOp, ...]
    subgroup: tuple[PauliOp, ...]
    parity: ValuationReport
    model: EmpiricalModel | None
    classification: ContextualityClass | None

    @property
    def avn(self) -> bool:
        return (
            not self.parity.consistent
            and self.classification is not None
            and self.classification.strong
        )


def _local_contexts(subgroup: Sequence[PauliOp]) -> list[ContextSpec]:
    sets = []
    for op in subgroup:
        if op.is_identity_up_to_phase():
            continue
        local = tuple((j, op.letter(j)) for j in op.support)
        if local not in sets:
            sets.append(local)
    maximal = [s for s in sets if not any(set(s) < set(t) for t in sets)]
    maximal.sort(key=lambda s: (-len(s), s))
    n = subgroup[0].n
    return [ContextSpec(tuple(PauliOp.single(n, j + 1, L) for j, L in s)) for s in maximal]


def avn_check(
    gens: Sequence[PauliOp], state: ScaledVector | None = None, require_triple: bool = True
) -> AvnReport:
    """Parity system plus empirical model for the group generated by ``gens``.

    Without a state, a common +1 eigenvector is computed.  A given state
    must be a common eigenvector; generators it sees with eigenvalue -1 are
    negated before the group is formed.
    """
    gens = tuple(gens)
    triple = None
    if len(gens) == 3:
        triple = is_avn_triple(*gens)
    if require_triple and (triple is None or not triple.is_triple):
        reason = triple.reason if triple is not None else f"{len(gens)} generators given"
        raise ValueError(f"not an AvN triple: {reason}")
    if state is None:
        state = stabilised_state(list(gens))
        if state is None:
            raise NotStabilisedError("the generated group contains -1; no state is stabilised")
    signed = []
    for g in gens:
        ev = eigenvalue(state, g)
        if ev is None:
            raise NotStabilisedError(f"state is not an eigenvector of {g}")
        signed.append(g if ev > 0 else g.negate())
    group = tuple(subgroup_generate(signed))
    parity = solve(avn_system(group))
    contexts = _local_contexts(group)
    model = cls = None
    if contexts:
        model = empirical_model_from_state(state, contexts)
        cls = classify(model)
    return AvnReport(gens, triple, tuple(signed), group, parity, model, cls)
