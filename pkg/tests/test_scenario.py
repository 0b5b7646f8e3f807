from __future__ import annotations

import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from contextus.exactkernel import lp_feasible
from contextus.hilbert import ghz_state
from contextus.pauli import parse_pauli
from contextus.scenario import (
    EmpiricalModel,
    MeasurementCover,
    ScenarioError,
    SignallingError,
    avn_check,
    check_no_signalling,
    classify,
    dumps_model,
    ghz_model,
    loads_model,
    marginal_system,
    parse_assignment,
    pr_box_model,
    shared_coin_model,
    support_presheaf,
    witness_reproduces,
)

# rows C1..C4, columns +++ ... ---
GHZ_TABLE = [
    [1, 0, 0, 1, 0, 1, 1, 0],
    [0, 1, 1, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 1, 0, 0, 1],
]
CANDIDATES = ("++-++-", "+-++-+", "-++-++", "------")
CHSH_COVER = MeasurementCover(("a0", "a1", "b0", "b1"), (("a0", "b0"), ("a0", "b1"), ("a1", "b0"), ("a1", "b1")))


def _mix(*weighted):
    tables = []
    for i in range(4):
        t = {}
        for w, model in weighted:
            for a, p in model.tables[i].items():
                t[a] = t.get(a, Fraction(0)) + w * p
        tables.append(t)
    return EmpiricalModel(CHSH_COVER, tuple(tables))


def _uniform():
    return EmpiricalModel(CHSH_COVER, tuple({a: Fraction(1, 4) for a in product((1, -1), repeat=2)} for _ in range(4)))


def _all_plus():
    return EmpiricalModel(CHSH_COVER, tuple({(1, 1): Fraction(1)} for _ in range(4)))


def test_parse_assignment_accepts_unicode_minus():
    assert parse_assignment("+−-", 3) == (1, -1, -1)
    with pytest.raises(ScenarioError):
        parse_assignment("+x", 2)


def test_cover_validation():
    with pytest.raises(ScenarioError):
        MeasurementCover(("A", "B"), (("A",),))
    with pytest.raises(ScenarioError):
        MeasurementCover(("A",), (("A", "B"),))


def test_table_must_sum_to_one():
    cover = MeasurementCover(("A",), (("A",),))
    with pytest.raises(ScenarioError):
        EmpiricalModel(cover, ({(1,): Fraction(1, 2)},))


def test_ghz_support_table_and_weights():
    e = ghz_model()
    assert e.support_pattern() == GHZ_TABLE
    for table in e.tables:
        assert {p for p in table.values() if p} == {Fraction(1, 4)}


def test_ghz_no_signalling_and_strong():
    e = ghz_model()
    assert check_no_signalling(e).ok
    cls = classify(e)
    assert cls.verdict == "STRONG"
    order = e.cover.observables
    without_c1 = {"".join("+" if v > 0 else "-" for _, v in s) for s in cls.elimination[0]}
    assert set(CANDIDATES) <= without_c1
    sp = support_presheaf(e)
    for s in cls.elimination[0]:
        c1 = tuple(x for x in s if x[0] in ("X1", "X2", "X3"))
        assert c1 not in sp.context_support[0]
    assert order == ("X1", "X2", "X3", "Y1", "Y2", "Y3")


def test_ghz_full_lp_is_infeasible():
    rows, cols = marginal_system(ghz_model())
    assert len(cols) == 64
    assert not lp_feasible(rows, len(cols)).feasible


def test_pr_box_strong():
    assert classify(pr_box_model()).verdict == "STRONG"


def test_shared_coin_noncontextual_with_witness():
    e = shared_coin_model()
    cls = classify(e)
    assert cls.verdict == "NONCONTEXTUAL"
    assert witness_reproduces(e, cls.global_distribution)
    assert sorted(cls.global_distribution.values()) == [Fraction(1, 2)] * 2


def test_possibilistic_mixture():
    e = _mix((Fraction(1, 2), pr_box_model()), (Fraction(1, 2), _all_plus()))
    cls = classify(e)
    assert cls.verdict == "POSSIBILISTIC"
    i, sec = cls.non_extendable
    assert sec not in {tuple(x for x in g if x[0] in e.cover.contexts[i]) for g in cls.global_support}


def test_probabilistic_noisy_pr_box():
    e = _mix((Fraction(3, 4), pr_box_model()), (Fraction(1, 4), _uniform()))
    assert all(all(t.values()) for t in e.tables)  # full support
    assert classify(e).verdict == "PROBABILISTIC"


def test_local_noise_threshold_is_noncontextual():
    e = _mix((Fraction(1, 2), pr_box_model()), (Fraction(1, 2), _uniform()))
    cls = classify(e)
    assert cls.verdict == "NONCONTEXTUAL"
    assert witness_reproduces(e, cls.global_distribution)


def _deterministic_mixture(weights):
    obs = CHSH_COVER.observables
    tables = [dict() for _ in CHSH_COVER.contexts]
    total = sum(weights)
    for g, w in zip(product((1, -1), repeat=4), weights):
        val = dict(zip(obs, g))
        for i, ctx in enumerate(CHSH_COVER.contexts):
            a = tuple(val[o] for o in ctx)
            tables[i][a] = tables[i].get(a, Fraction(0)) + Fraction(w, total)
    return EmpiricalModel(CHSH_COVER, tuple(tables))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=16, max_size=16).filter(any))
def test_mixtures_of_global_assignments_are_noncontextual(weights):
    e = _deterministic_mixture(weights)
    assert check_no_signalling(e).ok
    cls = classify(e)
    assert cls.verdict == "NONCONTEXTUAL"
    assert witness_reproduces(e, cls.global_distribution)


def test_signalling_detected():
    cover = MeasurementCover(("A", "B", "C"), (("A", "B"), ("B", "C")))
    e = EmpiricalModel(cover, ({(1, 1): Fraction(1)}, {(-1, 1): Fraction(1)}))
    res = check_no_signalling(e)
    assert not res.ok and res.violations[0].overlap == ("B",)
    with pytest.raises(SignallingError):
        support_presheaf(e)


def test_support_presheaf_restriction_closed():
    assert support_presheaf(ghz_model()).is_restriction_closed()


def test_json_roundtrip():
    e = ghz_model()
    again = loads_model(dumps_model(e))
    assert again == e


def test_json_errors_carry_position():
    with pytest.raises(ScenarioError) as exc:
        loads_model('{"observables": [\n  "A",\n}')
    assert exc.value.line == 3
    with pytest.raises(ScenarioError):
        loads_model(json.dumps({"observables": ["A"], "contexts": [["A"]], "model": []}))


def test_avn_check_with_ghz_state():
    gens = [parse_pauli(t) for t in ("XXX", "XYY", "YXY")]
    rep = avn_check(gens, ghz_state(3))
    assert rep.avn
    assert [str(g) for g in rep.signed_generators] == ["XXX", "-XYY", "-YXY"]


def test_avn_check_rejects_non_triple():
    with pytest.raises(ValueError):
        avn_check([parse_pauli(t) for t in ("ZZI", "IZZ", "ZIZ")])
