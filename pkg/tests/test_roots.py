from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from contextus.hilbert import ContextSpec
from contextus.parity import mermin_system, pentagram_contexts, solve
from contextus.roots import (
    ClosureDivergenceError,
    RootSystem,
    RootVector,
    UnsupportedContextError,
    classify_diagram,
    colouring_search,
    coxeter_graph,
    dot,
    export_roots,
    orthogonal_bases,
    orthogonality_graph,
    random_functional,
    rays_from_contexts,
    read_roots,
    reflect,
    reflection_closure,
)

GOLDEN = Path(__file__).with_name("golden")
BASIS_COUNT = 25  # frozen after the first exhaustive enumeration


@pytest.fixture(scope="module")
def rays():
    return rays_from_contexts(pentagram_contexts())


@pytest.fixture(scope="module")
def e8(rays):
    return reflection_closure(rays)


def e(i, n=8):
    return tuple(Fraction(int(k == i)) for k in range(n))


def root(*coords):
    return RootVector(tuple(Fraction(c) for c in coords))


def test_norm_enforced():
    with pytest.raises(ValueError):
        RootVector((Fraction(1),) + (Fraction(0),) * 7)


def test_ray_shapes(rays):
    assert len(rays) == 40
    ctxs = pentagram_contexts()
    # the all-X context and the product context give dense half-integer rays,
    # the three mixed contexts give rays with two +-1 entries
    for k in (0, 4):
        for r in rays_from_contexts([ctxs[k]]):
            assert {abs(c) for c in r.coords} == {Fraction(1, 2)}
    for k in (1, 2, 3):
        for r in rays_from_contexts([ctxs[k]]):
            nz = [c for c in r.coords if c]
            assert len(nz) == 2 and {abs(c) for c in nz} == {1}
    assert all(r == r.canonical() for r in rays)


def test_non_real_context_rejected():
    with pytest.raises(UnsupportedContextError):
        rays_from_contexts([ContextSpec.parse(["YII", "IZI", "IIZ"])])


def test_reflect_basics():
    a = root(1, -1, 0, 0, 0, 0, 0, 0)
    b = root(0, 0, 1, 1, 0, 0, 0, 0)
    assert reflect(a, a) == (-a).coords
    assert reflect(a, b) == b.coords
    with pytest.raises(ValueError):
        reflect((0,) * 8, b)


vecs = st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=8, max_size=8)


@given(vecs, vecs)
def test_reflection_preserves_norm(a, b):
    if not any(a):
        return
    r = reflect(a, b)
    assert dot(r, r) == dot(b, b)
    assert reflect(a, r) == tuple(Fraction(x) for x in b)


def test_closure_of_single_root():
    a = root(1, 1, 0, 0, 0, 0, 0, 0)
    assert set(reflection_closure([a]).roots) == {a, -a}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_a_n_closure(n):
    seed = []
    for i in range(n):
        seed.append(RootVector(tuple(Fraction(1 if k == i else -1 if k == i + 1 else 0) for k in range(8))))
    assert len(reflection_closure(seed)) == n * (n + 1)


def test_closure_guard():
    seed = [root(1, -1, 0, 0, 0, 0, 0, 0), root(0, 1, -1, 0, 0, 0, 0, 0)]
    with pytest.raises(ClosureDivergenceError):
        reflection_closure(seed, guard=3)


def test_e8_closure(e8):
    assert len(e8) == 240 and e8.antipodal_pairs() == 120
    assert e8.check_axioms()
    assert e8.inner_products() <= {-2, -1, 0, 1, 2}
    assert set(reflection_closure(e8.roots).roots) == set(e8.roots)


def test_e8_contains_the_standard_roots(e8):
    # integer roots +-e_i +- e_j and the half-integer roots with an even number of minus signs
    roots = set(e8.roots)
    integer = [r for r in roots if all(c.denominator == 1 for c in r.coords)]
    half = [r for r in roots if all(c.denominator == 2 for c in r.coords)]
    assert len(integer) == 112 and len(half) == 128
    assert all(sum(1 for c in r.coords if c < 0) % 2 == 0 for r in half)


def _nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(range(len(g.simple_roots)))
    G.add_edges_from((i, j, {"m": m}) for i, j, m in g.edges)
    return G


def test_coxeter_e8(e8):
    g = coxeter_graph(e8)
    assert len(g.simple_roots) == 8
    assert g.classification == "E8"
    assert g.functional == tuple(17**k for k in range(8))
    degs = sorted(g.degree(i) for i in range(8))
    assert degs == [1, 1, 1, 2, 2, 2, 2, 3]
    rng = random.Random(20240601)
    reference = _nx_graph(g)
    for _ in range(3):
        other = coxeter_graph(e8, random_functional(8, rng))
        assert other.classification == "E8"
        assert nx.is_isomorphic(reference, _nx_graph(other), edge_match=lambda a, b: a["m"] == b["m"])


def test_coxeter_small_systems():
    a2 = reflection_closure([root(1, -1, 0, 0, 0, 0, 0, 0), root(0, 1, -1, 0, 0, 0, 0, 0)])
    g = coxeter_graph(a2)
    assert g.classification == "A2" and g.edges == [(0, 1, 3)]
    pair = reflection_closure([root(1, 1, 0, 0, 0, 0, 0, 0), root(0, 0, 1, 1, 0, 0, 0, 0)])
    assert coxeter_graph(pair).classification == "A1xA1"


def test_diagram_catalogue():
    chain = lambda n, marks={}: {(i, j): (marks.get((i, j), 3) if j == i + 1 else 2) for i in range(n) for j in range(i + 1, n)}
    assert classify_diagram(4, chain(4)) == "A4"
    assert classify_diagram(3, chain(3, {(1, 2): 4})) == "B3"
    assert classify_diagram(4, chain(4, {(1, 2): 4})) == "F4"
    assert classify_diagram(2, chain(2, {(0, 1): 6})) == "G2"
    d4 = {(i, j): 2 for i in range(4) for j in range(i + 1, 4)}
    d4.update({(0, 1): 3, (0, 2): 3, (0, 3): 3})
    assert classify_diagram(4, d4) == "D4"
    e6 = {(i, j): 2 for i in range(6) for j in range(i + 1, 6)}
    e6.update({(0, 1): 3, (1, 2): 3, (2, 3): 3, (3, 4): 3, (2, 5): 3})
    assert classify_diagram(6, e6) == "E6"


def test_orthogonal_bases_against_networkx(rays):
    bases = orthogonal_bases(rays)
    adj = orthogonality_graph(rays)
    G = nx.Graph()
    G.add_nodes_from(adj)
    G.add_edges_from((i, j) for i in adj for j in adj[i] if i < j)
    oracle = sorted(tuple(sorted(c)) for c in nx.find_cliques(G) if len(c) == 8)
    assert bases == oracle
    assert len(bases) == BASIS_COUNT
    index = {r: k for k, r in enumerate(rays)}
    for ctx in pentagram_contexts():
        seed = tuple(sorted(index[r] for r in rays_from_contexts([ctx])))
        assert seed in bases


def test_basis_guard():
    with pytest.raises(ValueError):
        orthogonal_bases([root(1, 1, 0, 0, 0, 0, 0, 0)] * 65)


def test_single_orthogonal_frame():
    frame = [root(*(1 if k in (2 * i, 2 * i + 1) else 0 for k in range(8))) for i in range(4)]
    frame += [root(*(1 if k == 2 * i else -1 if k == 2 * i + 1 else 0 for k in range(8))) for i in range(4)]
    assert orthogonal_bases(frame) == [tuple(range(8))]


def test_colouring_infeasible(rays):
    res = colouring_search(len(rays), orthogonal_bases(rays))
    assert not res.feasible and res.verdict == "INFEASIBLE"
    assert res.nodes > 0 and res.conflict
    # the parity face is inconsistent too
    assert not solve(mermin_system()).consistent


def test_colouring_disjoint_bases(rays):
    index = {r: k for k, r in enumerate(rays)}
    seeds = [tuple(index[r] for r in rays_from_contexts([c])) for c in pentagram_contexts()]
    res = colouring_search(len(rays), seeds, find_all=True)
    assert res.feasible and res.count == 8**5
    for b in seeds:
        assert sum(res.colouring[r] for r in b) == 1


def test_colouring_one_basis():
    assert colouring_search(8, [tuple(range(8))], find_all=True).count == 8


def test_export_golden(e8, tmp_path):
    text = export_roots(e8)
    assert text == (GOLDEN / "roots.txt").read_text(encoding="utf-8")
    assert len(text.splitlines()) == 240
    path = tmp_path / "roots.txt"
    path.write_text(text)
    assert set(read_roots(path).roots) == set(e8.roots)
