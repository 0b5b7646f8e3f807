from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from contextus.exactkernel import GaussianRational, exact_rank
from contextus.hilbert import (
    ContextSpec,
    InvalidContextError,
    apply_pauli,
    basis_state,
    born_probability,
    context_distribution,
    eigenvalue,
    generated_algebra_dimension,
    ghz_state,
    inner,
    joint_eigenbasis,
    spectral_projector,
    stabilised_state,
    to_matrix,
)
from contextus.parity import ghz_contexts, pentagram_contexts, pentagram_observables
from contextus.pauli import PauliOp, parse_pauli, subgroup_generate

letters3 = st.text(alphabet="IXYZ", min_size=3, max_size=3)


def test_single_qubit_matrices():
    i = GaussianRational(0, 1)
    y = to_matrix(parse_pauli("Y"))
    assert y[0, 1] == -i and y[1, 0] == i
    assert to_matrix(parse_pauli("Z"))[1, 1] == -1


def test_qubit_one_is_most_significant():
    # X on qubit 1 flips the leading bit of the basis label
    v = apply_pauli(parse_pauli("XII"), basis_state("000").coords)
    assert v == list(basis_state("100").coords)


@given(letters3)
def test_apply_pauli_matches_matrix(letters):
    p = parse_pauli(letters)
    v = ghz_state(3).coords
    assert tuple(apply_pauli(p, v)) == to_matrix(p).apply(v)


def test_invalid_context():
    with pytest.raises(InvalidContextError):
        ContextSpec.parse(["X", "Z"])
    with pytest.raises(InvalidContextError):
        ContextSpec((PauliOp(1, 1, 1, 0),))  # XZ = -iY squares to -1


def test_eigenbasis_sizes_for_pentagram():
    for ctx in pentagram_contexts():
        rays = joint_eigenbasis(ctx)
        assert len(rays) == 8
        assert not any(r.degenerate for r in rays)
        for a in rays:
            for b in rays:
                if a is not b:
                    assert not inner(a.vector.coords, b.vector.coords)


def test_degenerate_context_flagged():
    rays = joint_eigenbasis(ContextSpec.parse(["ZI"]))
    assert len(rays) == 4 and all(r.degenerate for r in rays)


def test_eigenvectors_have_claimed_eigenvalues():
    ctx = pentagram_contexts()[4]
    for ray in joint_eigenbasis(ctx):
        for name, obs in zip(ctx.names, ctx.observables):
            assert eigenvalue(ray.vector, obs) == ray.eigenvalues[name]


def test_projector_oracle_matches_born():
    state = ghz_state(3)
    for ctx in ghz_contexts("Y"):
        for signs in product((1, -1), repeat=3):
            proj = spectral_projector(ctx, signs)
            assert proj @ proj == proj
            pv = proj.apply(state.coords)
            expected = inner(state.coords, pv).re / state.coord_norm2()
            assert born_probability(state, ctx, signs) == expected


def test_ghz_distributions_sum_to_one():
    for ctx in ghz_contexts("Y"):
        dist = context_distribution(ghz_state(3), ctx)
        assert sum(dist.values()) == 1
        assert set(dist.values()) <= {Fraction(0), Fraction(1, 4)}


def test_ghz_eigenvalues():
    g = ghz_state(3)
    assert eigenvalue(g, parse_pauli("XXX")) == 1
    assert eigenvalue(g, parse_pauli("XYY")) == -1
    assert eigenvalue(g, parse_pauli("XZZ")) is None


def test_stabilised_state_is_ghz_ray():
    s = stabilised_state([parse_pauli(t) for t in ("XXX", "-XYY", "-YXY")])
    assert s.same_ray(ghz_state(3))
    assert stabilised_state([parse_pauli("X"), parse_pauli("-X")]) is None


def _matrix_rank_oracle(ops):
    group = subgroup_generate(ops)
    return exact_rank([to_matrix(p).flatten() for p in group])


def test_algebra_dimension_matches_rank_oracle():
    obs = pentagram_observables()
    assert generated_algebra_dimension(obs) == 64 == _matrix_rank_oracle(obs)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.text(alphabet="IXYZ", min_size=2, max_size=2), min_size=1, max_size=3))
def test_algebra_dimension_random(texts):
    ops = [parse_pauli(t) for t in texts]
    assert generated_algebra_dimension(ops) == _matrix_rank_oracle(ops)
