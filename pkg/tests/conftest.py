from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest

from contextus.hilbert import ExactMatrix, to_matrix
from contextus.exactkernel import GaussianRational


def solve_square(cols, b):
    """Unique solution of [cols] x = b, or None when singular/inconsistent."""
    m, k = len(b), len(cols)
    aug = [[cols[j][i] for j in range(k)] + [b[i]] for i in range(m)]
    r = 0
    piv = []
    for c in range(k):
        p = next((i for i in range(r, m) if aug[i][c]), None)
        if p is None:
            return None
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * bb for a, bb in zip(aug[i], aug[r])]
        piv.append(c)
        r += 1
    if any(aug[i][-1] for i in range(r, m)):
        return None
    return [aug[i][-1] for i in range(k)]


def vertex_enumeration_feasible(rows, nvars):
    """Ax = b, x >= 0 is feasible iff some basic solution is nonnegative."""
    a = [[Fraction(c) for c in coeffs] for coeffs, _ in rows]
    b = [Fraction(r) for _, r in rows]
    if all(v == 0 for v in b):
        return True
    cols = [[a[i][j] for i in range(len(a))] for j in range(nvars)]
    for size in range(1, min(nvars, len(b)) + 1):
        for s in combinations(range(nvars), size):
            x = solve_square([cols[j] for j in s], b)
            if x is not None and all(v >= 0 for v in x):
                return True
    return False


def pauli_matrix_with_phase(p) -> ExactMatrix:
    return to_matrix(p)


@pytest.fixture
def i_unit():
    return GaussianRational(0, 1)


# acceptance results, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
