"""Shared fixtures and independent test oracles.

The hull-membership oracle here deliberately avoids the library's polytope
code: it decides p in conv(V) by Caratheodory enumeration with
fractions.Fraction arithmetic, so polytope tests compare two unrelated
exact implementations.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from exactsos import Polynomial
from exactsos.polytope import degree_simplex_points
from exactsos.rational import pow2
from gmpy2 import mpq

SEC2_TEXT = "4*X1^4 + 4*X1^3*X2 - 7*X1^2*X2^2 - 2*X1*X2^3 + 10*X2^4"


@pytest.fixture
def sec2_poly():
    from exactsos import parse

    return parse(SEC2_TEXT, 2)


def motzkin():
    return Polynomial(
        3, {(4, 2, 0): 1, (2, 4, 0): 1, (2, 2, 2): -3, (0, 0, 6): 1}
    )


def perturbed_motzkin(bits):
    c = 1 + pow2(-bits)
    return Polynomial(
        3, {(4, 2, 0): c, (2, 4, 0): c, (2, 2, 2): mpq(-3), (0, 0, 6): c}
    )


def random_interior_poly(n, rng, squares=3, eps_bits=5):
    """f = sum of `squares` random squares of degree <= 2 plus 2^-eps_bits * t."""
    basis = degree_simplex_points(n, 2).points
    f = Polynomial.zero(n)
    for _ in range(squares):
        p = Polynomial(n, {a: mpq(rng.randint(-3, 3)) for a in basis})
        f = f + p * p
    t = Polynomial(n, {tuple(2 * e for e in a): pow2(-eps_bits) for a in basis})
    return f + t


def _solve_exact(A, b):
    """Solve A x = b over Fraction; returns None if inconsistent/deficient."""
    rows = len(A)
    cols = len(A[0])
    M = [[Fraction(A[r][c]) for c in range(cols)] + [Fraction(b[r])] for r in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        inv = M[r][c]
        M[r] = [v / inv for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [v - f * w for v, w in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    if len(pivots) < cols:
        return None  # affinely dependent subset; caller skips
    for i in range(r, rows):
        if M[i][cols] != 0:
            return None  # inconsistent
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = M[i][cols]
    return x


def in_hull_oracle(point, generators, n) -> bool:
    """Caratheodory test: point in conv(generators) over exact Fractions."""
    gens = [tuple(g) for g in generators]
    if tuple(point) in gens:
        return True
    for size in range(2, n + 2):
        for subset in itertools.combinations(gens, size):
            A = [[subset[j][i] for j in range(size)] for i in range(n)]
            A.append([1] * size)
            b = list(point) + [1]
            lam = _solve_exact(A, b)
            if lam is not None and all(v >= 0 for v in lam):
                return True
    return False


def rng_for(name: str) -> random.Random:
    return random.Random(f"exactsos-tests:{name}")


# -- acceptance reporting -------------------------------------------------------

ACCEPTANCE_RESULTS = []


def record_criterion(number: int, description: str, ok: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((number, description, ok, detail))
    assert ok, f"criterion {number} ({description}) failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, description, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        extra = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(
            f"[criterion {number:2d}] {status}  {description}{extra}"
        )
