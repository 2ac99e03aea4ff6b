import itertools

import pytest
from gmpy2 import mpq

from exactsos import (
    Polynomial,
    ZeroPolynomial,
    convex_hull,
    degree_simplex_points,
    half_lattice_points,
    minkowski_half_support,
    newton_polytope,
    parse,
)

from conftest import in_hull_oracle, motzkin, rng_for


def test_newton_polytope_sec2(sec2_poly):
    P = newton_polytope(sec2_poly)
    # The support lies on a segment; only the endpoints are vertices.
    assert set(P.vertices) == {(4, 0), (0, 4)}
    for point in sec2_poly.support():
        assert P.contains(point)


def test_newton_polytope_constant():
    P = newton_polytope(parse("5", 3))
    assert P.vertices == ((0, 0, 0),)
    assert P.contains((0, 0, 0))
    assert not P.contains((1, 0, 0))


def test_newton_polytope_motzkin_vertices():
    P = newton_polytope(motzkin())
    # (2,2,2) is the centroid of the other three support points.
    assert set(P.vertices) == {(4, 2, 0), (2, 4, 0), (0, 0, 6)}


def test_newton_polytope_rejects_zero():
    with pytest.raises(ZeroPolynomial):
        newton_polytope(Polynomial.zero(2))


def test_half_lattice_points_sec2(sec2_poly):
    Q = half_lattice_points(newton_polytope(sec2_poly))
    assert set(Q.points) == {(2, 0), (1, 1), (0, 2)}


def test_half_lattice_points_single_point():
    P = newton_polytope(parse("1", 2))
    assert half_lattice_points(P).points == ((0, 0),)


def test_half_lattice_points_motzkin():
    Q = half_lattice_points(newton_polytope(motzkin()))
    assert set(Q.points) == {(0, 0, 3), (2, 1, 0), (1, 2, 0), (1, 1, 1)}


def test_half_lattice_equals_bruteforce_oracle():
    rng = rng_for("half-lattice")
    for _ in range(25):
        n = rng.randint(1, 4)
        pts = {
            tuple(rng.randint(0, 8) for _ in range(n))
            for _ in range(rng.randint(1, 6))
        }
        P = convex_hull(pts, n)
        Q = set(half_lattice_points(P).points)
        box = [range(0, 5) for _ in range(n)]
        for q in itertools.product(*box):
            doubled = tuple(2 * c for c in q)
            assert (q in Q) == in_hull_oracle(doubled, pts, n), (pts, q)


def test_support_containment_random():
    rng = rng_for("containment")
    for _ in range(20):
        n = rng.randint(1, 3)
        terms = {
            tuple(rng.randint(0, 4) for _ in range(n)): mpq(rng.randint(1, 5))
            for _ in range(rng.randint(1, 7))
        }
        f = Polynomial(n, terms)
        P = newton_polytope(f)
        for alpha in f.support():
            assert P.contains(alpha)


def test_half_lattice_monotone():
    rng = rng_for("monotone")
    for _ in range(20):
        n = rng.randint(1, 3)
        pts = {tuple(rng.randint(0, 6) for _ in range(n)) for _ in range(4)}
        bigger = set(pts) | {tuple(rng.randint(0, 6) for _ in range(n))}
        Q1 = set(half_lattice_points(convex_hull(pts, n)).points)
        Q2 = set(half_lattice_points(convex_hull(bigger, n)).points)
        assert Q1 <= Q2


def test_vertices_satisfy_facets_with_equality():
    rng = rng_for("facets")
    for _ in range(20):
        n = rng.randint(1, 4)
        pts = {tuple(rng.randint(0, 7) for _ in range(n)) for _ in range(6)}
        P = convex_hull(pts, n)
        for v in P.vertices:
            active = 0
            for normal, offset in P.facets:
                value = sum(a * x for a, x in zip(normal, v))
                assert value <= offset
                if value == offset:
                    active += 1
            assert active >= 1
        # every vertex is extreme: removing it shrinks the hull
        if len(P.vertices) > 1:
            for v in P.vertices:
                rest = [p for p in pts if p != v]
                assert not in_hull_oracle(v, rest, n)


def test_degree_simplex_counts():
    assert set(degree_simplex_points(2, 1).points) == {(0, 0), (1, 0), (0, 1)}
    assert len(degree_simplex_points(2, 2)) == 6
    assert len(degree_simplex_points(3, 4)) == 35


def test_degree_simplex_ordering():
    pts = degree_simplex_points(2, 2).points
    assert pts == tuple(sorted(pts, key=lambda a: (sum(a), a)))


def test_minkowski_half_support_d0_matches_newton(sec2_poly):
    got = minkowski_half_support(sec2_poly, 0)
    expected = half_lattice_points(newton_polytope(sec2_poly))
    k = sec2_poly.degree // 2
    assert set(got.points) == {
        q for q in expected.points if sum(q) <= k
    }


def test_minkowski_half_support_univariate():
    f = parse("X1^2", 1)
    assert minkowski_half_support(f, 1).points == ((1,), (2,))


def test_minkowski_half_support_motzkin_regression():
    # Oracle: S_1 generated by supp(f) + {0, 2e_i}; enumerate the box and
    # keep q with 2q in the hull and |q| <= k + D = 4.
    f = motzkin()
    D = 1
    gens = set()
    corners = [(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)]
    for s in f.support():
        for c in corners:
            gens.add(tuple(a + b for a, b in zip(s, c)))
    expected = set()
    for q in itertools.product(range(4), range(4), range(5)):
        if sum(q) <= 4 and in_hull_oracle(tuple(2 * c for c in q), gens, 3):
            expected.add(q)
    got = set(minkowski_half_support(f, D).points)
    assert got == expected
    # frozen regression value for the size of Q_1 (computed by the oracle)
    assert len(got) == 13
