import pytest
from gmpy2 import mpq

from exactsos import NonPositivePivot, NotPSD, approx_cholesky, exact_ldlt
from exactsos.factor import chol_precision_floor
from exactsos.polytope import SupportBasis
from exactsos.rational import pow2
from exactsos.poly import Polynomial, sum_polynomials

from conftest import rng_for


def eye(r):
    return [[mpq(i == j) for j in range(r)] for i in range(r)]


def random_pd(rng, r, scale=6):
    """B B^T + I with integer B: positive definite, entries <= 2^8."""
    B = [[mpq(rng.randint(-scale, scale)) for _ in range(r)] for _ in range(r)]
    G = [[sum(B[i][k] * B[j][k] for k in range(r)) + (1 if i == j else 0)
          for j in range(r)] for i in range(r)]
    return G


def test_approx_cholesky_identity():
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1), (1, 1)])
    terms = approx_cholesky(eye(3), mpq(1, 2), 10, Q)
    assert list(terms.weights) == [mpq(1)] * 3
    squares = sum_polynomials([s * s for _, s in terms], 2)
    expected = Polynomial(2, {(2, 0): 1, (0, 2): 1, (2, 2): 1})
    assert squares == expected


def test_approx_cholesky_diagonal_exact_roots():
    Q = SupportBasis.from_points(1, [(0,), (1,)])
    G = [[mpq(4), mpq(0)], [mpq(0), mpq(9, 4)]]
    terms = approx_cholesky(G, mpq(1), 10, Q)
    polys = sorted(s.render() for _, s in terms)
    assert polys == ["2", "3/2*X1"]


def test_approx_cholesky_error_bound():
    """Eq-style entrywise bound |F| <= (r+1) 2^-b sqrt(G_ii G_jj) / (1 - (r+1) 2^-b)."""
    rng = rng_for("chol-bound")
    for _ in range(25):
        r = rng.randint(1, 6)
        bits = rng.choice([10, 16, 24])
        G = random_pd(rng, r)
        Q = SupportBasis.from_points(
            r, [tuple(int(i == j) for j in range(r)) for i in range(r)]
        )
        terms = approx_cholesky(G, mpq(1), bits, Q)
        # reconstruct L from the returned polynomials: s_i = column i of L,
        # with row j of G matched to basis point Q.points[j]
        L = [[mpq(0)] * r for _ in range(r)]
        for i, (_, s) in enumerate(terms):
            for j in range(r):
                L[j][i] = s.coeff(Q.points[j])
        u = pow2(-bits)
        for a in range(r):
            for b in range(r):
                F = sum(L[a][k] * L[b][k] for k in range(r)) - G[a][b]
                bound = (r + 1) * u * _sqrt_upper(G[a][a] * G[b][b]) / (1 - (r + 1) * u)
                assert abs(F) <= bound


def _sqrt_upper(q):
    """A rational upper bound on sqrt(q) tight to 2^-40."""
    from exactsos.rational import dyadic_sqrt

    s = dyadic_sqrt(q, 40)
    while s * s < q:
        s += pow2(-40)
    return s


def test_approx_cholesky_never_nonpositive_with_sound_lambda():
    from exactsos import min_eig_lower_bound

    rng = rng_for("chol-sound")
    for _ in range(15):
        r = rng.randint(1, 5)
        G = random_pd(rng, r)
        lam = min_eig_lower_bound(G, 20)
        assert lam > 0
        Q = SupportBasis.from_points(
            r, [tuple(int(i == j) for j in range(r)) for i in range(r)]
        )
        approx_cholesky(G, lam, 4, Q)  # precondition raises bits internally


def test_chol_precision_floor():
    # smallest b with 2^-b < lam / (r^2 + r + (r-1) lam)
    lam = mpq(1, 2)
    r = 3
    floor = chol_precision_floor(lam, r)
    bound = lam / (r * r + r + (r - 1) * lam)
    assert pow2(-floor) < bound <= pow2(-(floor - 1))


def test_approx_cholesky_unsound_lambda_raises():
    Q = SupportBasis.from_points(1, [(0,), (1,)])
    G = [[mpq(1), mpq(2)], [mpq(2), mpq(1)]]  # indefinite
    with pytest.raises(NonPositivePivot):
        approx_cholesky(G, mpq(1, 4), 30, Q)


def test_exact_ldlt_hand_example():
    Q = SupportBasis.from_points(1, [(0,), (1,)])
    terms = exact_ldlt([[mpq(1), mpq(1)], [mpq(1), mpq(2)]], Q)
    assert list(terms.weights) == [mpq(1), mpq(1)]
    assert [s.render() for _, s in terms] == ["X1 + 1", "X1"]


def test_exact_ldlt_identity():
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1)])
    terms = exact_ldlt(eye(2), Q)
    assert list(terms.weights) == [mpq(1), mpq(1)]
    assert sorted(s.render() for _, s in terms) == ["X1", "X2"]


def test_exact_ldlt_indefinite():
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1)])
    with pytest.raises(NotPSD):
        exact_ldlt([[mpq(0), mpq(1)], [mpq(1), mpq(0)]], Q)


def test_exact_ldlt_rank_deficient_psd():
    # [[1,1],[1,1]] is PSD of rank 1: one square (X1 + X2)^2.
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1)])
    terms = exact_ldlt([[mpq(1), mpq(1)], [mpq(1), mpq(1)]], Q)
    assert len(terms) == 1
    squares = sum_polynomials([(s * s).scale(w) for w, s in terms], 2)
    assert squares == Polynomial(2, {(2, 0): 1, (1, 1): 2, (0, 2): 1})


def test_exact_ldlt_round_trip_random():
    rng = rng_for("ldlt")
    for _ in range(20):
        r = rng.randint(1, 6)
        G = random_pd(rng, r, scale=4)
        Q = SupportBasis.from_points(
            r, [tuple(int(i == j) for j in range(r)) for i in range(r)]
        )
        terms = exact_ldlt(G, Q)
        # v^T G v == sum w s^2 exactly, with v_j the monomial of Q.points[j]
        v_terms = sum_polynomials([(s * s).scale(w) for w, s in terms], r)
        expected = {}
        for i in range(r):
            for j in range(r):
                g = tuple(a + b for a, b in zip(Q.points[i], Q.points[j]))
                expected[g] = expected.get(g, mpq(0)) + G[i][j]
        assert v_terms == Polynomial(r, expected)
