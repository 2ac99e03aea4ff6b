import os
import stat

import pytest
from gmpy2 import mpq

from exactsos import (
    CertifyOptions,
    EpsilonMap,
    EpsilonUnderflow,
    Polynomial,
    Precision,
    SupportNotCovered,
    absorb,
    interior_heuristic,
    intsos,
    parse,
    round_project,
    verify,
)
from exactsos.factor import SosTerms
from exactsos.poly import sum_polynomials
from exactsos.polytope import SupportBasis, degree_simplex_points
from exactsos.rational import pow2
from exactsos.unconstrained import even_square_sum, project_to_coefficients

from conftest import motzkin, random_interior_poly, rng_for


def expand(terms, n):
    return sum_polynomials([(s * s).scale(w) for w, s in terms], n)


def eps_poly(eps_map, n):
    return Polynomial(
        n, {tuple(2 * e for e in a): v for a, v in eps_map.values.items()}
    )


def test_absorb_noop_on_zero():
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1)])
    eps = EpsilonMap.constant(Q, mpq(1, 4))
    acc = SosTerms.empty()
    acc2, eps2 = absorb(Polynomial.zero(2), Q, eps, acc)
    assert len(acc2) == 0 and eps2.values == eps.values


def test_absorb_paper_worked_values():
    """Feeding the printed residual reproduces the printed budgets exactly."""
    Q = SupportBasis.from_points(2, [(2, 0), (1, 1), (0, 2)])
    u = Polynomial(
        2,
        {
            (4, 0): mpq(-1),
            (2, 2): mpq(-1, 9),
            (1, 3): mpq(-2, 3),
            (0, 4): mpq(-781, 1764),
        },
    )
    eps = EpsilonMap.constant(Q, mpq(1))
    acc, eps2 = absorb(u, Q, eps, SosTerms.empty())
    assert eps2.get((2, 0)) == 0
    assert eps2.get((1, 1)) == mpq(5, 9)
    assert eps2.get((0, 2)) == mpq(395, 1764)
    assert len(acc) == 1
    (w, s), = list(acc)
    assert w == mpq(1, 3)
    # the appended square equals (X1 X2 - X2^2)^2 up to overall sign
    target = parse("X1*X2 - X2^2", 2)
    assert s * s == target * target


def test_absorb_odd_branch_by_hand():
    Q = SupportBasis.from_points(2, [(1, 0), (0, 1)])
    u = Polynomial(2, {(1, 1): mpq(-1, 2)})
    eps = EpsilonMap.constant(Q, mpq(1))
    acc, eps2 = absorb(u, Q, eps, SosTerms.empty())
    assert eps2.get((1, 0)) == mpq(3, 4) and eps2.get((0, 1)) == mpq(3, 4)
    (w, s), = list(acc)
    assert w == mpq(1, 4)
    target = parse("X1 - X2", 2)
    assert s * s == target * target


def test_absorb_compensation_identity_random():
    """(new squares) + sum eps'_a X^(2a) - sum eps_a X^(2a) == u, exactly."""
    rng = rng_for("absorb")
    for _ in range(120):
        n = rng.randint(1, 3)
        pool = degree_simplex_points(n, 2).points
        pts = sorted(rng.sample(pool, k=min(len(pool), rng.randint(1, 6))))
        Q = SupportBasis.from_points(n, pts)
        sums = sorted({
            tuple(a + b for a, b in zip(p, q)) for p in pts for q in pts
        })
        u_terms = {}
        for g in rng.sample(sums, k=rng.randint(0, len(sums))):
            u_terms[g] = mpq(rng.randint(-8, 8), rng.randint(1, 5))
        u = Polynomial(n, u_terms)
        eps0 = mpq(rng.randint(0, 3), rng.randint(1, 4))
        eps = EpsilonMap.constant(Q, eps0)
        acc0 = SosTerms.empty()
        acc, eps2 = absorb(u, Q, eps, acc0)
        lhs = expand(acc, n) + eps_poly(eps2, n) - eps_poly(eps, n)
        assert lhs == u


def test_absorb_rejects_undecomposable():
    Q = SupportBasis.from_points(2, [(1, 0)])
    u = Polynomial(2, {(1, 1): mpq(1)})
    with pytest.raises(Exception):
        absorb(u, Q, EpsilonMap.constant(Q, mpq(1)), SosTerms.empty())


def test_intsos_sec2_paper_parameters(sec2_poly):
    prec = Precision(eps=mpq(1), delta=60, radius=60, chol=10)
    cert = intsos(sec2_poly, prec)
    assert cert.kind == "unconstrained"
    assert verify(sec2_poly, cert).verified


def test_intsos_diagonal():
    f = parse("X1^2 + X2^2", 2)
    cert = intsos(f)
    assert verify(f, cert).verified


def test_intsos_motzkin_underflows():
    opts = CertifyOptions(eps_floor_bits=24)
    with pytest.raises(EpsilonUnderflow):
        intsos(motzkin(), Precision(), opts)


def test_intsos_cross_term_support_diagnostic():
    with pytest.raises(SupportNotCovered):
        intsos(parse("X1*X2", 2))


def test_intsos_odd_degree_rejected():
    with pytest.raises(Exception) as err:
        intsos(parse("X1^3 + 1", 1))
    assert "odd" in str(err.value)


def test_interior_heuristic_sec2(sec2_poly):
    from exactsos import half_lattice_points, newton_polytope

    Q = half_lattice_points(newton_polytope(sec2_poly))
    prec = Precision(delta=30, radius=60)
    # eps = 2 over-perturbs X1^2 alone; on the full example small eps passes
    assert interior_heuristic(sec2_poly, mpq(1, 16), Q, prec)


def test_interior_heuristic_single_square():
    f = parse("X1^2", 1)
    Q = SupportBasis.from_points(1, [(1,)])
    prec = Precision(delta=30, radius=30)
    assert not interior_heuristic(f, mpq(2), Q, prec)  # X1^2 - 2 X1^2 < 0
    assert interior_heuristic(f, mpq(1, 2), Q, prec)


def test_interior_heuristic_oracle_hook(tmp_path):
    yes = tmp_path / "always_yes.py"
    yes.write_text("#!/usr/bin/env python3\nimport sys\nsys.exit(0)\n")
    os.chmod(yes, os.stat(yes).st_mode | stat.S_IEXEC)
    no = tmp_path / "always_no.py"
    no.write_text("#!/usr/bin/env python3\nimport sys\nsys.exit(1)\n")
    os.chmod(no, os.stat(no).st_mode | stat.S_IEXEC)
    f = parse("X1^2", 1)
    Q = SupportBasis.from_points(1, [(1,)])
    prec = Precision(delta=30, radius=30)
    assert interior_heuristic(f, mpq(2), Q, prec, CertifyOptions(oracle_cmd=str(yes)))
    assert not interior_heuristic(
        f, mpq(1, 2), Q, prec, CertifyOptions(oracle_cmd=str(no))
    )


def test_round_project_forced_single_entry():
    f = parse("X1^2", 1)
    cert = round_project(f)
    assert verify(f, cert).verified
    (w, s), = list(cert.blocks[0][1])
    assert (s * s).scale(w) == f  # projection forces G = [1]


def test_round_project_sec2(sec2_poly):
    cert = round_project(sec2_poly)
    report = verify(sec2_poly, cert)
    assert report.verified


def test_round_project_non_sos_diagnostic():
    with pytest.raises(SupportNotCovered):
        round_project(parse("X1*X2", 2))


def test_projection_invariant_random():
    """After projection, sum_{a+b=g} G_ab = f_g for every g, exactly."""
    rng = rng_for("projection")
    for _ in range(100):
        n = rng.randint(1, 3)
        k = rng.randint(1, 2)
        Q = degree_simplex_points(n, k)
        r = len(Q)
        Gp = [[mpq(rng.randint(-50, 50), 64) for _ in range(r)] for _ in range(r)]
        for i in range(r):
            for j in range(i):
                Gp[i][j] = Gp[j][i]
        f = Polynomial(
            n,
            {
                tuple(a + b for a, b in zip(p, q)): mpq(rng.randint(-9, 9))
                for p in Q.points
                for q in Q.points
            },
        )
        G = project_to_coefficients(Gp, f, Q)
        pts = Q.points
        sums = {}
        for i in range(r):
            for j in range(r):
                g = tuple(a + b for a, b in zip(pts[i], pts[j]))
                sums[g] = sums.get(g, mpq(0)) + G[i][j]
        for g, total in sums.items():
            assert total == f.coeff(g)


def test_intsos_round_project_interior_family():
    rng = rng_for("interior-family")
    for _ in range(5):
        n = rng.randint(1, 3)
        f = random_interior_poly(n, rng)
        assert verify(f, intsos(f)).verified
        assert verify(f, round_project(f)).verified


def test_support_containment_of_certificates(sec2_poly):
    from exactsos import half_lattice_points, newton_polytope

    cert = intsos(sec2_poly, Precision(eps=mpq(1)))
    allowed = set(half_lattice_points(newton_polytope(sec2_poly)).points)
    for _, s in cert.blocks[0][1]:
        assert set(s.terms) <= allowed


def test_certificates_are_deterministic(sec2_poly):
    from exactsos import format_certificate

    a = format_certificate(intsos(sec2_poly))
    b = format_certificate(intsos(sec2_poly))
    assert a == b
