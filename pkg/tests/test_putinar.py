import pytest
from gmpy2 import mpq

from exactsos import (
    Certificate,
    Polynomial,
    Precision,
    SemialgebraicSet,
    membership_heuristic,
    parse,
    putinarsos,
    read_problem,
    round_project_putinar,
    verify,
    write_problem,
)
from exactsos.factor import SosTerms
from exactsos.verify import expand_sos

from conftest import rng_for


def box_problem():
    f = parse("6 - X1^2 - 2*X1*X2 - 2*X2^2", 2)
    S = SemialgebraicSet(2, (parse("1 - X1^2", 2), parse("1 - X2^2", 2)))
    return f, S


def paper_putinar_certificate(f):
    """The worked representation printed for the box example, as data."""
    one = Polynomial.constant(2, 1)
    block0 = SosTerms(
        (
            mpq(23853407, 292204836),
            mpq(23, 49),
            mpq(130657269, 291009481),
            mpq(1, 2442 * 2442),
            mpq(1),
            mpq(1, 2437 * 2437),
        ),
        (
            parse("1", 2),
            parse("X1", 2),
            parse("X2", 2),
            parse("1", 2),
            parse("X1 - X2", 2),
            parse("X2", 2),
        ),
    )
    return Certificate(
        kind="putinar",
        n=2,
        input_poly=f,
        blocks=((one, block0),),
        scalar_terms=(
            (mpq(121, 49), parse("1 - X1^2", 2)),
            (mpq(169, 49), parse("1 - X2^2", 2)),
        ),
        degree=2,
    )


def test_paper_putinar_representation_verifies_exactly():
    f, S = box_problem()
    cert = paper_putinar_certificate(f)
    report = verify(f, cert, S)
    assert report.identity_ok
    assert report.verified


def test_putinarsos_box_example():
    f, S = box_problem()
    cert = putinarsos(f, S, Precision(eps=mpq(1), delta=60, radius=60, chol=10))
    assert cert.kind == "putinar"
    assert cert.degree == 2
    assert verify(f, cert, S).verified
    assert all(c >= 0 for c, _ in cert.scalar_terms)


def test_putinarsos_simple_interval():
    f = parse("2 - X1^2", 1)
    S = SemialgebraicSet(1, (parse("1 - X1^2", 1),))
    cert = putinarsos(f, S, Precision())
    assert verify(f, cert, S).verified


def test_putinarsos_no_constraints_degenerates():
    f = parse("X1^2 + X2^2 + 1/8", 2)
    S = SemialgebraicSet(2, ())
    cert = putinarsos(f, S, Precision())
    assert cert.kind == "putinar"
    assert not cert.scalar_terms
    assert len(cert.blocks) == 1
    assert verify(f, cert, S).verified


def test_round_project_putinar_box_example():
    f, S = box_problem()
    cert = round_project_putinar(f, S, Precision())
    assert cert.kind == "putinar"
    assert not cert.scalar_terms  # the S-route carries no box multipliers
    assert verify(f, cert, S).verified


def test_round_project_putinar_constant_one():
    S = SemialgebraicSet(1, (parse("1 - X1^2", 1),))
    one = parse("1", 1)
    cert = round_project_putinar(one, S, Precision())
    assert verify(one, cert, S).verified


def test_membership_heuristic():
    f, S = box_problem()
    prec = Precision(delta=30, radius=60)
    assert membership_heuristic(f, S, 1, prec)
    minus_one = parse("0 - 1", 2)
    assert not membership_heuristic(minus_one, S, 1, prec)
    one = parse("1", 2)
    assert membership_heuristic(one, S, 1, prec)


def test_degree_bookkeeping():
    f, S = box_problem()
    cert = putinarsos(f, S, Precision(eps=mpq(1)))
    D = cert.degree
    for mult, terms in cert.blocks:
        sigma = expand_sos(terms, 2)
        if not sigma.is_zero():
            assert sigma.degree + mult.degree <= D
    for _, p in cert.scalar_terms:
        assert p.degree <= D


def test_nonnegativity_spot_check_on_samples():
    """eval(f, x) >= 0 exactly at rejection-sampled points of S."""
    f, S = box_problem()
    rng = rng_for("putinar-samples")
    found = 0
    while found < 100:
        x = [mpq(rng.randint(-8, 8), 8) for _ in range(2)]
        if all(g.eval(x) >= 0 for g in S.constraints):
            assert f.eval(x) >= 0
            found += 1


def test_problem_file_round_trip(tmp_path):
    f, S = box_problem()
    path = tmp_path / "box.prob"
    write_problem(path, f, S, k=1)
    f2, S2, k = read_problem(path)
    assert f2 == f
    assert k == 1
    assert tuple(g.render() for g in S2.constraints) == tuple(
        g.render() for g in S.constraints
    )
