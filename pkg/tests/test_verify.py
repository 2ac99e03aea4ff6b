import pytest
from gmpy2 import mpq

from exactsos import (
    Certificate,
    MalformedCertificate,
    Polynomial,
    Precision,
    VariableMismatch,
    format_certificate,
    intsos,
    parse,
    parse_certificate,
    reconstruct,
    verify,
)
from exactsos.factor import SosTerms

from conftest import rng_for


def two_square_certificate(f):
    one = Polynomial.constant(2, 1)
    terms = SosTerms(
        (mpq(1), mpq(1)),
        (parse("2*X1*X2 + X2^2", 2), parse("2*X1^2 + X1*X2 - 3*X2^2", 2)),
    )
    return Certificate(kind="unconstrained", n=2, input_poly=f, blocks=((one, terms),))


def test_printed_two_square_identity(sec2_poly):
    cert = two_square_certificate(sec2_poly)
    report = verify(sec2_poly, cert)
    assert report.identity_ok and report.weights_ok and report.support_ok
    assert report.verified


def test_tampered_weight_is_falsified(sec2_poly):
    one = Polynomial.constant(2, 1)
    terms = SosTerms(
        (mpq(1) + mpq(1, 10**6), mpq(1)),
        (parse("2*X1*X2 + X2^2", 2), parse("2*X1^2 + X1*X2 - 3*X2^2", 2)),
    )
    cert = Certificate(kind="unconstrained", n=2, input_poly=sec2_poly, blocks=((one, terms),))
    report = verify(sec2_poly, cert)
    assert not report.identity_ok
    assert report.mismatches  # itemized: which monomials and by how much
    assert not report.verified


def test_negative_weight_flagged(sec2_poly):
    one = Polynomial.constant(2, 1)
    g = parse("X1^2", 2)
    # -1 * (X1^2)^2 + (something) never equals f, but check the weight flag
    terms = SosTerms((mpq(-1),), (g,))
    cert = Certificate(kind="unconstrained", n=2, input_poly=sec2_poly, blocks=((one, terms),))
    report = verify(sec2_poly, cert)
    assert not report.weights_ok


def test_reconstruct_empty_is_zero():
    cert = Certificate(
        kind="unconstrained",
        n=2,
        input_poly=Polynomial.zero(2),
        blocks=((Polynomial.constant(2, 1), SosTerms.empty()),),
    )
    assert reconstruct(cert).is_zero()


def test_reconstruct_single_square():
    one = Polynomial.constant(2, 1)
    terms = SosTerms((mpq(1),), (parse("X1 + X2", 2),))
    cert = Certificate(kind="unconstrained", n=2, input_poly=one, blocks=((one, terms),))
    assert reconstruct(cert) == parse("X1^2 + 2*X1*X2 + X2^2", 2)


def test_reconstruct_full_output_equals_input(sec2_poly):
    cert = intsos(sec2_poly, Precision(eps=mpq(1)))
    assert reconstruct(cert) == sec2_poly


def test_variable_count_mismatch(sec2_poly):
    cert = two_square_certificate(sec2_poly)
    with pytest.raises(VariableMismatch):
        verify(parse("X1^2", 1), cert)


def test_putinar_needs_constraint_set(sec2_poly):
    cert = Certificate(
        kind="putinar",
        n=2,
        input_poly=sec2_poly,
        blocks=((Polynomial.constant(2, 1), SosTerms.empty()),),
    )
    with pytest.raises(MalformedCertificate):
        verify(sec2_poly, cert)


def test_metamorphic_scaling(sec2_poly):
    """Scaling f and every weight by the same positive rational preserves
    the verdict."""
    cert = two_square_certificate(sec2_poly)
    lam = mpq(7, 3)
    one = Polynomial.constant(2, 1)
    scaled = Certificate(
        kind="unconstrained",
        n=2,
        input_poly=sec2_poly.scale(lam),
        blocks=(
            (
                one,
                SosTerms(
                    tuple(w * lam for w in cert.blocks[0][1].weights),
                    cert.blocks[0][1].polys,
                ),
            ),
        ),
    )
    assert verify(sec2_poly.scale(lam), scaled).verified


def test_certificate_file_round_trip(sec2_poly, tmp_path):
    cert = intsos(sec2_poly)
    text = format_certificate(cert)
    back = parse_certificate(text)
    assert back.kind == cert.kind
    assert back.input_poly == cert.input_poly
    assert verify(sec2_poly, back).verified
    # byte-identical re-render
    assert format_certificate(back) == text


def test_malformed_certificate_text():
    with pytest.raises(MalformedCertificate):
        parse_certificate("")
    with pytest.raises(MalformedCertificate):
        parse_certificate("kind: nonsense\nvariables: 2\ninput: X1^2\n")
    with pytest.raises(MalformedCertificate):
        parse_certificate("kind: unconstrained\nvariables: 2\n")
    with pytest.raises(MalformedCertificate):
        parse_certificate(
            "kind: unconstrained\nvariables: 2\ninput: X1^2\nblock:\n"
            "multiplier: 1\nterm: 1 oops\n"
        )


def test_verify_random_certifier_outputs():
    from conftest import random_interior_poly

    rng = rng_for("verify-random")
    for _ in range(3):
        f = random_interior_poly(rng.randint(1, 2), rng)
        assert verify(f, intsos(f)).verified
