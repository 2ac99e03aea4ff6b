"""Independent exact checker for every certificate kind.

Verification recomputes the defining identity with nothing but rational
polynomial arithmetic: it never touches the SDP layer or the factorizations
that produced the certificate.  A certificate is accepted only when the
identity holds coefficient for coefficient, all weights are non-negative,
unconstrained supports respect the Newton-polytope restriction, and Putinar
degree bookkeeping is satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from gmpy2 import mpq

from .certificate import Certificate
from .errors import MalformedCertificate, VariableMismatch
from .poly import Polynomial, grlex_key
from .polytope import half_lattice_points, newton_polytope


@dataclass(frozen=True)
class VerifyReport:
    identity_ok: bool
    weights_ok: bool
    support_ok: bool
    degree_ok: bool
    mismatches: tuple  # ((gamma, lhs - rhs) ...) for failed coefficients
    message: str = ""

    @property
    def verified(self) -> bool:
        return self.identity_ok and self.weights_ok and self.support_ok and self.degree_ok


def expand_sos(terms, n: int) -> Polynomial:
    """Exact expansion of weighted squares sum c_i s_i^2."""
    acc = Polynomial.zero(n)
    for w, s in terms:
        acc = acc + (s * s).scale(w)
    return acc


def reconstruct(cert: Certificate) -> Polynomial:
    """Expand the certificate into the polynomial its identity equates.

    For kinds with a denominator this is the numerator sigma; otherwise it
    is the full combination sum_j g_j sigma_j + sum c_alpha p_alpha.
    """
    n = cert.n
    acc = Polynomial.zero(n)
    for multiplier, terms in cert.blocks:
        if multiplier.n != n:
            raise MalformedCertificate("multiplier variable count mismatch")
        acc = acc + multiplier * expand_sos(terms, n)
    for w, p in cert.scalar_terms:
        acc = acc + p.scale(w)
    return acc


def verify(
    f: Polynomial, cert: Certificate, S: Optional[object] = None
) -> VerifyReport:
    """Exact verification of cert against f (S required for kind putinar)."""
    if cert.n != f.n:
        raise VariableMismatch(
            f"certificate has {cert.n} variables, polynomial has {f.n}"
        )
    if cert.kind == "putinar" and S is None:
        raise MalformedCertificate("putinar verification needs the constraint set")
    if cert.kind != "putinar" and S is not None:
        raise MalformedCertificate(f"kind {cert.kind} takes no constraint set")

    lhs = reconstruct(cert)
    if cert.denominator is not None:
        if cert.kind not in ("reznick", "hilbert"):
            raise MalformedCertificate(f"kind {cert.kind} takes no denominator")
        target = f * expand_sos(cert.denominator, cert.n)
    else:
        if cert.kind in ("reznick", "hilbert"):
            raise MalformedCertificate(f"kind {cert.kind} needs a denominator")
        target = f

    diff = lhs - target
    mismatches = tuple(
        (g, diff.terms[g]) for g in sorted(diff.terms, key=grlex_key)
    )
    identity_ok = not mismatches

    weights_ok = all(w >= 0 for _, terms in cert.blocks for w, _ in terms)
    weights_ok = weights_ok and all(w >= 0 for w, _ in cert.scalar_terms)
    if cert.denominator is not None:
        weights_ok = weights_ok and all(w >= 0 for w, _ in cert.denominator)

    support_ok = True
    if cert.kind == "unconstrained" and not f.is_zero():
        allowed = set(half_lattice_points(newton_polytope(f)).points)
        for _, terms in cert.blocks:
            for _, s in terms:
                if not set(s.terms) <= allowed:
                    support_ok = False

    degree_ok = True
    if cert.kind == "putinar":
        D = cert.degree if cert.degree is not None else 2 * ((f.degree + 1) // 2)
        for multiplier, terms in cert.blocks:
            sigma = expand_sos(terms, cert.n)
            if not sigma.is_zero() and sigma.degree + multiplier.degree > D:
                degree_ok = False
        for _, p in cert.scalar_terms:
            if p.degree > D:
                degree_ok = False

    message = "verified" if (identity_ok and weights_ok and support_ok and degree_ok) else ""
    if not identity_ok:
        worst = max(abs(d) for _, d in mismatches)
        message = f"identity fails on {len(mismatches)} monomials (worst |diff| = {worst})"
    elif not weights_ok:
        message = "negative weight present"
    elif not support_ok:
        message = "a summand leaves the Newton half-polytope support"
    elif not degree_ok:
        message = "degree bound deg(sigma_j g_j) <= D violated"
    return VerifyReport(
        identity_ok=identity_ok,
        weights_ok=weights_ok,
        support_ok=support_ok,
        degree_ok=degree_ok,
        mismatches=mismatches,
        message=message,
    )
