"""Rational-function decompositions: Reznick and Hilbert-Artin certifiers.

A positive definite form f of even degree admits, for some D, an exact
identity f * (X_1^2 + ... + X_n^2)^D = sum c_i s_i^2; the first routine
searches the smallest workable D with the interiority heuristic and then
reuses the unconstrained pipeline on the multiplied form.  The second
routine covers non-negative polynomials whose numerator can be pushed into
the interior: it solves a coupled Gram pair (numerator, denominator) and
repairs the residual of sigma_D * f - sigma exactly through absorption.
"""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .certificate import Certificate
from .errors import (
    DegreeCapExceeded,
    EpsilonUnderflow,
    NotAForm,
    PrecisionCeiling,
    SolveError,
    ZeroPolynomial,
)
from .factor import SosTerms, approx_cholesky
from .gram import Precision, assemble_hilbert, solve
from .poly import Polynomial, sum_polynomials
from .polytope import (
    degree_simplex_points,
    half_lattice_points,
    minkowski_half_support,
    newton_polytope,
)
from .rational import pow2, rat
from .unconstrained import (
    DEFAULT_OPTIONS,
    CertifyOptions,
    EpsilonMap,
    _check_even_degree,
    _finish_with_epsilons,
    _gate,
    _intsos_terms,
    absorb,
    even_square_sum,
    interior_heuristic,
    solve_with_radius_retries,
)


def squares_sum(n: int) -> Polynomial:
    """G_n = X_1^2 + ... + X_n^2."""
    return Polynomial(
        n, {tuple(2 if j == i else 0 for j in range(n)): 1 for i in range(n)}
    )


def squares_sum_power_terms(n: int, D: int) -> SosTerms:
    """G_n^D as explicit weighted squares: multinomial(D; b) * (X^b)^2."""
    weights = []
    polys = []
    for beta in degree_simplex_points(n, D):
        if sum(beta) != D:
            continue
        coeff = factorial(D)
        for e in beta:
            coeff //= factorial(e)
        weights.append(mpq(coeff))
        polys.append(Polynomial.monomial(n, beta, 1))
    return SosTerms(tuple(weights), tuple(polys))


def reznicksos(
    f: Polynomial,
    prec: Precision = Precision(),
    maxD: int = 10,
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> Certificate:
    """Certify a positive definite form as f = (sum c_i s_i^2) / G_n^D.

    Finds the smallest D <= maxD whose multiplied form passes the
    interiority heuristic, certifies f * G_n^D with the unconstrained
    pipeline, and packages G_n^D as the denominator.  The exact identity
    f * G_n^D = sum c_i s_i^2 is verified before returning.
    """
    if f.is_zero():
        raise ZeroPolynomial("cannot certify the zero polynomial")
    if not f.is_form() or f.degree % 2 == 1:
        raise NotAForm(
            f"Reznick representations need a form of even degree; "
            f"got degree set of {sorted({sum(a) for a in f.terms})}"
        )
    gn = squares_sum(f.n)
    product = f
    result = None
    for D in range(0, maxD + 1):
        Q = half_lattice_points(newton_polytope(product))
        if Q.points:
            try:
                # The eps-halving phase doubles as the interiority test for
                # f * G_n^D: underflow means this D is not interior yet.
                terms, _, _ = _intsos_terms(product, Q, prec, opts)
                result = (D, terms)
                break
            except EpsilonUnderflow:
                pass
        product = product * gn
    if result is None:
        raise DegreeCapExceeded(
            f"no multiplier degree D <= {maxD} made f * G_n^D pass the "
            f"interior heuristic"
        )
    D, terms = result
    denominator = squares_sum_power_terms(f.n, D) if D > 0 else None
    kind = "reznick" if D > 0 else "unconstrained"
    cert = Certificate(
        kind=kind,
        n=f.n,
        input_poly=f,
        blocks=((Polynomial.constant(f.n, 1), terms),),
        denominator=denominator,
        degree=D if D > 0 else None,
    )
    _gate(f, cert)
    return cert


def hilbertsos(
    f: Polynomial,
    prec: Precision = Precision(),
    maxD: int = 3,
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> Certificate:
    """Hilbert-Artin decomposition f = sigma / sigma_D, both SOS, exact.

    For D = 1..maxD, the perturbed coupled SDP is probed with eps halving;
    at the first strictly feasible (D, eps) both Gram matrices are factored
    with the rounded Cholesky, the residual u = sigma_D * f - sigma - eps*t
    is absorbed over the numerator support, and the exact identity
    sigma_D * f = sigma is verified.
    """
    if f.is_zero():
        raise ZeroPolynomial("cannot certify the zero polynomial")
    _check_even_degree(f)
    floor = pow2(-opts.eps_floor_bits)
    chosen = None
    for D in range(1, maxD + 1):
        eps = rat(prec.eps)
        while eps >= floor:
            problem = assemble_hilbert(f, D, eps=eps)
            solution = solve_with_radius_retries(problem, prec, opts)
            if solution is not None:
                chosen = (D, eps, problem, solution)
                break
            eps = eps / 2
        if chosen is not None:
            break
    if chosen is None:
        raise DegreeCapExceeded(
            f"no denominator half-degree D <= {maxD} admitted a strictly "
            f"feasible perturbed Gram pair (eps floor 2^-{opts.eps_floor_bits})"
        )
    D, eps, problem, solution = chosen
    QD = problem.blocks[0][0]
    H_basis = problem.blocks[1][0]
    t = even_square_sum(QD)

    current = prec
    for _ in range(opts.max_rounds):
        if solution is None:
            problem = assemble_hilbert(f, D, eps=eps)
            solution = solve_with_radius_retries(problem, current, opts)
            if solution is None:
                raise PrecisionCeiling(
                    "perturbed Gram pair became infeasible while doubling precision"
                )
        numer = approx_cholesky(
            solution.matrices[0], solution.lambdas[0], current.chol, QD
        )
        denom = approx_cholesky(
            solution.matrices[1], solution.lambdas[1], current.chol, H_basis
        )
        sigma = sum_polynomials([s * s for _, s in numer], f.n)
        sigma_D = sum_polynomials([s * s for _, s in denom], f.n)
        u = sigma_D * f - sigma - t.scale(eps)
        eps_map = EpsilonMap.constant(QD, eps)
        terms, eps_map = absorb(u, QD, eps_map, numer)
        if eps_map.min_value() >= 0:
            terms = _finish_with_epsilons(terms, eps_map, f.n)
            cert = Certificate(
                kind="hilbert",
                n=f.n,
                input_poly=f,
                blocks=((Polynomial.constant(f.n, 1), terms),),
                denominator=denom,
                degree=D,
            )
            _gate(f, cert)
            return cert
        current = current.doubled()
        solution = None
        if current.delta > opts.delta_cap:
            raise PrecisionCeiling(
                f"delta cap {opts.delta_cap} exceeded while absorbing the "
                f"numerator residual"
            )
    raise PrecisionCeiling(
        f"no success within {opts.max_rounds} precision-doubling rounds"
    )
