"""Unconstrained certifiers: perturb-solve-compensate and round-project.

The first route perturbs the input by eps times the even monomials over the
half-polytope support, extracts an approximate weighted SOS through the SDP
and a rounded Cholesky, and then repays the numeric error exactly through
the absorption step.  The second route rounds the numeric Gram matrix,
projects it back onto the coefficient constraints, and diagonalizes
exactly.  Both gate their output through the independent exact verifier
before returning.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass, field, replace
from typing import Optional

from gmpy2 import mpq

from .certificate import Certificate
from .errors import (
    EpsilonUnderflow,
    ExactSosError,
    NotPSD,
    PrecisionCeiling,
    RadiusExceeded,
    SolveError,
    SupportNotCovered,
    UnabsorbableMonomial,
    ZeroPolynomial,
)
from .factor import SosTerms, approx_cholesky, exact_ldlt
from .gram import GramSolution, Precision, assemble_unconstrained, solve
from .poly import Mono, Polynomial, grlex_key, sum_polynomials
from .polytope import SupportBasis, half_lattice_points, newton_polytope
from .rational import Rat, dyadic_round, pow2, rat
from .verify import verify


@dataclass(frozen=True)
class CertifyOptions:
    """Policy knobs shared by all certifiers.

    eps_floor_bits: give up once eps < 2^-eps_floor_bits.
    delta_cap: hard cap on the SDP accuracy parameter delta (bits).
    max_rounds: precision-doubling rounds before PrecisionCeiling.
    max_iterations: iteration budget of the numeric engine per solve.
    oracle_cmd: optional external non-negativity oracle; it receives the
        polynomial text as its last argument and its exit status 0 is taken
        as "non-negative".  Used only to steer the interiority heuristic;
        soundness always comes from final exact verification.
    solver: 'internal' or 'external:<path>' for the SDP engine bridge.
    """

    eps_floor_bits: int = 128
    delta_cap: int = 16384
    max_rounds: int = 10
    max_iterations: Optional[int] = None
    oracle_cmd: Optional[str] = None
    solver: str = "internal"

    @property
    def external_solver(self) -> Optional[str]:
        if self.solver.startswith("external:"):
            return self.solver.partition(":")[2]
        return None


DEFAULT_OPTIONS = CertifyOptions()


@dataclass(frozen=True)
class EpsilonMap:
    """Per-basis-point perturbation budget epsilon_alpha."""

    values: dict

    @staticmethod
    def constant(Q: SupportBasis, eps: Rat) -> "EpsilonMap":
        return EpsilonMap({alpha: rat(eps) for alpha in Q.points})

    def min_value(self) -> Rat:
        return min(self.values.values())

    def get(self, alpha: Mono) -> Rat:
        return self.values[alpha]


def even_square_sum(Q: SupportBasis) -> Polynomial:
    """t = sum over alpha in Q of X^(2 alpha)."""
    return Polynomial(
        Q.n, {tuple(2 * e for e in alpha): mpq(1) for alpha in Q.points}
    )


def absorb(
    u: Polynomial, Q: SupportBasis, eps: EpsilonMap, acc: SosTerms
) -> tuple[SosTerms, EpsilonMap]:
    """Fold the residual u into the perturbation budget, exactly.

    Even monomials u_g X^(2a) are added to eps_a; odd ones are split as
    |u_g|/2 (X^a + sgn(u_g) X^b)^2 minus matching budget debits, choosing
    the graded-lex smallest a in Q with g - a in Q.  The exact compensation
    identity (new squares) + sum eps'_a X^(2a) - sum eps_a X^(2a) = u holds
    by construction.
    """
    values = dict(eps.values)
    new_weights = []
    new_polys = []
    qset = set(Q.points)
    for gamma in sorted(u.terms, key=grlex_key):
        coeff = u.terms[gamma]
        if all(e % 2 == 0 for e in gamma):
            alpha = tuple(e // 2 for e in gamma)
            if alpha in values:
                values[alpha] += coeff
                continue
            # gamma/2 outside the basis: fall through to the split branch
            # (the precondition admits either decomposition).
        alpha = None
        for cand in Q.points:  # graded-lex order already
            rest = tuple(g - c for g, c in zip(gamma, cand))
            if min(rest) >= 0 and rest in qset and rest != cand:
                alpha = cand
                beta = rest
                break
        if alpha is None:
            raise UnabsorbableMonomial(
                f"monomial {gamma} is not a sum of two distinct basis points"
            )
        half = abs(coeff) / 2
        values[alpha] -= half
        values[beta] -= half
        sign = 1 if coeff > 0 else -1
        new_weights.append(half)
        new_polys.append(
            Polynomial(u.n, {alpha: mpq(1), beta: mpq(sign)})
        )
    return acc.extended(new_weights, new_polys), EpsilonMap(values)


def _finish_with_epsilons(terms: SosTerms, eps: EpsilonMap, n: int) -> SosTerms:
    """Append the leftover budgets eps_a X^(2a) as weighted squares."""
    weights = []
    polys = []
    for alpha in sorted(eps.values, key=grlex_key):
        w = eps.values[alpha]
        if w == 0:
            continue
        weights.append(w)
        polys.append(Polynomial.monomial(n, alpha, 1))
    return terms.extended(weights, polys)


def solve_with_radius_retries(problem, prec: Precision, opts: CertifyOptions):
    """Solve, doubling only the Frobenius radius while the engine reports
    RadiusExceeded; returns None when no strictly feasible point was found.

    The underlying algorithms assume the radius was picked "large enough" up
    front; adaptive doubling realizes that choice without disturbing the
    accuracy parameter or the perturbation loop.
    """
    radius = prec.radius
    for _ in range(opts.max_rounds + 1):
        try:
            return solve(
                problem,
                prec.delta,
                radius,
                max_iterations=opts.max_iterations,
                external_solver=opts.external_solver,
            )
        except RadiusExceeded:
            radius *= 2
        except SolveError:
            return None
    return None


def _solve_perturbed(
    f: Polynomial,
    eps: Rat,
    Q: SupportBasis,
    prec: Precision,
    opts: CertifyOptions,
) -> Optional[GramSolution]:
    """Solve the Gram SDP of f - eps*t over Q; None when not strictly feasible."""
    t = even_square_sum(Q)
    f_eps = f - t.scale(eps)
    problem = assemble_unconstrained(f_eps, Q)
    return solve_with_radius_retries(problem, prec, opts)


def interior_heuristic(
    f: Polynomial,
    eps: Rat,
    Q: SupportBasis,
    prec: Precision,
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> bool:
    """True iff the SDP for f - eps*t admits a strictly feasible solution.

    This is a heuristic stand-in for an exact non-negativity oracle; it is
    sound for the pipeline because every certificate is verified exactly
    before being returned.
    """
    if opts.oracle_cmd is not None:
        t = even_square_sum(Q)
        probe = f - t.scale(eps)
        try:
            result = subprocess.run(
                [opts.oracle_cmd, probe.render()],
                capture_output=True,
                timeout=600,
            )
            return result.returncode == 0
        except OSError:
            return False
    try:
        return _solve_perturbed(f, rat(eps), Q, prec, opts) is not None
    except ExactSosError:
        return False


def _check_even_degree(f: Polynomial):
    if f.is_zero():
        raise ZeroPolynomial("cannot certify the zero polynomial")
    if f.degree % 2 == 1:
        raise ExactSosError(
            f"degree {f.degree} is odd; an odd-degree polynomial is "
            f"unbounded below and cannot be a sum of squares"
        )


def intsos(
    f: Polynomial,
    prec: Precision = Precision(),
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> Certificate:
    """Exact weighted SOS certificate for f in the interior of the SOS cone.

    Halves eps until the perturbed polynomial is accepted by the interiority
    heuristic, then doubles (delta, radius, chol) until the absorption step
    leaves every budget non-negative.  The returned certificate passes exact
    verification; failures raise EpsilonUnderflow, PrecisionCeiling, or a
    support diagnostic.
    """
    _check_even_degree(f)
    Q = half_lattice_points(newton_polytope(f))
    if not Q.points:
        raise SupportNotCovered(
            "the half Newton polytope has no lattice points; "
            "f has no SOS decomposition"
        )
    terms, eps_map, Q = _intsos_terms(f, Q, prec, opts)
    cert = Certificate(
        kind="unconstrained",
        n=f.n,
        input_poly=f,
        blocks=((Polynomial.constant(f.n, 1), terms),),
    )
    _gate(f, cert)
    return cert


def _intsos_terms(f, Q, prec, opts):
    """Core of the perturb/solve/absorb loop, shared with extensions."""
    eps = rat(prec.eps)
    floor = pow2(-opts.eps_floor_bits)
    solution = None
    while True:
        solution = _solve_perturbed(f, eps, Q, prec, opts)
        if solution is not None:
            break
        eps = eps / 2
        if eps < floor:
            raise EpsilonUnderflow(
                f"perturbation underflowed 2^-{opts.eps_floor_bits}; "
                f"the input is presumably not in the interior of the SOS cone"
            )

    t = even_square_sum(Q)
    f_eps = f - t.scale(eps)
    current = prec
    for _ in range(opts.max_rounds):
        if solution is None:
            solution = _solve_perturbed(f, eps, Q, current, opts)
            if solution is None:
                raise PrecisionCeiling(
                    f"SDP became infeasible while doubling precision "
                    f"(delta={current.delta})"
                )
        gram = solution.matrices[0]
        terms = approx_cholesky(gram, solution.lambdas[0], current.chol, Q)
        approx = sum_polynomials([s * s for _, s in terms], f.n)
        u = f_eps - approx
        eps_map = EpsilonMap.constant(Q, eps)
        terms, eps_map = absorb(u, Q, eps_map, terms)
        if eps_map.min_value() >= 0:
            return _finish_with_epsilons(terms, eps_map, f.n), eps_map, Q
        current = current.doubled()
        solution = None
        if current.delta > opts.delta_cap:
            raise PrecisionCeiling(
                f"delta cap {opts.delta_cap} exceeded without absorbing the residual"
            )
    raise PrecisionCeiling(
        f"no success within {opts.max_rounds} precision-doubling rounds"
    )


def round_project(
    f: Polynomial,
    prec: Precision = Precision(),
    opts: CertifyOptions = DEFAULT_OPTIONS,
    basis: Optional[SupportBasis] = None,
) -> Certificate:
    """Rounding-projection certificate: round, project, exact LDL^T.

    The numeric Gram matrix of f itself (no perturbation) is rounded to
    `prec.round` fractional bits, the eta-weighted projection restores every
    coefficient equality exactly, and the exact LDL^T either produces the
    certificate or signals NotPSD, in which case all precisions double.
    `basis` overrides the default half Newton polytope support.
    """
    _check_even_degree(f)
    Q = basis if basis is not None else half_lattice_points(newton_polytope(f))
    if not Q.points:
        raise SupportNotCovered(
            "the half Newton polytope has no lattice points; "
            "f has no SOS decomposition"
        )
    problem = assemble_unconstrained(f, Q)

    current = prec
    for _ in range(opts.max_rounds):
        solution = solve_with_radius_retries(problem, current, opts)
        if solution is not None:
            G = project_to_coefficients(
                [
                    [dyadic_round(v, current.round) for v in row]
                    for row in solution.matrices[0]
                ],
                f,
                Q,
            )
            try:
                terms = exact_ldlt(G, Q)
                cert = Certificate(
                    kind="unconstrained",
                    n=f.n,
                    input_poly=f,
                    blocks=((Polynomial.constant(f.n, 1), terms),),
                )
                _gate(f, cert)
                return cert
            except NotPSD:
                pass
        current = current.doubled()
        if current.delta > opts.delta_cap:
            break
    raise PrecisionCeiling(
        f"rounding-projection failed up to delta cap "
        f"{min(current.delta, opts.delta_cap)}; f is likely not an interior SOS"
    )


def project_to_coefficients(G, f: Polynomial, Q: SupportBasis):
    """Orthogonal projection making sum_{a+b=g} G_ab = f_g hold exactly.

    eta(g) counts ordered pairs of basis points summing to g; each entry in
    the class of g moves by (sum of class - f_g) / eta(g).
    """
    pts = Q.points
    r = len(pts)
    classes: dict[Mono, list] = {}
    for i in range(r):
        for j in range(r):
            g = tuple(x + y for x, y in zip(pts[i], pts[j]))
            classes.setdefault(g, []).append((i, j))
    out = [[rat(G[i][j]) for j in range(r)] for i in range(r)]
    for g, pairs in classes.items():
        eta = len(pairs)
        total = sum((out[i][j] for i, j in pairs), mpq(0))
        shift = (total - f.coeff(g)) / eta
        for i, j in pairs:
            out[i][j] -= shift
    return out


def _gate(f: Polynomial, cert: Certificate, S=None):
    """Soundness gate: no certificate leaves a certifier unverified."""
    report = verify(f, cert, S)
    if not report.verified:
        raise ExactSosError(
            f"internal error: certificate failed exact verification "
            f"({report.message})"
        )
