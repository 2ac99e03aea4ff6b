"""Certification of positivity over compact basic semialgebraic sets.

Given S = {g_1 >= 0, ..., g_m >= 0} inside the unit box with an archimedean
quadratic module (the caller's responsibility), the main routine produces
an exact identity

    f = sum_j g_j (sum_i c_ij s_ij^2) + sum_alpha c_alpha (1 - X^(2 alpha))

by perturbing f over the degree-k simplex, solving the block Gram SDP over
the augmented set S', factoring every block with the rounded Cholesky, and
absorbing the residual into block 0.  A rounding-projection variant works
over S directly: it projects the rounded block-0 Gram matrix onto the
coefficients of f - sum_{j>=1} sigma_j g_j and diagonalizes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .certificate import Certificate
from .errors import (
    DegreeCapExceeded,
    EpsilonUnderflow,
    MalformedCertificate,
    NotPSD,
    PrecisionCeiling,
    SolveError,
    VariableMismatch,
)
from .factor import SosTerms, approx_cholesky, exact_ldlt
from .gram import Precision, assemble_putinar, solve
from .poly import Polynomial, parse, sum_polynomials
from .polytope import degree_simplex_points
from .rational import dyadic_round, pow2, rat
from .unconstrained import (
    DEFAULT_OPTIONS,
    CertifyOptions,
    EpsilonMap,
    _check_even_degree,
    _finish_with_epsilons,
    _gate,
    absorb,
    even_square_sum,
    project_to_coefficients,
    solve_with_radius_retries,
)


@dataclass(frozen=True)
class SemialgebraicSet:
    """Constraint polynomials g_j >= 0; compactness inside [-1,1]^n and an
    archimedean quadratic module are asserted by the caller, not checked."""

    n: int
    constraints: tuple

    def __post_init__(self):
        for g in self.constraints:
            if g.n != self.n:
                raise VariableMismatch("constraint variable count mismatch")

    @property
    def half_degrees(self) -> tuple:
        return tuple((g.degree + 1) // 2 for g in self.constraints)

    def __len__(self):
        return len(self.constraints)


def _base_level(f: Polynomial, S: SemialgebraicSet) -> int:
    d = max([f.degree] + [g.degree for g in S.constraints])
    return (d + 1) // 2


def membership_heuristic(
    f: Polynomial,
    S: SemialgebraicSet,
    k: int,
    prec: Precision,
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> bool:
    """True iff the level-k block SDP over S is numerically strictly feasible.

    Heuristic stand-in for the truncated quadratic module membership test;
    gated by final exact verification downstream.
    """
    try:
        problem = assemble_putinar(f, S.constraints, k, box_scalars=False)
    except ValueError:
        return False
    return solve_with_radius_retries(problem, prec, opts) is not None


def _find_level(f, S, prec, maxK, opts) -> int:
    k = _base_level(f, S)
    while k <= maxK:
        if membership_heuristic(f, S, k, prec, opts):
            return k
        k += 1
    raise DegreeCapExceeded(
        f"no relaxation level k <= {maxK} accepted f over S; "
        f"f may not be positive on S or the module may not be archimedean"
    )


def putinarsos(
    f: Polynomial,
    S: SemialgebraicSet,
    prec: Precision = Precision(),
    maxK: int = 8,
    opts: CertifyOptions = DEFAULT_OPTIONS,
    box_degree_one_only: bool = False,
) -> Certificate:
    """Exact Putinar certificate of positivity of f on S (via S').

    The degree loop fixes the smallest accepted level k; the eps loop halves
    the perturbation until f - eps * t is accepted over the augmented set
    S'; the precision loop doubles (delta, radius, chol) until absorption
    leaves every budget non-negative.  Exact verification gates the return.
    """
    _check_even_degree(f)
    if not S.constraints:
        # Degenerate case: unconstrained certification over the degree-k
        # simplex basis; the identity reduces to the plain SOS one.
        from .unconstrained import _intsos_terms

        k = _base_level(f, S)
        Q = degree_simplex_points(f.n, k)
        terms, _, _ = _intsos_terms(f, Q, prec, opts)
        cert = Certificate(
            kind="putinar",
            n=f.n,
            input_poly=f,
            blocks=((Polynomial.constant(f.n, 1), terms),),
            scalar_terms=(),
            degree=2 * k,
        )
        _gate(f, cert, S)
        return cert
    k = _find_level(f, S, prec, maxK, opts)
    Q = degree_simplex_points(f.n, k)
    t = even_square_sum(Q)

    eps = rat(prec.eps)
    floor = pow2(-opts.eps_floor_bits)
    solution = None
    while True:
        problem = assemble_putinar(
            f - t.scale(eps),
            S.constraints,
            k,
            box_degree_one_only=box_degree_one_only,
        )
        solution = solve_with_radius_retries(problem, prec, opts)
        if solution is not None:
            break
        eps = eps / 2
        if eps < floor:
            raise EpsilonUnderflow(
                f"perturbation underflowed 2^-{opts.eps_floor_bits} over S'"
            )

    f_eps = f - t.scale(eps)
    current = prec
    for _ in range(opts.max_rounds):
        if solution is None:
            problem = assemble_putinar(
                f_eps, S.constraints, k, box_degree_one_only=box_degree_one_only
            )
            solution = solve_with_radius_retries(problem, current, opts)
            if solution is None:
                raise PrecisionCeiling(
                    "block SDP became infeasible while doubling precision"
                )
        block_terms = []
        for b, (basis, mult) in enumerate(problem.blocks):
            terms = approx_cholesky(
                solution.matrices[b], solution.lambdas[b], current.chol, basis
            )
            block_terms.append((mult, terms))
        scalar_terms = tuple(
            (c, _box_poly(f.n, alpha))
            for c, alpha in zip(solution.scalars, problem.scalar_alphas)
        )
        combination = sum_polynomials(
            [
                mult * sum_polynomials([s * s for _, s in terms], f.n)
                for mult, terms in block_terms
            ],
            f.n,
        )
        combination = combination + sum_polynomials(
            [p.scale(c) for c, p in scalar_terms], f.n
        )
        u = f_eps - combination
        eps_map = EpsilonMap.constant(Q, eps)
        head_terms, eps_map = absorb(u, Q, eps_map, block_terms[0][1])
        if eps_map.min_value() >= 0:
            blocks = [(block_terms[0][0], _finish_with_epsilons(head_terms, eps_map, f.n))]
            blocks.extend(block_terms[1:])
            cert = Certificate(
                kind="putinar",
                n=f.n,
                input_poly=f,
                blocks=tuple(blocks),
                scalar_terms=scalar_terms,
                degree=2 * k,
            )
            _gate(f, cert, S)
            return cert
        current = current.doubled()
        solution = None
        if current.delta > opts.delta_cap:
            raise PrecisionCeiling(
                f"delta cap {opts.delta_cap} exceeded while absorbing over S'"
            )
    raise PrecisionCeiling(
        f"no success within {opts.max_rounds} precision-doubling rounds"
    )


def round_project_putinar(
    f: Polynomial,
    S: SemialgebraicSet,
    prec: Precision = Precision(),
    maxK: int = 8,
    opts: CertifyOptions = DEFAULT_OPTIONS,
) -> Certificate:
    """Rounding-projection Putinar certificate over S (no box scalars).

    Blocks j >= 1 come from rounded Cholesky factorizations; block 0 is the
    exact LDL^T of the rounded block-0 Gram matrix projected onto the
    coefficients of u = f - sum_{j>=1} sigma_j g_j.  All four precisions
    double on failure.
    """
    _check_even_degree(f)
    if not S.constraints:
        from .unconstrained import round_project

        k = _base_level(f, S)
        base = round_project(f, prec, opts, basis=degree_simplex_points(f.n, k))
        cert = Certificate(
            kind="putinar",
            n=f.n,
            input_poly=f,
            blocks=base.blocks,
            scalar_terms=(),
            degree=2 * k,
        )
        _gate(f, cert, S)
        return cert
    k = _find_level(f, S, prec, maxK, opts)
    Q = degree_simplex_points(f.n, k)

    current = prec
    for _ in range(opts.max_rounds):
        problem = assemble_putinar(f, S.constraints, k, box_scalars=False)
        solution = solve_with_radius_retries(problem, current, opts)
        if solution is not None:
            tail = []
            for b in range(1, len(problem.blocks)):
                basis, mult = problem.blocks[b]
                terms = approx_cholesky(
                    solution.matrices[b], solution.lambdas[b], current.chol, basis
                )
                tail.append((mult, terms))
            u = f - sum_polynomials(
                [
                    mult * sum_polynomials([s * s for _, s in terms], f.n)
                    for mult, terms in tail
                ],
                f.n,
            )
            rounded = [
                [dyadic_round(v, current.round) for v in row]
                for row in solution.matrices[0]
            ]
            G = project_to_coefficients(rounded, u, Q)
            try:
                head = exact_ldlt(G, Q)
                cert = Certificate(
                    kind="putinar",
                    n=f.n,
                    input_poly=f,
                    blocks=tuple(
                        [(Polynomial.constant(f.n, 1), head)] + tail
                    ),
                    scalar_terms=(),
                    degree=2 * k,
                )
                _gate(f, cert, S)
                return cert
            except NotPSD:
                pass
        current = current.doubled()
        if current.delta > opts.delta_cap:
            break
    raise PrecisionCeiling(
        f"rounding-projection over S failed up to the delta cap"
    )


def _box_poly(n: int, alpha) -> Polynomial:
    """1 - X^(2 alpha); identically zero for alpha = 0."""
    return Polynomial(n, {(0,) * n: 1, tuple(2 * e for e in alpha): -1})


# -- problem files --------------------------------------------------------------


def write_problem(path, f: Polynomial, S: SemialgebraicSet | None, k: int | None = None):
    lines = [f"variables: {f.n}", f"f: {f.render()}"]
    if S is not None:
        for g in S.constraints:
            lines.append(f"g: {g.render()}")
    if k is not None:
        lines.append(f"k: {k}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_problem(path):
    """Returns (f, S or None, k hint or None)."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise MalformedCertificate(f"cannot read problem file: {exc}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("variables:"):
        raise MalformedCertificate("problem file must start with 'variables:'")
    try:
        n = int(lines[0].partition(":")[2])
    except ValueError as exc:
        raise MalformedCertificate(f"bad variable count: {exc}") from None
    f = None
    gs = []
    k = None
    for ln in lines[1:]:
        key, _, body = ln.partition(":")
        body = body.strip()
        try:
            if key == "f":
                f = parse(body, n)
            elif key == "g":
                gs.append(parse(body, n))
            elif key == "k":
                k = int(body)
            else:
                raise MalformedCertificate(f"unknown problem field {key!r}")
        except MalformedCertificate:
            raise
        except Exception as exc:
            raise MalformedCertificate(f"bad problem line {ln!r}: {exc}") from None
    if f is None:
        raise MalformedCertificate("problem file missing 'f:'")
    S = SemialgebraicSet(n, tuple(gs)) if gs else None
    return f, S, k
