"""Gram-matrix SDP assembly and the exactly-certified solve wrapper.

An assembled problem carries one PSD block per SOS multiplier plus optional
sign-constrained scalars, and one linear equality per monomial tying block
entries to target coefficients.  `solve` runs the numeric engine on the
margin-shifted problem and accepts an iterate only after recomputing, in
exact rational arithmetic, the residual bound, the Frobenius bound, and a
positive-definiteness margin for every block; the engine's own reports are
never trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from gmpy2 import mpq, mpz

from . import ipm
from .errors import Infeasible, RadiusExceeded, SupportNotCovered, VariableMismatch
from .poly import Mono, Polynomial, grlex_key
from .polytope import SupportBasis, degree_simplex_points, minkowski_half_support
from .rational import Rat, dyadic_trunc, pow2, rat

RatMatrix = tuple  # tuple of tuples of Rat, symmetric


@dataclass(frozen=True)
class Precision:
    """Perturbation and precision parameters for the numeric phase.

    eps: perturbation weight; delta: SDP accuracy bits; radius: Frobenius
    bound; chol: Cholesky rounding bits; round: rounding bits for the
    rounding-projection path.  The retry rule doubles (delta, radius, chol)
    and, where used, round.
    """

    eps: Rat = mpq(1, 1024)
    delta: int = 60
    radius: int = 60
    chol: int = 10
    round: int = 10

    def __post_init__(self):
        if self.eps <= 0 or min(self.delta, self.radius, self.chol, self.round) < 1:
            raise ValueError("precision parameters must be positive")

    def doubled(self) -> "Precision":
        return replace(
            self,
            delta=2 * self.delta,
            radius=2 * self.radius,
            chol=2 * self.chol,
            round=2 * self.round,
        )

    def with_eps(self, eps) -> "Precision":
        return replace(self, eps=rat(eps))


@dataclass(frozen=True)
class Equality:
    """One linear constraint: sum of block entries plus scalars = rhs.

    gamma is the monomial the row matches (None for normalization rows).
    block_entries holds (block, i, j, coeff) with i <= j; the coefficient
    applies to the symmetric pair, so the row reads
    sum coeff * (2 - [i==j]) * G_ij + sum scalar coeff * c = rhs.
    """

    gamma: Optional[Mono]
    rhs: Rat
    block_entries: tuple
    scalar_entries: tuple


@dataclass(frozen=True)
class GramProblem:
    n: int
    blocks: tuple            # (SupportBasis, multiplier Polynomial) per block
    scalar_alphas: tuple     # alpha per scalar variable c_alpha (may be empty)
    equalities: tuple
    objective: tuple         # (per-block trace coefficient..., scalar coefficient)
    name: str = "gram"

    @property
    def block_sizes(self) -> list:
        return [len(basis) for basis, _ in self.blocks]


@dataclass(frozen=True)
class GramSolution:
    """Rational approximate solution with exactly certified margins."""

    matrices: tuple          # symmetric rational matrix per block
    scalars: tuple           # rational scalar values
    lambdas: tuple           # per-block dyadic lower bound on the least eigenvalue
    residual: Rat            # max |lhs - rhs| over equalities, exact


# -- assembly -----------------------------------------------------------------


def _build_equalities(blocks, scalar_polys, rhs_poly, extra_support=()):
    """Rows tying trace forms to coefficients of rhs_poly, one per monomial."""
    rows: dict[Mono, dict] = {}

    def row(g):
        return rows.setdefault(g, {"blocks": [], "scalars": []})

    for b, (basis, mult) in enumerate(blocks):
        pts = basis.points
        for i in range(len(pts)):
            for j in range(i, len(pts)):
                base = tuple(x + y for x, y in zip(pts[i], pts[j]))
                for delta_mono, coeff in mult.terms.items():
                    g = tuple(x + y for x, y in zip(base, delta_mono))
                    row(g)["blocks"].append((b, i, j, coeff))
    for s, poly in enumerate(scalar_polys):
        for g, coeff in poly.terms.items():
            row(g)["scalars"].append((s, coeff))

    support = set(rhs_poly.terms) | set(extra_support)
    for g in support:
        if g not in rows:
            raise SupportNotCovered(
                f"monomial {g} of the target cannot be matched by any "
                f"basis product; no SOS decomposition exists over this support"
            )
    equalities = []
    for g in sorted(rows, key=grlex_key):
        data = rows[g]
        equalities.append(
            Equality(
                gamma=g,
                rhs=rhs_poly.coeff(g),
                block_entries=tuple(data["blocks"]),
                scalar_entries=tuple(data["scalars"]),
            )
        )
    return tuple(equalities)


def assemble_unconstrained(f: Polynomial, Q: SupportBasis) -> GramProblem:
    """One PSD block over Q; one equality per monomial of Q+Q."""
    if f.n != Q.n:
        raise VariableMismatch("polynomial and basis variable counts differ")
    one = Polynomial.constant(f.n, 1)
    equalities = _build_equalities([(Q, one)], [], f)
    return GramProblem(
        n=f.n,
        blocks=((Q, one),),
        scalar_alphas=(),
        equalities=equalities,
        objective=((mpq(1),), mpq(0)),
        name="unconstrained",
    )


def assemble_putinar(
    f: Polynomial,
    constraints: Sequence[Polynomial],
    k: int,
    box_scalars: bool = True,
    box_degree_one_only: bool = False,
) -> GramProblem:
    """Block SDP for the degree-2k truncated quadratic module.

    Block 0 runs over N^n_k with multiplier 1; block j over N^n_{k-w_j} with
    multiplier g_j.  With box_scalars, sign-constrained scalars c_alpha
    multiply the redundant cube constraints 1 - X^{2 alpha}; restricting to
    |alpha| = 1 keeps only the box polynomials 1 - X_i^2.
    """
    n = f.n
    if not constraints:
        return assemble_unconstrained(f, degree_simplex_points(n, k))
    if f.degree > 2 * k:
        raise ValueError(f"deg f = {f.degree} exceeds 2k = {2 * k}")
    blocks = [(degree_simplex_points(n, k), Polynomial.constant(n, 1))]
    for g in constraints:
        if g.n != n:
            raise VariableMismatch("constraint variable count differs from f")
        w = (g.degree + 1) // 2
        if k - w < 0:
            raise ValueError(f"level k={k} below half-degree of constraint {g.render()}")
        blocks.append((degree_simplex_points(n, k - w), g))
    scalar_alphas: tuple = ()
    scalar_polys: list[Polynomial] = []
    if box_scalars:
        alphas = [
            a
            for a in degree_simplex_points(n, k)
            if not box_degree_one_only or sum(a) <= 1
        ]
        scalar_alphas = tuple(alphas)
        scalar_polys = [
            Polynomial(n, {(0,) * n: 1, tuple(2 * e for e in a): -1})
            for a in alphas
        ]
    extra = degree_simplex_points(n, 2 * k).points  # rows for every monomial of N^n_D
    equalities = _build_equalities(blocks, scalar_polys, f, extra_support=extra)
    return GramProblem(
        n=n,
        blocks=tuple(blocks),
        scalar_alphas=scalar_alphas,
        equalities=equalities,
        objective=(tuple(mpq(1) for _ in blocks), mpq(1)),
        name="putinar",
    )


def assemble_hilbert(f: Polynomial, D: int, eps: Rat = mpq(0)) -> GramProblem:
    """Numerator/denominator Gram pair for sigma_D * f = sigma.

    Block 0 (G) is indexed by the Minkowski half-support of f at level D,
    block 1 (H) by N^n_D; rows equate the coefficients of sigma with those
    of sigma_D * f minus eps on even basis monomials (the numerator solved
    for is sigma_D * f - eps * t, whose Gram must keep a strict margin, so
    eps-halving probes interiority of the numerator), plus the
    normalization trace(H) = 1.  The objective maximizes trace(G).
    """
    if D < 1:
        raise ValueError("denominator half-degree D must be >= 1")
    n = f.n
    QD = minkowski_half_support(f, D)
    H_basis = degree_simplex_points(n, D)
    one = Polynomial.constant(n, 1)

    rows: dict[Mono, dict] = {}

    def row(g):
        return rows.setdefault(g, {"blocks": [], "scalars": []})

    # sigma side: -<B_gamma, G>
    pts = QD.points
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            g = tuple(x + y for x, y in zip(pts[i], pts[j]))
            row(g)["blocks"].append((0, i, j, mpq(-1)))
    # sigma_D * f side: +<F_gamma, H>
    ptset = set(pts)
    hpts = H_basis.points
    for i in range(len(hpts)):
        for j in range(i, len(hpts)):
            base = tuple(x + y for x, y in zip(hpts[i], hpts[j]))
            for delta_mono, coeff in f.terms.items():
                g = tuple(x + y for x, y in zip(base, delta_mono))
                row(g)["blocks"].append((1, i, j, coeff))

    equalities = []
    for g in sorted(rows, key=grlex_key):
        half = tuple(e // 2 for e in g)
        even = all(e % 2 == 0 for e in g)
        rhs = rat(eps) if (even and half in ptset) else mpq(0)
        data = rows[g]
        equalities.append(
            Equality(
                gamma=g,
                rhs=rhs,
                block_entries=tuple(data["blocks"]),
                scalar_entries=(),
            )
        )
    trace_row = Equality(
        gamma=None,
        rhs=mpq(1),
        block_entries=tuple((1, i, i, mpq(1)) for i in range(len(hpts))),
        scalar_entries=(),
    )
    equalities.append(trace_row)
    return GramProblem(
        n=n,
        blocks=((QD, one), (H_basis, one)),
        scalar_alphas=(),
        equalities=tuple(equalities),
        objective=((mpq(-1), mpq(0)), mpq(0)),
        name="hilbert",
    )


# -- exact positive-definiteness tools ------------------------------------------


def pd_test(M) -> bool:
    """Exact rational LDL^T positive-definiteness test (strict)."""
    n = len(M)
    work = [[rat(v) for v in row] for row in M]
    for k in range(n):
        pivot = work[k][k]
        if pivot <= 0:
            return False
        for i in range(k + 1, n):
            factor = work[i][k] / pivot
            if factor == 0:
                continue
            row_i = work[i]
            row_k = work[k]
            for j in range(k, n):
                row_i[j] -= factor * row_k[j]
    return True


def min_eig_lower_bound(M, bits: int) -> Rat:
    """Largest dyadic m/2^bits (m >= 0) with M - (m/2^bits) I exactly PD.

    Soundness: the returned value never exceeds the true least eigenvalue,
    because M - lambda I passes the strict rational Cholesky-existence test.
    Returns 0 iff M - 2^-bits I is not positive definite.
    """
    n = len(M)
    if n == 0:
        return mpq(0)
    step = pow2(-bits)

    def passes(m: int) -> bool:
        shifted = [
            [rat(M[r][c]) - (m * step if r == c else 0) for c in range(n)]
            for r in range(n)
        ]
        return pd_test(shifted)

    if not passes(1):
        return mpq(0)
    min_diag = min(rat(M[i][i]) for i in range(n))
    q = min_diag / step
    hi_cap = int(-((-q.numerator) // q.denominator)) + 1
    lo = 1
    hi = 2
    while hi <= hi_cap and passes(hi):
        lo = hi
        hi *= 2
    hi = min(hi, hi_cap + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo * step


# -- solve with exact postconditions --------------------------------------------


def solve(
    problem: GramProblem,
    delta: int,
    radius: int,
    max_iterations: Optional[int] = None,
    external_solver: Optional[str] = None,
) -> GramSolution:
    """Solve at accuracy delta and Frobenius radius, certifying exactly.

    Success means: every equality residual <= 2^-delta (recomputed in
    rational arithmetic on the truncated solution), every block passes the
    exact PD test at margin 2^-delta, every scalar is >= 2^-delta, and the
    full Frobenius norm is <= radius.  Raises Infeasible / RadiusExceeded /
    MaxIterations otherwise.
    """
    if delta < 1 or radius < 1:
        raise ValueError("delta and radius must be >= 1")
    if max_iterations is None:
        # The centering phase contracts the primal residual geometrically;
        # budget iterations proportionally to the accuracy target.
        max_iterations = max(150, 2 * delta + 60)
    margin = pow2(-delta)
    sizes = problem.block_sizes
    nb = len(sizes)
    nscal = len(problem.scalar_alphas)
    m = len(problem.equalities)

    # Scalars ride along as 1x1 blocks after the matrix blocks.
    ipm_sizes = sizes + [1] * nscal
    entries = []
    shifted_rhs = []
    for eq in problem.equalities:
        per_block = [[] for _ in range(nb + nscal)]
        trace_term = mpq(0)
        for (b, i, j, v) in eq.block_entries:
            per_block[b].append((i, j, v))
            if i != j:
                per_block[b].append((j, i, v))
            else:
                trace_term += v
        for (s, v) in eq.scalar_entries:
            per_block[nb + s].append((0, 0, v))
            trace_term += v
        entries.append(per_block)
        shifted_rhs.append(eq.rhs - margin * trace_term)

    _presolve_signs(entries, shifted_rhs, problem.name, margin, radius)

    c_diag = list(problem.objective[0]) + [problem.objective[1]] * nscal

    trunc_bits = 2 * delta
    radius_sq = mpq(radius) ** 2

    def certify(Xnum):
        mats = []
        for b, size in enumerate(ipm_sizes):
            rows = [[None] * size for _ in range(size)]
            for r in range(size):
                for c in range(r, size):
                    rows[r][c] = dyadic_trunc(mpq(Xnum[b][r][c]), trunc_bits)
            for r in range(size):
                for c in range(r):
                    rows[r][c] = rows[c][r]
                rows[r][r] = rows[r][r] + margin
            mats.append(rows)

        # Exact residual against the original (unshifted) equalities.
        worst = mpq(0)
        for eq in problem.equalities:
            lhs = mpq(0)
            for (b, i, j, v) in eq.block_entries:
                lhs += v * mats[b][i][j] * (1 if i == j else 2)
            for (s, v) in eq.scalar_entries:
                lhs += v * mats[nb + s][0][0]
            err = abs(lhs - eq.rhs)
            if err > worst:
                worst = err
        if worst > margin:
            return None, "residual"

        for b in range(nb):
            size = sizes[b]
            shifted = [
                [mats[b][r][c] - (margin if r == c else 0) for c in range(size)]
                for r in range(size)
            ]
            if not pd_test(shifted):
                return None, "margin"
        for s in range(nscal):
            if mats[nb + s][0][0] < margin:
                return None, "margin"

        frob = mpq(0)
        for b in range(nb + nscal):
            for row in mats[b]:
                for v in row:
                    frob += v * v
        if frob > radius_sq:
            return None, "radius"

        lambdas = tuple(min_eig_lower_bound(mats[b], delta) for b in range(nb))
        solution = GramSolution(
            matrices=tuple(tuple(tuple(row) for row in mats[b]) for b in range(nb)),
            scalars=tuple(mats[nb + s][0][0] for s in range(nscal)),
            lambdas=lambdas,
            residual=worst,
        )
        return solution, None

    ep = ipm.EngineProblem(
        block_sizes=ipm_sizes,
        c_diag=c_diag,
        entries=entries,
        rhs=shifted_rhs,
        name=problem.name,
    )
    if external_solver:
        from . import sdpa

        return sdpa.solve_external(external_solver, ep, delta, radius, certify)
    return ipm.run_engine(ep, delta, radius, certify, max_iterations=max_iterations)


def _presolve_signs(entries, shifted_rhs, name, margin, radius):
    """Structural rejections before any numeric work.

    Rows whose only entry is a diagonal position force that entry exactly:
    a negative forced value contradicts PSD-ness, and the forced values
    already bound the Frobenius norm from below.
    """
    forced_sq = mpq(0)
    for per_block, rhs in zip(entries, shifted_rhs):
        flat = [
            (b, e)
            for b, blk in enumerate(per_block)
            for e in blk
        ]
        if len(flat) == 1:
            (_, (i, j, v)) = flat[0]
            if i == j:
                value = rhs / v
                if value < 0:
                    raise Infeasible(
                        f"{name}: diagonal entry forced to {rhs}/{v} < 0; "
                        f"no PSD solution exists at this margin"
                    )
                forced_sq += (value + margin) ** 2
    if forced_sq > mpq(radius) ** 2:
        raise RadiusExceeded(
            f"{name}: diagonal entries forced by the coefficients already "
            f"exceed the Frobenius radius {radius}"
        )
