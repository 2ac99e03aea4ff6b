"""Matrix factorizations feeding the two certification routes.

approx_cholesky realizes finite-precision Cholesky as round-to-nearest
dyadic with a fixed number of fractional bits applied after every multiply,
divide, and square root; all data stays rational so the error matrix
L L^T - G is exactly computable.  exact_ldlt is the fully exact G = L D L^T
diagonalization used by the rounding-projection route.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .errors import NonPositivePivot, NotPSD
from .poly import Polynomial
from .polytope import SupportBasis
from .rational import Rat, dyadic_round, dyadic_sqrt, pow2, rat


@dataclass(frozen=True)
class SosTerms:
    """Weighted squares: weights c_i >= 0 and polynomials s_i."""

    weights: tuple
    polys: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.polys):
            raise ValueError("weights and polynomials must pair up")

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(zip(self.weights, self.polys))

    def extended(self, weights, polys) -> "SosTerms":
        return SosTerms(self.weights + tuple(weights), self.polys + tuple(polys))

    @staticmethod
    def empty() -> "SosTerms":
        return SosTerms((), ())


def _row_poly(coeffs, basis: SupportBasis) -> Polynomial:
    return Polynomial(
        basis.n, {alpha: c for alpha, c in zip(basis.points, coeffs) if c != 0}
    )


def chol_precision_floor(lam: Rat, r: int) -> int:
    """Smallest bits with 2^-bits < lam / (r^2 + r + (r-1) lam)."""
    bound = rat(lam) / (r * r + r + (r - 1) * rat(lam))
    bits = 1
    while pow2(-bits) >= bound:
        bits += 1
    return bits


def approx_cholesky(
    G, lam: Rat, chol_bits: int, basis: SupportBasis
) -> SosTerms:
    """Dyadically rounded Cholesky of a certified-PD rational matrix.

    lam must be a sound lower bound on the least eigenvalue; chol_bits is
    raised to the nonsingularity floor when too small.  Returns unit weights
    and s_i = (row i of L) . v_basis.  Raises NonPositivePivot if a rounded
    pivot is not positive, which means lam was unsound.
    """
    r = len(G)
    if r != len(basis):
        raise ValueError("matrix size and basis size differ")
    lam = rat(lam)
    if lam <= 0:
        raise NonPositivePivot("eigenvalue lower bound must be positive")
    floor = chol_precision_floor(lam, r)
    bits = max(chol_bits, floor)

    rnd = lambda q: dyadic_round(q, bits)
    L = [[mpq(0)] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1):
            s = rat(G[i][j])
            for t in range(j):
                s -= rnd(L[i][t] * L[j][t])
            if i == j:
                if s <= 0:
                    raise NonPositivePivot(
                        f"rounded pivot {s} <= 0 at step {i}; the eigenvalue "
                        f"bound was unsound"
                    )
                L[i][j] = dyadic_sqrt(s, bits)
                if L[i][j] == 0:
                    raise NonPositivePivot(
                        f"pivot {s} rounded to zero at {bits} fractional bits"
                    )
            else:
                L[i][j] = rnd(s / L[j][j])
    weights = tuple(mpq(1) for _ in range(r))
    # G = L L^T, so the squares come from L^T v: s_i = (column i of L) . v.
    polys = tuple(
        _row_poly([L[j][i] for j in range(r)], basis) for i in range(r)
    )
    return SosTerms(weights, polys)


def exact_ldlt(G, basis: SupportBasis) -> SosTerms:
    """Exact G = L D L^T over the rationals; weights D_i, polys from L.

    Zero pivots are skipped only when their entire remaining column is zero;
    a negative pivot or an inconsistent zero pivot raises NotPSD.  The
    recomposition L D L^T == G is verified entry by entry before returning.
    """
    r = len(G)
    if r != len(basis):
        raise ValueError("matrix size and basis size differ")
    work = [[rat(v) for v in row] for row in G]
    for i in range(r):
        for j in range(i + 1, r):
            if work[i][j] != work[j][i]:
                raise ValueError("matrix must be symmetric")
    L = [[mpq(1) if i == j else mpq(0) for j in range(r)] for i in range(r)]
    D = [mpq(0)] * r
    for k in range(r):
        pivot = work[k][k]
        if pivot < 0:
            raise NotPSD(f"negative pivot {pivot} at step {k}")
        if pivot == 0:
            if any(work[i][k] != 0 for i in range(k + 1, r)):
                raise NotPSD(
                    f"zero pivot with nonzero column at step {k}; "
                    f"matrix is not positive semidefinite"
                )
            continue
        D[k] = pivot
        for i in range(k + 1, r):
            L[i][k] = work[i][k] / pivot
        for i in range(k + 1, r):
            lik = L[i][k]
            if lik == 0:
                continue
            row_i = work[i]
            row_k = work[k]
            for j in range(k, r):
                row_i[j] -= lik * row_k[j]

    # Recomposition check: sum_k D_k L[i][k] L[j][k] == G[i][j].
    for i in range(r):
        for j in range(i + 1):
            acc = mpq(0)
            for k in range(min(i, j) + 1):
                if D[k] != 0:
                    acc += D[k] * L[i][k] * L[j][k]
            if acc != rat(G[i][j]):
                raise NotPSD(
                    f"LDL^T recomposition mismatch at ({i},{j}); "
                    f"rank structure is inconsistent"
                )

    weights = []
    polys = []
    for k in range(r):
        if D[k] == 0:
            continue
        coeffs = [L[i][k] if i >= k else mpq(0) for i in range(r)]
        weights.append(D[k])
        polys.append(_row_poly(coeffs, basis))
    return SosTerms(tuple(weights), tuple(polys))
