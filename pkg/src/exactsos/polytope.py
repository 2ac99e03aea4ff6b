"""Newton polytopes and the lattice-point bases that index Gram matrices.

Hulls are computed exactly over the rationals: the point set is reduced to
its affine hull, facets of the full-dimensional reduction are enumerated by
testing every supporting hyperplane spanned by input points, and degenerate
directions are encoded as pairs of opposite inequality facets.  Exactness is
not optional here: the facet data gates which monomials may appear in SOS
summands, so a single misclassified lattice point would invalidate
certificates downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, gcd

from gmpy2 import mpq

from .errors import ZeroPolynomial
from .poly import Mono, Polynomial, grlex_key
from .rational import Rat


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of integer points: vertex set plus irredundant facets.

    Each facet is (normal, offset) with integer entries, meaning
    <normal, x> <= offset.  Lower-dimensional hulls carry equality facet
    pairs (a, b) and (-a, -b) fixing the affine hull.
    """

    n: int
    vertices: tuple[Mono, ...]
    facets: tuple[tuple[Mono, int], ...]

    def contains(self, point) -> bool:
        """Exact membership test for a rational point."""
        return all(
            sum(a * x for a, x in zip(normal, point)) <= offset
            for normal, offset in self.facets
        )

    def bounding_box(self) -> list[tuple[int, int]]:
        return [
            (min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
            for i in range(self.n)
        ]


@dataclass(frozen=True)
class SupportBasis:
    """Graded-lex ordered monomial exponents indexing Gram rows/columns."""

    n: int
    points: tuple[Mono, ...]

    @staticmethod
    def from_points(n: int, points) -> "SupportBasis":
        uniq = sorted(set(map(tuple, points)), key=grlex_key)
        return SupportBasis(n, tuple(uniq))

    @property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# -- small exact linear algebra over mpq -------------------------------------


def _row_reduce(rows: list[list[Rat]]) -> tuple[list[list[Rat]], list[int]]:
    """Reduced row echelon form; returns (rref rows, pivot column list)."""
    mat = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [v - factor * w for v, w in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def _rank(rows: list[list[Rat]]) -> int:
    return len(_row_reduce(rows)[0]) if rows else 0


def _null_space(rows: list[list[Rat]], ncols: int) -> list[list[Rat]]:
    """Basis of {w : rows @ w = 0} as rational column vectors."""
    if not rows:
        return [[mpq(i == j) for i in range(ncols)] for j in range(ncols)]
    rref, pivots = _row_reduce(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        w = [mpq(0)] * ncols
        w[fc] = mpq(1)
        for r, pc in enumerate(pivots):
            w[pc] = -rref[r][fc]
        basis.append(w)
    return basis


def _primitive(vec: list[Rat]) -> tuple:
    """Scale a rational vector to coprime integers (first nonzero > 0 kept)."""
    den = 1
    for v in vec:
        den = den * int(v.denominator) // gcd(den, int(v.denominator))
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


# -- hull construction --------------------------------------------------------


def convex_hull(points, n: int) -> LatticePolytope:
    """Exact convex hull of integer points in Z^n."""
    pts = sorted(set(map(tuple, points)), key=grlex_key)
    if not pts:
        raise ValueError("empty point set")
    if len(pts) == 1:
        return _single_point_hull(pts[0], n)

    v0 = pts[0]
    dirs = [[mpq(p[i] - v0[i]) for i in range(n)] for p in pts[1:]]
    rref, pivots = _row_reduce(dirs)
    dim = len(rref)

    facets: list[tuple[Mono, int]] = []
    # Equality facets pin the affine hull when the hull is degenerate.
    for w in _null_space(rref, n):
        normal = _primitive(w)
        offset = sum(a * x for a, x in zip(normal, v0))
        facets.append((normal, int(offset)))
        facets.append((tuple(-a for a in normal), -int(offset)))

    # Local coordinates: y_j = (x - v0)[pivot_j] expressed against the rref
    # basis; because rref rows are in reduced form, reading off the pivot
    # columns of (x - v0) after eliminating earlier pivots gives exact y.
    local = [_local_coords(p, v0, rref, pivots) for p in pts]

    if dim == 1:
        lo = min(range(len(pts)), key=lambda i: local[i][0])
        hi = max(range(len(pts)), key=lambda i: local[i][0])
        for idx, sign in ((hi, 1), (lo, -1)):
            facets.append(_lift_facet([mpq(sign)], local[idx][0] * sign, rref, pivots, v0, n))
        vertices = sorted({pts[lo], pts[hi]}, key=grlex_key)
        return LatticePolytope(n, tuple(vertices), _dedupe(facets))

    facet_set: set[tuple[Mono, int]] = set()
    for subset in itertools.combinations(range(len(pts)), dim):
        plane = _hyperplane_through(local, subset, dim)
        if plane is None:
            continue
        normal, offset = plane
        side_pos = side_neg = False
        for y in local:
            s = sum(a * v for a, v in zip(normal, y)) - offset
            if s > 0:
                side_pos = True
            elif s < 0:
                side_neg = True
            if side_pos and side_neg:
                break
        if side_pos and side_neg:
            continue
        if side_pos:  # flip so the hull sits on the <= side
            normal = [-a for a in normal]
            offset = -offset
        facet_set.add(_lift_facet(normal, offset, rref, pivots, v0, n))
    facets.extend(sorted(facet_set))

    vertices = [
        pts[i]
        for i in range(len(pts))
        if _is_vertex(local[i], facet_set, rref, pivots, v0, pts[i], dim)
    ]
    return LatticePolytope(n, tuple(sorted(vertices, key=grlex_key)), _dedupe(facets))


def _single_point_hull(p: Mono, n: int) -> LatticePolytope:
    facets = []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        facets.append((e, p[i]))
        facets.append((tuple(-a for a in e), -p[i]))
    return LatticePolytope(n, (p,), tuple(facets))


def _local_coords(p, v0, rref, pivots) -> list[Rat]:
    """Coordinates of p - v0 in the rref direction basis (exact)."""
    x = [mpq(p[i] - v0[i]) for i in range(len(v0))]
    y = []
    for r, pc in enumerate(pivots):
        y.append(x[pc])
    # x = sum_j y_j * rref[j]; since rref rows have unit pivots and zeros in
    # other pivot columns, the pivot coordinates of x are exactly the y_j.
    return y


def _hyperplane_through(local, subset, dim):
    """Hyperplane through dim points of R^dim, or None if affinely dependent."""
    base = local[subset[0]]
    rows = [
        [local[idx][j] - base[j] for j in range(dim)] for idx in subset[1:]
    ]
    null = _null_space(rows, dim)
    if len(null) != 1:
        return None
    normal = null[0]
    offset = sum(a * v for a, v in zip(normal, base))
    return normal, offset


def _lift_facet(normal, offset, rref, pivots, v0, n) -> tuple[Mono, int]:
    """Map a local-coordinate inequality back to integer data in Z^n."""
    # y_j = (x - v0)[pivots[j]] after eliminating other pivot contributions;
    # with rref rows, y_j = sum_i M[j][i] (x - v0)[i] where M selects pivot
    # columns of the inverse basis.  Because local coords read pivot entries
    # directly, the global normal has entry normal[j] at column pivots[j]
    # corrected by the non-pivot structure of rref.
    g = [mpq(0)] * n
    for j, pc in enumerate(pivots):
        g[pc] = normal[j]
    # Correct for non-pivot columns: x restricted to the affine hull satisfies
    # (x - v0) = sum_j y_j rref[j], so for any column c:
    # (x - v0)[c] = sum_j y_j rref[j][c].  Pivot columns give y directly and
    # the remaining columns are dependent, so g as built already represents
    # the functional on the affine hull; equality facets handle the rest.
    const = sum(gg * mpq(x) for gg, x in zip(g, v0))
    vec = g + [offset + const]
    prim = _primitive(vec)
    return prim[:-1], prim[-1]


def _is_vertex(y, facet_set, rref, pivots, v0, p, dim) -> bool:
    active = []
    for normal, offset in facet_set:
        val = sum(mpq(a) * mpq(x) for a, x in zip(normal, p)) - offset
        if val == 0:
            # Convert the global normal back to local coordinates: its action
            # on y equals action on x restricted to the hull.
            local_normal = [
                sum(mpq(normal[i]) * rref[j][i] for i in range(len(p)))
                for j in range(dim)
            ]
            active.append(local_normal)
    return bool(active) and _rank(active) == dim


def _dedupe(facets) -> tuple:
    seen = []
    out = []
    for f in facets:
        if f not in seen:
            seen.append(f)
            out.append(f)
    return tuple(out)


# -- spec operations ----------------------------------------------------------


def newton_polytope(f: Polynomial) -> LatticePolytope:
    """Convex hull of the exponent vectors of f (f must be nonzero)."""
    if f.is_zero():
        raise ZeroPolynomial("the zero polynomial has no Newton polytope")
    return convex_hull(f.support(), f.n)


def half_lattice_points(P: LatticePolytope) -> SupportBasis:
    """All q in N^n with 2q in P, graded-lex ordered."""
    box = P.bounding_box()
    ranges = []
    for lo, hi in box:
        lo_q = max(0, -(-lo // 2))  # ceil(lo/2), clamped at 0
        hi_q = hi // 2
        if hi_q < lo_q:
            return SupportBasis(P.n, ())
        ranges.append(range(lo_q, hi_q + 1))
    pts = [
        q
        for q in itertools.product(*ranges)
        if P.contains(tuple(2 * c for c in q))
    ]
    return SupportBasis.from_points(P.n, pts)


def degree_simplex_points(n: int, k: int) -> SupportBasis:
    """All alpha in N^n with |alpha| <= k; count is binomial(n+k, k)."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    pts = list(_simplex_iter(n, k))
    assert len(pts) == comb(n + k, k)
    return SupportBasis.from_points(n, pts)


def _simplex_iter(n: int, k: int):
    if n == 1:
        for e in range(k + 1):
            yield (e,)
        return
    for e in range(k + 1):
        for rest in _simplex_iter(n - 1, k - e):
            yield (e,) + rest


def minkowski_half_support(f: Polynomial, D: int) -> SupportBasis:
    """Half-lattice points of hull(supp(f) + N^n_{2D}), cut to degree k+D.

    Used for rational-function decompositions: the returned set indexes the
    numerator Gram matrix when the denominator has half-degree D.
    """
    if f.is_zero():
        raise ZeroPolynomial("zero polynomial")
    if D < 0:
        raise ValueError("D must be >= 0")
    n = f.n
    k = (f.degree + 1) // 2
    # hull(A + B) = hull(vертices(A) + vertices(B)); the degree simplex is
    # generated by 0 and the scaled unit vectors.
    corners = [(0,) * n] + [
        tuple(2 * D if j == i else 0 for j in range(n)) for i in range(n)
    ]
    if D == 0:
        corners = [(0,) * n]
    pts = {tuple(s + c for s, c in zip(sup, corner)) for sup in f.support() for corner in corners}
    hull = convex_hull(pts, n)
    half = half_lattice_points(hull)
    kept = [q for q in half if sum(q) <= k + D]
    return SupportBasis.from_points(n, kept)
