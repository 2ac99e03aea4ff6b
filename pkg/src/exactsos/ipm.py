"""Primal-dual interior-point engine on configurable-precision floats.

Solves block-diagonal SDPs in primal form

    min  sum_b c_b tr(X_b)   s.t.   sum_b <A_ib, X_b> = rhs_i,   X_b >= 0

with a Mehrotra-style predictor-corrector using the XZ linearization.  The
working precision is tied to the requested accuracy (mantissa >= 4*delta
bits).  The engine itself is a heuristic: after every iteration whose primal
residual is small enough it hands the iterate to an exact certification
callback, and the first iterate that passes the caller's exact rational
checks is returned.  Nothing reported by the float arithmetic is trusted
downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import gmpy2
from gmpy2 import mpfr

from .errors import Infeasible, MaxIterations, RadiusExceeded
from .rational import Rat

Entry = tuple  # (row, col, value) with both symmetric positions listed


@dataclass
class EngineProblem:
    """Raw block SDP handed to the engine (rhs already margin-shifted)."""

    block_sizes: list
    c_diag: list                       # objective coefficient per block (on I)
    entries: list                      # [constraint][block] -> list of Entry (Rat values)
    rhs: list                          # Rat, one per constraint
    name: str = "sdp"


@dataclass
class EngineStats:
    iterations: int = 0
    certify_calls: int = 0
    fail_reasons: list = field(default_factory=list)


def run_engine(
    ep: EngineProblem,
    delta: int,
    radius: int,
    certify: Callable[[list], tuple],
    max_iterations: int = 200,
    prec_bits: Optional[int] = None,
) -> object:
    """Iterate until `certify` accepts an iterate; raise a SolveError otherwise.

    `certify` receives the list of primal blocks (lists of lists of mpfr) and
    returns (result, fail_reason); a non-None result stops the engine.
    """
    bits = prec_bits if prec_bits is not None else max(4 * delta, 96)
    with gmpy2.context(precision=bits):
        return _Solver(ep, delta, radius, certify, max_iterations).run()


class _Solver:
    def __init__(self, ep, delta, radius, certify, max_iterations):
        self.ep = ep
        self.delta = delta
        self.radius = radius
        self.certify = certify
        self.max_iterations = max_iterations
        self.sizes = list(ep.block_sizes)
        self.nblocks = len(self.sizes)
        self.m = len(ep.rhs)
        self.total_dim = sum(self.sizes)
        self.stats = EngineStats()

        self.A = [
            [[(r, c, mpfr(v)) for (r, c, v) in blk] for blk in ep.entries[i]]
            for i in range(self.m)
        ]
        self.b = [mpfr(v) for v in ep.rhs]
        self.cdiag = [mpfr(v) for v in ep.c_diag]
        bmax = max((abs(v) for v in self.b), default=mpfr(1))
        amax = mpfr(1)
        for i in range(self.m):
            for blk in self.A[i]:
                for (_, _, v) in blk:
                    if abs(v) > amax:
                        amax = abs(v)
        # Fat, well-centered start; scaled to the data but kept inside the
        # Frobenius radius so early iterates are not rejected for size.
        sp = max(mpfr(1), min(bmax, mpfr(radius) / (2 * gmpy2.sqrt(mpfr(self.total_dim)))))
        sd = max(mpfr(1), amax, max((abs(c) for c in self.cdiag), default=mpfr(0)))
        self.X = [_eye(nb, sp) for nb in self.sizes]
        self.Z = [_eye(nb, sd) for nb in self.sizes]
        self.y = [mpfr(0)] * self.m
        self.init_scale = sp * sd

        self.res_threshold = mpfr(2) ** (-delta) / 4
        # Below ~2^-2delta the dyadic truncation wipes out any eigenvalue
        # margin, so no iterate can certify; stop grinding there.
        self.mu_floor = mpfr(2) ** (-(2 * delta + 8))

    def _trace_all(self, blocks):
        tr = mpfr(0)
        for Mb in blocks:
            for i in range(len(Mb)):
                tr += Mb[i][i]
        return tr

    # -- main loop -----------------------------------------------------------

    def run(self):
        rp = self._primal_residual()
        rp_hist = [_inf_norm_vec(rp)]
        last_reason = None
        for it in range(self.max_iterations):
            self.stats.iterations = it + 1
            if rp_hist[-1] < self.res_threshold:
                self.stats.certify_calls += 1
                result, reason = self.certify(self.X)
                if result is not None:
                    return result
                last_reason = reason or last_reason
                self.stats.fail_reasons.append(reason)

            mu = self._mu()
            # Thin-but-feasible cones legitimately need the dual iterate to
            # grow like 1/margin while the residual still converges, so the
            # explosion guard scales with the working precision: beyond
            # 2^(bits/2) the Schur solves lose all accuracy anyway.
            blowup = max(mpfr(1), self.init_scale) * mpfr(2) ** (
                gmpy2.get_context().precision // 2
            )
            if (
                not gmpy2.is_finite(mu)
                or mu > blowup
                or self._trace_all(self.Z) > blowup
                or self._trace_all(self.X) > blowup
            ):
                raise Infeasible(
                    f"{self.ep.name}: iterates diverged; no strictly feasible "
                    f"point at this margin"
                )
            if mu < self.mu_floor:
                if rp_hist[-1] > self.res_threshold:
                    raise Infeasible(
                        f"{self.ep.name}: duality measure collapsed with primal "
                        f"residual {float(rp_hist[-1]):.3e} still above threshold"
                    )
                self._fail(last_reason, "numerics exhausted")
            if len(rp_hist) > 30 and rp_hist[-1] > self.res_threshold:
                if rp_hist[-1] > rp_hist[-30] * mpfr("0.75"):
                    raise Infeasible(
                        f"{self.ep.name}: primal residual stagnated at "
                        f"{float(rp_hist[-1]):.3e} (no strictly feasible point found)"
                    )

            try:
                self._iterate(rp, mu)
            except _NumericBreakdown as exc:
                if rp_hist[-1] < self.res_threshold and last_reason:
                    self._fail(last_reason, str(exc))
                raise Infeasible(f"{self.ep.name}: {exc}") from None
            rp = self._primal_residual()
            rp_hist.append(_inf_norm_vec(rp))

        self._fail(last_reason, f"iteration budget {self.max_iterations} spent")

    def _fail(self, reason, note):
        # A radius rejection anywhere means the Frobenius bound is the
        # binding obstruction (margin rejections at collapsed mu are
        # artifacts of over-optimizing past the certification window).
        if "radius" in self.stats.fail_reasons:
            reason = "radius"
        if reason == "radius":
            raise RadiusExceeded(
                f"{self.ep.name}: feasible iterates exceeded Frobenius radius "
                f"{self.radius} ({note})"
            )
        if reason == "margin":
            raise Infeasible(
                f"{self.ep.name}: residuals converged but no iterate kept the "
                f"strict margin 2^-{self.delta} ({note})"
            )
        raise MaxIterations(f"{self.ep.name}: no certified iterate ({note})")

    # -- one predictor-corrector iteration ------------------------------------

    def _iterate(self, rp, mu):
        Zinv = []
        for nb, Zb in zip(self.sizes, self.Z):
            L = _cholesky(Zb)
            if L is None:
                raise _NumericBreakdown("dual iterate lost definiteness")
            Zinv.append(_chol_inverse(L))

        Rd = self._dual_residual()
        XRdZi = [
            _mat_mul(_mat_mul(Xb, Rb), Zib)
            for Xb, Rb, Zib in zip(self.X, Rd, Zinv)
        ]
        M = self._schur(Zinv)
        Mchol = _cholesky_regularized(M)

        base_rhs = [
            rp[i] + self._a_dot(i, self.X) + self._a_dot(i, XRdZi)
            for i in range(self.m)
        ]

        # Feasibility-first phase: while the primal residual is above the
        # certification zone, take a pure centering step (target mu held
        # constant) so Newton effort goes into feasibility and the first
        # exactly-checked iterate keeps a fat eigenvalue margin instead of
        # sitting on the PSD boundary.  Afterwards, Mehrotra takes over.
        rp_now = _inf_norm_vec(rp)
        if rp_now > self.res_threshold / 8:
            target = mu
            rhs = [
                base_rhs[i] - self._a_dot_scaled_eye(i, target, Zinv)
                for i in range(self.m)
            ]
            dy = _chol_solve(Mchol, rhs)
            dZ = self._delta_z(Rd, dy)
            dX = self._delta_x(target, None, Zinv, dZ)
        else:
            # Predictor: affine direction (target T = 0).
            dy_a = _chol_solve(Mchol, base_rhs)
            dZ_a = self._delta_z(Rd, dy_a)
            dX_a = self._delta_x(mpfr(0), None, Zinv, dZ_a)

            ap = self._max_step(self.X, dX_a)
            ad = self._max_step(self.Z, dZ_a)
            mu_aff = self._mu_after(ap, dX_a, ad, dZ_a)
            sigma = (mu_aff / mu) ** 3 if mu > 0 else mpfr("0.1")
            # Floor sigma so mu never drops more than two decades per step:
            # certification is attempted every iteration and must not be
            # able to jump across its feasible mu window.
            sigma = min(max(sigma, mpfr("1e-2")), mpfr("0.99"))

            # Corrector with Mehrotra second-order term.
            target = sigma * mu
            corr = [_mat_mul(dXb, dZb) for dXb, dZb in zip(dX_a, dZ_a)]
            rhs_cc = [
                base_rhs[i]
                - self._a_dot_scaled_eye(i, target, Zinv)
                + self._a_dot(
                    i, [_mat_mul(Cb, Zib) for Cb, Zib in zip(corr, Zinv)]
                )
                for i in range(self.m)
            ]
            dy = _chol_solve(Mchol, rhs_cc)
            dZ = self._delta_z(Rd, dy)
            dX = self._delta_x(target, corr, Zinv, dZ)

        ap = self._max_step(self.X, dX) * mpfr("0.98")
        ad = self._max_step(self.Z, dZ) * mpfr("0.98")
        if ap <= 0 or ad <= 0:
            raise _NumericBreakdown("step length collapsed")
        for b in range(self.nblocks):
            _axpy(self.X[b], dX[b], ap)
            _axpy(self.Z[b], dZ[b], ad)
            _symmetrize(self.X[b])
            _symmetrize(self.Z[b])
        for i in range(self.m):
            self.y[i] += ad * dy[i]

    # -- directions -----------------------------------------------------------

    def _delta_z(self, Rd, dy):
        out = []
        for b in range(self.nblocks):
            nb = self.sizes[b]
            D = [row[:] for row in Rd[b]]
            for i in range(self.m):
                if self.A[i][b]:
                    yi = dy[i]
                    for (r, c, v) in self.A[i][b]:
                        D[r][c] -= yi * v
            out.append(D)
        return out

    def _delta_x(self, target, corr, Zinv, dZ):
        # dX = (target*I - corr) Zinv - X - X dZ Zinv, then symmetrized.
        out = []
        for b in range(self.nblocks):
            nb = self.sizes[b]
            T = _scale_mat(Zinv[b], target)
            if corr is not None:
                T = _mat_sub(T, _mat_mul(corr[b], Zinv[b]))
            XdZZi = _mat_mul(_mat_mul(self.X[b], dZ[b]), Zinv[b])
            D = [
                [T[r][c] - self.X[b][r][c] - XdZZi[r][c] for c in range(nb)]
                for r in range(nb)
            ]
            _symmetrize(D)
            out.append(D)
        return out

    # -- scalar helpers --------------------------------------------------------

    def _mu(self):
        tr = mpfr(0)
        for Xb, Zb in zip(self.X, self.Z):
            tr += _dot_mat(Xb, Zb)
        return tr / self.total_dim

    def _mu_after(self, ap, dX, ad, dZ):
        tr = mpfr(0)
        for b in range(self.nblocks):
            nb = self.sizes[b]
            for r in range(nb):
                Xr, dXr = self.X[b][r], dX[b][r]
                Zr, dZr = self.Z[b][r], dZ[b][r]
                for c in range(nb):
                    tr += (Xr[c] + ap * dXr[c]) * (Zr[c] + ad * dZr[c])
        return tr / self.total_dim

    def _primal_residual(self):
        return [self.b[i] - self._a_dot(i, self.X) for i in range(self.m)]

    def _dual_residual(self):
        out = []
        for b in range(self.nblocks):
            nb = self.sizes[b]
            D = [
                [
                    (self.cdiag[b] if r == c else mpfr(0)) - self.Z[b][r][c]
                    for c in range(nb)
                ]
                for r in range(nb)
            ]
            out.append(D)
        for i in range(self.m):
            yi = self.y[i]
            if yi == 0:
                continue
            for b in range(self.nblocks):
                for (r, c, v) in self.A[i][b]:
                    out[b][r][c] -= yi * v
        return out

    def _a_dot(self, i, mats):
        s = mpfr(0)
        for b in range(self.nblocks):
            blk = self.A[i][b]
            if blk:
                Mb = mats[b]
                for (r, c, v) in blk:
                    s += v * Mb[c][r]
        return s

    def _a_dot_scaled_eye(self, i, scale, Zinv):
        # <A_i, scale * Zinv> without forming the scaled matrix.
        if scale == 0:
            return mpfr(0)
        s = mpfr(0)
        for b in range(self.nblocks):
            blk = self.A[i][b]
            if blk:
                Zb = Zinv[b]
                for (r, c, v) in blk:
                    s += v * Zb[c][r]
        return s * scale

    def _schur(self, Zinv):
        m = self.m
        M = [[mpfr(0)] * m for _ in range(m)]
        for b in range(self.nblocks):
            idx = [i for i in range(m) if self.A[i][b]]
            if not idx:
                continue
            Xb = self.X[b]
            Zib = Zinv[b]
            for ii, i in enumerate(idx):
                Ei = self.A[i][b]
                Mi = M[i]
                for j in idx[ii:]:
                    s = mpfr(0)
                    for (p, q, v1) in Ei:
                        xrow = Xb[q]
                        zrow = Zib[p]  # Zinv symmetric: column p == row p
                        for (r, c, v2) in self.A[j][b]:
                            s += v1 * v2 * xrow[r] * zrow[c]
                    Mi[j] += s
        for i in range(m):
            for j in range(i):
                M[i][j] = M[j][i]
        return M

    def _max_step(self, blocks, deltas):
        alpha = mpfr(1)
        shrink = mpfr("0.8")
        for _ in range(90):
            ok = True
            for Mb, Db in zip(blocks, deltas):
                nb = len(Mb)
                trial = [
                    [Mb[r][c] + alpha * Db[r][c] for c in range(nb)]
                    for r in range(nb)
                ]
                if _cholesky(trial) is None:
                    ok = False
                    break
            if ok:
                return alpha
            alpha *= shrink
        return mpfr(0)


class _NumericBreakdown(Exception):
    pass


# -- dense mpfr matrix helpers -------------------------------------------------


def _eye(n, scale):
    return [[scale if r == c else mpfr(0) for c in range(n)] for r in range(n)]


def _symmetrize(M):
    n = len(M)
    half = mpfr("0.5")
    for r in range(n):
        for c in range(r + 1, n):
            v = (M[r][c] + M[c][r]) * half
            M[r][c] = v
            M[c][r] = v


def _axpy(M, D, alpha):
    n = len(M)
    for r in range(n):
        Mr, Dr = M[r], D[r]
        for c in range(n):
            Mr[c] += alpha * Dr[c]


def _scale_mat(M, s):
    return [[v * s for v in row] for row in M]


def _mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _mat_mul(A, B):
    n = len(A)
    k = len(B)
    cols = len(B[0]) if B else 0
    Bt = [[B[r][c] for r in range(k)] for c in range(cols)]
    out = []
    for r in range(n):
        Ar = A[r]
        row = []
        for c in range(cols):
            Bc = Bt[c]
            s = mpfr(0)
            for t in range(k):
                s += Ar[t] * Bc[t]
            row.append(s)
        out.append(row)
    return out


def _dot_mat(A, B):
    s = mpfr(0)
    for ra, rb in zip(A, B):
        for a, b in zip(ra, rb):
            s += a * b
    return s


def _inf_norm_vec(v):
    return max((abs(x) for x in v), default=mpfr(0))


def _cholesky(M):
    """Lower-triangular factor with strictly positive pivots, or None."""
    n = len(M)
    L = [[mpfr(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = M[i][j]
            Li, Lj = L[i], L[j]
            for t in range(j):
                s -= Li[t] * Lj[t]
            if i == j:
                if not gmpy2.is_finite(s) or s <= 0:
                    return None
                Li[j] = gmpy2.sqrt(s)
            else:
                Li[j] = s / Lj[j]
    return L


def _cholesky_regularized(M):
    n = len(M)
    L = _cholesky(M)
    if L is not None:
        return L
    diag_max = max((abs(M[i][i]) for i in range(n)), default=mpfr(1))
    reg = max(diag_max, mpfr(1)) * mpfr(2) ** (-gmpy2.get_context().precision // 2)
    for _ in range(40):
        Mr = [row[:] for row in M]
        for i in range(n):
            Mr[i][i] += reg
        L = _cholesky(Mr)
        if L is not None:
            return L
        reg *= 16
    raise _NumericBreakdown("normal system could not be factorized")


def _chol_inverse(L):
    """Inverse of L L^T from its Cholesky factor."""
    n = len(L)
    Linv = [[mpfr(0)] * n for _ in range(n)]
    for c in range(n):
        Linv[c][c] = 1 / L[c][c]
        for r in range(c + 1, n):
            s = mpfr(0)
            Lr = L[r]
            for t in range(c, r):
                s += Lr[t] * Linv[t][c]
            Linv[r][c] = -s / L[r][r]
    out = [[mpfr(0)] * n for _ in range(n)]
    for r in range(n):
        for c in range(r + 1):
            s = mpfr(0)
            for t in range(r, n):
                s += Linv[t][r] * Linv[t][c]
            out[r][c] = s
            out[c][r] = s
    return out


def _chol_solve(L, rhs):
    n = len(L)
    y = [mpfr(0)] * n
    for i in range(n):
        s = rhs[i]
        Li = L[i]
        for t in range(i):
            s -= Li[t] * y[t]
        y[i] = s / Li[i]
    x = [mpfr(0)] * n
    for i in range(n - 1, -1, -1):
        s = y[i]
        for t in range(i + 1, n):
            s -= L[t][i] * x[t]
        x[i] = s / L[i][i]
    return x
