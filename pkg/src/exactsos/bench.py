"""Desk-scale benchmark harness with built-in problem suites.

Each instance records its certification mode and per-instance parameters
(the perturbation/precision ranges the methods are known to need differ per
family).  The harness runs every instance, re-verifies each produced
certificate through the independent checker, and emits both a text table
and a machine-readable CSV with header id,n,d,mode,status,bits,seconds.
Timings are informational; acceptance never binds on them.
"""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from gmpy2 import mpq

from .certificate import Certificate, write_certificate
from .errors import ExactSosError
from .extensions import hilbertsos, reznicksos, squares_sum
from .gram import Precision
from .poly import Polynomial, parse
from .polytope import degree_simplex_points
from .putinar import SemialgebraicSet, putinarsos, round_project_putinar
from .rational import pow2
from .unconstrained import CertifyOptions, intsos, round_project
from .verify import verify

DEFAULT_SEED = 20240801


@dataclass(frozen=True)
class BenchInstance:
    id: str
    mode: str                      # intsos | roundproject | reznick | hilbert | putinar | rp-putinar
    build: Callable[[random.Random], tuple]   # -> (f, S or None)
    prec: Precision = Precision()
    max_degree: Optional[int] = None
    expect_success: bool = True
    opts: Optional[CertifyOptions] = None


@dataclass
class BenchRow:
    id: str
    n: int
    d: int
    mode: str
    status: str
    bits: int
    seconds: float
    certificate: Optional[Certificate] = None
    detail: str = ""

    def as_csv(self):
        return [
            self.id,
            self.n,
            self.d,
            self.mode,
            self.status,
            self.bits,
            f"{self.seconds:.3f}",
        ]


def _sec2_example(_rng):
    return parse("4*X1^4 + 4*X1^3*X2 - 7*X1^2*X2^2 - 2*X1*X2^3 + 10*X2^4", 2), None


def _random_interior_quartic(n):
    def build(rng):
        basis = degree_simplex_points(n, 2).points
        f = Polynomial.zero(n)
        for _ in range(3):
            p = Polynomial(n, {a: mpq(rng.randint(-3, 3)) for a in basis})
            f = f + p * p
        t = Polynomial(n, {tuple(2 * e for e in a): pow2(-5) for a in basis})
        return f + t, None

    return build


def _random_pd_quartic_form(n):
    def build(rng):
        quad = [a for a in degree_simplex_points(n, 2).points if sum(a) == 2]
        f = Polynomial.zero(n)
        for _ in range(n):
            p = Polynomial(n, {a: mpq(rng.randint(-2, 2)) for a in quad})
            f = f + p * p
        gn2 = squares_sum(n) * squares_sum(n)
        return f + gn2.scale(pow2(-5)), None

    return build


def _perturbed_motzkin(bits):
    def build(_rng):
        c = 1 + pow2(-bits)
        f = Polynomial(
            3, {(0, 0, 6): c, (4, 2, 0): c, (2, 4, 0): c, (2, 2, 2): mpq(-3)}
        )
        return f, None

    return build


def _motzkin(_rng):
    return parse("X1^4*X2^2 + X1^2*X2^4 - 3*X1^2*X2^2*X3^2 + X3^6", 3), None


def _boundary_square(_rng):
    # (X1^2 + X2^2 - 1)^2: a square, hence SOS, but on the cone boundary.
    g = parse("X1^2 + X2^2 - 1", 2)
    return g * g, None


def _putinar_example(_rng):
    f = parse("6 - X1^2 - 2*X1*X2 - 2*X2^2", 2)
    S = SemialgebraicSet(2, (parse("1 - X1^2", 2), parse("1 - X2^2", 2)))
    return f, S


def _box_simple(_rng):
    return parse("2 - X1^2", 1), SemialgebraicSet(1, (parse("1 - X1^2", 1),))


SUITES = {
    "unconstrained-small": [
        BenchInstance("sec2-example", "intsos", _sec2_example,
                      Precision(eps=mpq(1), delta=60, radius=60, chol=10)),
        BenchInstance("sec2-roundproject", "roundproject", _sec2_example),
        BenchInstance("r2-analogue", "intsos", _random_interior_quartic(2)),
        BenchInstance("r3-analogue", "intsos", _random_interior_quartic(3)),
        BenchInstance("r2-roundproject", "roundproject", _random_interior_quartic(2)),
    ],
    "reznick": [
        BenchInstance("M20", "reznick", _perturbed_motzkin(20),
                      Precision(eps=pow2(-20), delta=60, radius=60, chol=60)),
        BenchInstance("M100", "reznick", _perturbed_motzkin(100),
                      Precision(eps=pow2(-100), delta=200, radius=200, chol=120)),
        BenchInstance("r4-form", "reznick", _random_pd_quartic_form(4)),
    ],
    "hilbert": [
        BenchInstance("sec2-hilbert", "hilbert", _sec2_example, max_degree=2),
    ],
    "putinar-small": [
        BenchInstance("putinar-example", "putinar", _putinar_example,
                      Precision(eps=mpq(1), delta=60, radius=60, chol=10)),
        BenchInstance("putinar-rp", "rp-putinar", _putinar_example),
        BenchInstance("box-simple", "putinar", _box_simple),
    ],
    "boundary": [
        # Expected failures: a 2^-32 floor already demonstrates the
        # underflow diagnosis without grinding to the 2^-128 default.
        BenchInstance("motzkin", "intsos", _motzkin, expect_success=False,
                      opts=CertifyOptions(eps_floor_bits=32)),
        BenchInstance("boundary-square", "intsos", _boundary_square,
                      expect_success=False,
                      opts=CertifyOptions(eps_floor_bits=32)),
    ],
}


def certify_instance(
    mode: str,
    f: Polynomial,
    S: Optional[SemialgebraicSet],
    prec: Precision,
    max_degree: Optional[int] = None,
    opts: CertifyOptions = CertifyOptions(),
) -> Certificate:
    """Dispatch to the certifier selected by mode and verify the result."""
    if mode == "intsos":
        cert = intsos(f, prec, opts)
    elif mode == "roundproject":
        cert = round_project(f, prec, opts)
    elif mode == "reznick":
        cert = reznicksos(f, prec, max_degree or 10, opts)
    elif mode == "hilbert":
        cert = hilbertsos(f, prec, max_degree or 3, opts)
    elif mode == "putinar":
        if S is None:
            S = SemialgebraicSet(f.n, ())
        cert = putinarsos(f, S, prec, max_degree or 8, opts)
    elif mode == "rp-putinar":
        if S is None:
            S = SemialgebraicSet(f.n, ())
        cert = round_project_putinar(f, S, prec, max_degree or 8, opts)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report = verify(f, cert, S if cert.kind == "putinar" else None)
    if not report.verified:
        raise ExactSosError(f"produced certificate failed verification: {report.message}")
    return cert


def run_instance(inst: BenchInstance, seed: int, opts: CertifyOptions) -> BenchRow:
    rng = random.Random(f"{seed}:{inst.id}")
    f, S = inst.build(rng)
    if inst.opts is not None:
        opts = inst.opts
    start = time.perf_counter()
    try:
        cert = certify_instance(inst.mode, f, S, inst.prec, inst.max_degree, opts)
        elapsed = time.perf_counter() - start
        return BenchRow(
            id=inst.id, n=f.n, d=f.degree, mode=inst.mode,
            status="success", bits=cert.max_coeff_bitsize(),
            seconds=elapsed, certificate=cert,
        )
    except ExactSosError as exc:
        elapsed = time.perf_counter() - start
        return BenchRow(
            id=inst.id, n=f.n, d=f.degree, mode=inst.mode,
            status=f"failure:{type(exc).__name__}", bits=0,
            seconds=elapsed, detail=str(exc)[:200],
        )


def run_suite(
    name: str,
    seed: int = DEFAULT_SEED,
    out_dir=None,
    opts: CertifyOptions = CertifyOptions(),
    jobs: int = 1,
) -> list:
    """Run a built-in suite (or every suite for name='all'); returns rows."""
    if name == "all":
        instances = [i for suite in SUITES.values() for i in suite]
    elif name in SUITES:
        instances = SUITES[name]
    else:
        raise ValueError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}, all"
        )
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda i: run_instance(i, seed, opts), instances))
    else:
        rows = [run_instance(inst, seed, opts) for inst in instances]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / f"{name}.csv", seed)
        for row in rows:
            if row.certificate is not None:
                write_certificate(row.certificate, out / f"{row.id}.cert")
    return rows


def write_csv(rows, path, seed: int) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(f"# seed={seed}\n")
        writer = csv.writer(fh)
        writer.writerow(["id", "n", "d", "mode", "status", "bits", "seconds"])
        for row in rows:
            writer.writerow(row.as_csv())


def format_table(rows, seed: int) -> str:
    header = f"{'id':<22}{'n':>3}{'d':>4}  {'mode':<14}{'status':<26}{'bits':>9}{'seconds':>9}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.id:<22}{r.n:>3}{r.d:>4}  {r.mode:<14}{r.status:<26}"
            f"{r.bits:>9}{r.seconds:>9.2f}"
        )
    lines.append(f"(seed {seed})")
    return "\n".join(lines)
