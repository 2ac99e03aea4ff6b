"""Command-line frontend: certify, check, and bench subcommands.

Exit codes
    certify:  0 success (certificate written and verified)
              3 EpsilonUnderflow          4 PrecisionCeiling
              5 DegreeCapExceeded         6 no SOS support / unabsorbable
              7 solver found no strictly feasible point
              2 malformed input           1 other library error
    check:    0 verified, 1 falsified, 2 malformed input
    bench:    0 every instance matched its expectation, 1 otherwise
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from gmpy2 import mpq

from . import bench as bench_mod
from .certificate import read_certificate, write_certificate
from .errors import (
    DegreeCapExceeded,
    EpsilonUnderflow,
    ExactSosError,
    MalformedCertificate,
    NotAForm,
    PolyParseError,
    PrecisionCeiling,
    SolveError,
    SupportNotCovered,
    UnabsorbableMonomial,
)
from .gram import Precision
from .poly import Polynomial, parse
from .putinar import SemialgebraicSet, read_problem
from .rational import parse_rational_literal
from .unconstrained import CertifyOptions
from .verify import verify

MODES = ("intsos", "roundproject", "reznick", "hilbert", "putinar", "rp-putinar")

_ERROR_CODES = (
    (EpsilonUnderflow, 3),
    (PrecisionCeiling, 4),
    ((DegreeCapExceeded, NotAForm), 5),
    ((SupportNotCovered, UnabsorbableMonomial), 6),
    (SolveError, 7),
    ((MalformedCertificate, PolyParseError), 2),
)


def _exit_code(exc: ExactSosError) -> int:
    for kinds, code in _ERROR_CODES:
        if isinstance(exc, kinds):
            return code
    return 1


def _load_input(args):
    """Returns (f, S or None, k hint) from a file path or inline text."""
    if Path(args.input).exists():
        return read_problem(args.input)
    if args.vars is not None:
        n = args.vars
    else:
        # Infer the variable count from the largest index mentioned.
        import re

        indices = [int(m) for m in re.findall(r"X(\d+)", args.input)]
        if not indices:
            raise PolyParseError("no variables found; pass -n explicitly", 0)
        n = max(indices)
    f = parse(args.input, n)
    constraints = [parse(g, n) for g in args.constraint]
    S = SemialgebraicSet(n, tuple(constraints)) if constraints else None
    return f, S, None


def _precision_from(args) -> Precision:
    return Precision(
        eps=parse_rational_literal(args.eps),
        delta=args.delta,
        radius=args.radius,
        chol=args.chol,
        round=args.round,
    )


def _options_from(args) -> CertifyOptions:
    return CertifyOptions(
        eps_floor_bits=args.eps_floor_bits,
        max_rounds=args.max_rounds,
        oracle_cmd=args.oracle,
        solver=args.solver,
    )


def cmd_certify(args) -> int:
    try:
        f, S, k_hint = _load_input(args)
        prec = _precision_from(args)
        opts = _options_from(args)
        max_degree = args.max_degree if args.max_degree is not None else k_hint
        start = time.perf_counter()
        cert = bench_mod.certify_instance(args.mode, f, S, prec, max_degree, opts)
        elapsed = time.perf_counter() - start
    except ExactSosError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    out_path = args.output or "certificate.cert"
    write_certificate(cert, out_path)
    if not args.quiet:
        print(
            f"kind: {cert.kind}  terms: {cert.term_count()}  "
            f"max-coeff-bits: {cert.max_coeff_bitsize()}  "
            f"time: {elapsed:.2f}s  -> {out_path}"
        )
    return 0


def cmd_check(args) -> int:
    try:
        f, S, _ = read_problem(args.problem)
        cert = read_certificate(args.certificate)
        report = verify(f, cert, S if cert.kind == "putinar" else None)
    except (MalformedCertificate, PolyParseError, ExactSosError) as exc:
        print(f"malformed: {exc}", file=sys.stderr)
        return 2
    if report.verified:
        if not args.quiet:
            print("verified")
        return 0
    print(f"falsified: {report.message}", file=sys.stderr)
    for gamma, diff in report.mismatches[:10]:
        print(f"  at {gamma}: off by {diff}", file=sys.stderr)
    return 1


def cmd_bench(args) -> int:
    opts = CertifyOptions(solver=args.solver)
    rows = bench_mod.run_suite(
        args.suite, seed=args.seed, out_dir=args.out_dir, opts=opts, jobs=args.jobs
    )
    print(bench_mod.format_table(rows, args.seed))
    suites = (
        [i for s in bench_mod.SUITES.values() for i in s]
        if args.suite == "all"
        else bench_mod.SUITES[args.suite]
    )
    expected = {i.id: i.expect_success for i in suites}
    ok = all(
        (row.status == "success") == expected.get(row.id, True) for row in rows
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="exactsos",
        description="Exact rational SOS certificates of polynomial non-negativity",
    )
    sub = top.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="compute and verify a certificate")
    cert.add_argument("input", help="problem file or inline polynomial")
    cert.add_argument("-n", "--vars", type=int, help="variable count for inline input")
    cert.add_argument("-g", "--constraint", action="append", default=[],
                      help="inline constraint polynomial g >= 0 (repeatable)")
    cert.add_argument("--mode", choices=MODES, default="intsos")
    cert.add_argument("--eps", default="1/1024",
                      help="initial perturbation, e.g. 1, 1/3, 2^-20")
    cert.add_argument("--delta", type=int, default=60, help="SDP accuracy bits")
    cert.add_argument("--radius", type=int, default=60, help="Frobenius bound")
    cert.add_argument("--chol", type=int, default=10, help="Cholesky rounding bits")
    cert.add_argument("--round", type=int, default=10,
                      help="rounding bits for the projection method")
    cert.add_argument("--max-degree", type=int, default=None,
                      help="cap on the multiplier degree / relaxation level")
    cert.add_argument("--eps-floor-bits", type=int, default=128,
                      help="give up when eps < 2^-this")
    cert.add_argument("--max-rounds", type=int, default=10,
                      help="precision-doubling rounds")
    cert.add_argument("--solver", default="internal",
                      help="'internal' or 'external:<path>'")
    cert.add_argument("--oracle", default=None,
                      help="external non-negativity oracle command")
    cert.add_argument("-o", "--output", default=None, help="certificate file path")
    cert.add_argument("-q", "--quiet", action="store_true")
    cert.set_defaults(func=cmd_certify)

    chk = sub.add_parser("check", help="verify a certificate file exactly")
    chk.add_argument("problem", help="problem file")
    chk.add_argument("certificate", help="certificate file")
    chk.add_argument("-q", "--quiet", action="store_true")
    chk.set_defaults(func=cmd_check)

    ben = sub.add_parser("bench", help="run a built-in benchmark suite")
    ben.add_argument("suite",
                     help=f"suite name ({', '.join(sorted(bench_mod.SUITES))}, all)")
    ben.add_argument("--seed", type=int, default=bench_mod.DEFAULT_SEED)
    ben.add_argument("--out-dir", default=None,
                     help="write CSV and certificate files here")
    ben.add_argument("--jobs", type=int, default=1)
    ben.add_argument("--solver", default="internal")
    ben.set_defaults(func=cmd_bench)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except PolyParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
