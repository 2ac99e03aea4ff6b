"""Sparse SDP text interchange (SDPA-style) and the external-solver bridge.

Writer layout: line 1 = number of constraints, line 2 = number of blocks,
line 3 = block sizes (negative size = diagonal block), line 4 = right-hand
side vector, then 5-tuples `matno blockno i j value` with matno 0 for the
objective and 1..m for constraints; indices are 1-based upper triangle.
Values are written exactly ('p' or 'p/q'), which keeps round-trips
bit-exact; the reader also accepts decimal and scientific literals and
skips comment lines starting with '"' or '*'.

The external bridge exports the margin-shifted problem, runs a user
command `cmd in.dat-s out.sol`, and reads back primal block entries as
`blockno i j value` lines; the returned matrices then pass through exactly
the same rational certification as internal iterates, so a wrong or sloppy
external solver can never produce an accepted-but-false solution.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from gmpy2 import mpfr, mpq

import gmpy2

from .errors import ExactSosError, Infeasible
from .ipm import EngineProblem
from .rational import Rat, rat


@dataclass(frozen=True)
class SparseSdp:
    """Raw standard-form data: min <C,X> s.t. <A_i,X> = b_i, X PSD blocks."""

    block_sizes: tuple          # negative entries mean diagonal blocks
    rhs: tuple
    entries: tuple              # ((matno, blockno, i, j, value), ...) 1-based

    @property
    def num_constraints(self) -> int:
        return len(self.rhs)


def _format_value(v: Rat) -> str:
    v = rat(v)
    return str(v)


def format_sparse(sdp: SparseSdp, comment: str = "") -> str:
    lines = []
    if comment:
        for ln in comment.splitlines():
            lines.append(f'"{ln}')
    lines.append(str(sdp.num_constraints))
    lines.append(str(len(sdp.block_sizes)))
    lines.append(" ".join(str(s) for s in sdp.block_sizes))
    lines.append(" ".join(_format_value(v) for v in sdp.rhs))
    for (matno, blockno, i, j, value) in sdp.entries:
        lines.append(f"{matno} {blockno} {i} {j} {_format_value(value)}")
    return "\n".join(lines) + "\n"


def write_sparse(sdp: SparseSdp, path, comment: str = "") -> None:
    Path(path).write_text(format_sparse(sdp, comment), encoding="ascii")


def _parse_value(tok: str) -> Rat:
    try:
        return mpq(tok)  # handles 'p' and 'p/q'
    except ValueError:
        # decimal or scientific literal; parse exactly
        mant, _, exp = tok.lower().partition("e")
        exp_val = int(exp) if exp else 0
        if "." in mant:
            whole, _, frac = mant.partition(".")
            digits = (whole or "0") + frac
            exp_val -= len(frac)
        else:
            digits = mant
        base = mpq(int(digits))
        return base * mpq(10) ** exp_val


def parse_sparse(text: str) -> SparseSdp:
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in '"*':
            continue
        rows.append(line.replace(",", " ").split())
    if len(rows) < 4:
        raise ExactSosError("sparse SDP file needs at least 4 data lines")
    m = int(rows[0][0])
    nblocks = int(rows[1][0])
    sizes = tuple(int(t) for t in rows[2][:nblocks])
    rhs_tokens: list[str] = []
    idx = 3
    while len(rhs_tokens) < m and idx < len(rows):
        rhs_tokens.extend(rows[idx])
        idx += 1
    if len(rhs_tokens) < m:
        raise ExactSosError("sparse SDP file truncated in the rhs vector")
    rhs = tuple(_parse_value(t) for t in rhs_tokens[:m])
    entries = []
    for row in rows[idx:]:
        if len(row) != 5:
            raise ExactSosError(f"bad 5-tuple line: {' '.join(row)!r}")
        entries.append(
            (int(row[0]), int(row[1]), int(row[2]), int(row[3]), _parse_value(row[4]))
        )
    return SparseSdp(block_sizes=sizes, rhs=rhs, entries=tuple(entries))


def read_sparse(path) -> SparseSdp:
    return parse_sparse(Path(path).read_text(encoding="ascii"))


# -- engine problem <-> sparse form -------------------------------------------


def engine_to_sparse(ep: EngineProblem) -> SparseSdp:
    """Export the (already margin-shifted) engine problem."""
    entries = []
    for b, coef in enumerate(ep.c_diag):
        if coef != 0:
            for i in range(ep.block_sizes[b]):
                entries.append((0, b + 1, i + 1, i + 1, rat(coef)))
    for ci, per_block in enumerate(ep.entries):
        for b, blk in enumerate(per_block):
            for (r, c, v) in blk:
                if r <= c:
                    entries.append((ci + 1, b + 1, r + 1, c + 1, rat(v)))
    return SparseSdp(
        block_sizes=tuple(ep.block_sizes),
        rhs=tuple(rat(v) for v in ep.rhs),
        entries=tuple(entries),
    )


def sparse_to_engine(sdp: SparseSdp, name: str = "imported") -> EngineProblem:
    sizes = [abs(s) for s in sdp.block_sizes]
    c_diag = [mpq(0)] * len(sizes)
    entries = [[[] for _ in sizes] for _ in range(sdp.num_constraints)]
    obj_diag_only = True
    for (matno, blockno, i, j, value) in sdp.entries:
        b = blockno - 1
        r, c = i - 1, j - 1
        if matno == 0:
            if r == c:
                c_diag[b] = rat(value)  # diagonal objective profile
            else:
                obj_diag_only = False
            continue
        lst = entries[matno - 1][b]
        lst.append((r, c, rat(value)))
        if r != c:
            lst.append((c, r, rat(value)))
    if not obj_diag_only:
        raise ExactSosError(
            "imported objective has off-diagonal entries; the internal "
            "engine only models trace-type objectives"
        )
    return EngineProblem(
        block_sizes=sizes,
        c_diag=c_diag,
        entries=entries,
        rhs=list(sdp.rhs),
        name=name,
    )


# -- external solver bridge -----------------------------------------------------


def parse_solution(text: str, block_sizes) -> list:
    """Primal blocks from `blockno i j value` lines (1-based, symmetric)."""
    mats = [
        [[mpq(0) for _ in range(s)] for _ in range(s)] for s in block_sizes
    ]
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in '"*#':
            continue
        toks = line.split()
        if len(toks) != 4:
            raise ExactSosError(f"bad solution line {line!r}")
        b, i, j = int(toks[0]) - 1, int(toks[1]) - 1, int(toks[2]) - 1
        v = _parse_value(toks[3])
        mats[b][i][j] = v
        mats[b][j][i] = v
    return mats


def solve_external(cmd: str, ep: EngineProblem, delta: int, radius: int, certify):
    """Run an external solver on the shifted problem; certify its answer.

    Contract: `cmd <problem.dat-s> <out.sol>` writes primal block entries as
    `blockno i j value` lines.  The entries are converted at 4*delta bits
    and pushed through the exact certification callback; any failure is
    reported as Infeasible at this precision.
    """
    with tempfile.TemporaryDirectory(prefix="exactsos-sdp-") as tmp:
        prob_path = Path(tmp) / "problem.dat-s"
        sol_path = Path(tmp) / "out.sol"
        comment = (
            f"margin-shifted Gram SDP; delta={delta} radius={radius}; "
            f"add 2^-{delta} I back to each block"
        )
        write_sparse(engine_to_sparse(ep), prob_path, comment=comment)
        proc = subprocess.run(
            [cmd, str(prob_path), str(sol_path)],
            capture_output=True,
            timeout=3600,
        )
        if proc.returncode != 0:
            raise Infeasible(
                f"external solver exited with {proc.returncode}: "
                f"{proc.stderr.decode(errors='replace')[:400]}"
            )
        mats_q = parse_solution(
            sol_path.read_text(encoding="ascii"), ep.block_sizes
        )
    with gmpy2.context(precision=max(4 * delta, 96)):
        mats = [[[mpfr(v) for v in row] for row in M] for M in mats_q]
        result, reason = certify(mats)
    if result is None:
        raise Infeasible(
            f"external solution failed exact certification ({reason})"
        )
    return result
