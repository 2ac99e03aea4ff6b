"""Certificate container and its deterministic text file format.

The format is line-oriented with a fixed field order so that identical runs
produce byte-identical files:

    kind: unconstrained | reznick | hilbert | putinar
    variables: <n>
    degree: <D>                     (optional)
    input: <polynomial>
    block:
    multiplier: <polynomial>
    term: <weight> ; <polynomial>   (repeated)
    scalar: <weight> ; <polynomial> (repeated, Putinar only)
    denominator:
    term: <weight> ; <polynomial>   (repeated)

Weights are exact rationals 'p' or 'p/q'; polynomials use the shared ASCII
grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .errors import MalformedCertificate, PolyParseError
from .factor import SosTerms
from .poly import Polynomial, parse
from .rational import Rat

KINDS = ("unconstrained", "reznick", "hilbert", "putinar")


@dataclass(frozen=True)
class Certificate:
    """Weighted SOS data certifying the defining identity of its kind.

    kind 'unconstrained': input = sum of weighted squares of block 0.
    kind 'reznick':  input * (denominator expansion) = block 0, denominator
                     being the multiplier power written as weighted squares.
    kind 'hilbert':  input * (denominator expansion) = block 0.
    kind 'putinar':  input = sum_j g_j * block_j + sum scalar_terms.
    """

    kind: str
    n: int
    input_poly: Polynomial
    blocks: tuple                 # ((multiplier Polynomial, SosTerms), ...)
    scalar_terms: tuple = ()      # ((weight, Polynomial), ...)
    denominator: Optional[SosTerms] = None
    degree: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedCertificate(f"unknown certificate kind {self.kind!r}")

    def max_coeff_bitsize(self) -> int:
        """Largest bit size over all weights and polynomial coefficients."""
        from .rational import rat_bitsize

        best = 1
        groups = list(self.blocks)
        if self.denominator is not None:
            groups.append((Polynomial.constant(self.n, 1), self.denominator))
        for _, terms in groups:
            for w, s in terms:
                best = max(best, rat_bitsize(w), s.coeff_bitsize())
        for w, p in self.scalar_terms:
            best = max(best, rat_bitsize(w), p.coeff_bitsize())
        return best

    def term_count(self) -> int:
        count = sum(len(terms) for _, terms in self.blocks) + len(self.scalar_terms)
        if self.denominator is not None:
            count += len(self.denominator)
        return count


def format_certificate(cert: Certificate) -> str:
    lines = [f"kind: {cert.kind}", f"variables: {cert.n}"]
    if cert.degree is not None:
        lines.append(f"degree: {cert.degree}")
    lines.append(f"input: {cert.input_poly.render()}")
    for multiplier, terms in cert.blocks:
        lines.append("block:")
        lines.append(f"multiplier: {multiplier.render()}")
        for w, s in terms:
            lines.append(f"term: {w} ; {s.render()}")
    for w, p in cert.scalar_terms:
        lines.append(f"scalar: {w} ; {p.render()}")
    if cert.denominator is not None:
        lines.append("denominator:")
        for w, s in cert.denominator:
            lines.append(f"term: {w} ; {s.render()}")
    return "\n".join(lines) + "\n"


def write_certificate(cert: Certificate, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_certificate(cert))


def parse_certificate(text: str) -> Certificate:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedCertificate("empty certificate file")

    def take(prefix: str, line: str) -> str:
        if not line.startswith(prefix):
            raise MalformedCertificate(f"expected {prefix!r}, got {line!r}")
        return line[len(prefix):].strip()

    pos = 0
    kind = take("kind:", lines[pos]); pos += 1
    if kind not in KINDS:
        raise MalformedCertificate(f"unknown kind {kind!r}")
    try:
        n = int(take("variables:", lines[pos])); pos += 1
    except ValueError as exc:
        raise MalformedCertificate(f"bad variable count: {exc}") from None
    degree = None
    if pos < len(lines) and lines[pos].startswith("degree:"):
        try:
            degree = int(take("degree:", lines[pos])); pos += 1
        except ValueError as exc:
            raise MalformedCertificate(f"bad degree: {exc}") from None
    if pos >= len(lines):
        raise MalformedCertificate("missing input polynomial")
    try:
        input_poly = parse(take("input:", lines[pos]), n); pos += 1
    except PolyParseError as exc:
        raise MalformedCertificate(f"bad input polynomial: {exc}") from None

    def read_term(line: str, label: str):
        body = take(f"{label}:", line)
        if ";" not in body:
            raise MalformedCertificate(f"missing ';' in {line!r}")
        w_text, _, p_text = body.partition(";")
        try:
            w = mpq(w_text.strip())
            p = parse(p_text.strip(), n)
        except (ValueError, PolyParseError) as exc:
            raise MalformedCertificate(f"bad term {line!r}: {exc}") from None
        return w, p

    blocks = []
    scalar_terms = []
    denominator = None
    while pos < len(lines):
        line = lines[pos]
        if line == "block:":
            pos += 1
            if pos >= len(lines):
                raise MalformedCertificate("block without multiplier")
            try:
                multiplier = parse(take("multiplier:", lines[pos]), n); pos += 1
            except PolyParseError as exc:
                raise MalformedCertificate(f"bad multiplier: {exc}") from None
            weights, polys = [], []
            while pos < len(lines) and lines[pos].startswith("term:"):
                w, p = read_term(lines[pos], "term"); pos += 1
                weights.append(w)
                polys.append(p)
            blocks.append((multiplier, SosTerms(tuple(weights), tuple(polys))))
        elif line.startswith("scalar:"):
            scalar_terms.append(read_term(line, "scalar")); pos += 1
        elif line == "denominator:":
            pos += 1
            weights, polys = [], []
            while pos < len(lines) and lines[pos].startswith("term:"):
                w, p = read_term(lines[pos], "term"); pos += 1
                weights.append(w)
                polys.append(p)
            denominator = SosTerms(tuple(weights), tuple(polys))
        else:
            raise MalformedCertificate(f"unexpected line {line!r}")
    return Certificate(
        kind=kind,
        n=n,
        input_poly=input_poly,
        blocks=tuple(blocks),
        scalar_terms=tuple(scalar_terms),
        denominator=denominator,
        degree=degree,
    )


def read_certificate(path) -> Certificate:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return parse_certificate(fh.read())
    except OSError as exc:
        raise MalformedCertificate(f"cannot read certificate: {exc}") from None
