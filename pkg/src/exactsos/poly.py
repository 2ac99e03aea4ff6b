"""Sparse multivariate polynomials over the exact rationals.

A polynomial in n variables is a map from exponent tuples (length n,
non-negative ints) to nonzero mpq coefficients.  All arithmetic is exact;
there is no floating point anywhere in this module.

Text grammar (ASCII): terms joined by '+'/'-'; a term is an optional
rational coefficient ('p' or 'p/q') followed by '*'-separated powers
'Xi^k' (k omitted means 1); whitespace is insignificant.  Example:
'-7*X1^2*X2^2'.  Variables are X1..Xn.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

from .errors import PolyParseError, VariableMismatch, ZeroPolynomial
from .rational import Rat, RatLike, rat, rat_bitsize

Mono = tuple  # exponent tuple, one non-negative int per variable


def grlex_key(alpha: Mono):
    """Graded-lexicographic sort key: degree first, then lex."""
    return (sum(alpha), alpha)


class Polynomial:
    """Immutable sparse polynomial; `terms` maps exponent tuple -> mpq != 0."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Mono, RatLike]):
        if n < 0:
            raise ValueError("variable count must be non-negative")
        clean: dict[Mono, Rat] = {}
        for alpha, c in terms.items():
            c = rat(c)
            if c == 0:
                continue
            if len(alpha) != n or any(e < 0 for e in alpha):
                raise ValueError(f"bad exponent vector {alpha!r} for n={n}")
            alpha = tuple(int(e) for e in alpha)
            clean[alpha] = clean.get(alpha, mpq(0)) + c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", {a: c for a, c in clean.items() if c != 0})

    def __setattr__(self, *_):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "Polynomial":
        return Polynomial(n, {})

    @staticmethod
    def constant(n: int, c: RatLike) -> "Polynomial":
        return Polynomial(n, {(0,) * n: rat(c)})

    @staticmethod
    def variable(n: int, i: int) -> "Polynomial":
        """The polynomial X_{i+1} (0-based index i)."""
        if not 0 <= i < n:
            raise ValueError(f"variable index {i} out of range for n={n}")
        alpha = tuple(1 if j == i else 0 for j in range(n))
        return Polynomial(n, {alpha: 1})

    @staticmethod
    def monomial(n: int, alpha: Sequence[int], c: RatLike = 1) -> "Polynomial":
        return Polynomial(n, {tuple(alpha): rat(c)})

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0 by convention."""
        return max((sum(a) for a in self.terms), default=0)

    def support(self) -> list[Mono]:
        return sorted(self.terms, key=grlex_key)

    def coeff(self, alpha: Sequence[int]) -> Rat:
        return self.terms.get(tuple(alpha), mpq(0))

    def is_form(self) -> bool:
        """True iff all terms share the same total degree (zero counts)."""
        degs = {sum(a) for a in self.terms}
        return len(degs) <= 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[tuple[Mono, Rat]]:
        return iter(sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0])))

    # -- arithmetic ----------------------------------------------------------

    def _check_same_n(self, other: "Polynomial"):
        if self.n != other.n:
            raise VariableMismatch(
                f"operands have {self.n} and {other.n} variables"
            )

    def __add__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        self._check_same_n(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, mpq(0)) + c
        return Polynomial(self.n, out)

    def __radd__(self, other) -> "Polynomial":
        return self.__add__(other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other) -> "Polynomial":
        return (-self).__add__(other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check_same_n(other)
        out: dict[Mono, Rat] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                g = tuple(x + y for x, y in zip(a, b))
                out[g] = out.get(g, mpq(0)) + ca * cb
        return Polynomial(self.n, out)

    def __rmul__(self, other) -> "Polynomial":
        return self.scale(other)

    def scale(self, c: RatLike) -> "Polynomial":
        c = rat(c)
        return Polynomial(self.n, {a: v * c for a, v in self.terms.items()})

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- evaluation and sizes --------------------------------------------------

    def eval(self, point: Sequence[RatLike]) -> Rat:
        """Exact evaluation by Horner recursion on the last variable."""
        if len(point) != self.n:
            raise VariableMismatch(
                f"point has {len(point)} coordinates, polynomial has {self.n}"
            )
        vals = [rat(p) for p in point]
        items = list(self.terms.items())
        return _horner(items, vals, self.n - 1)

    def coeff_bitsize(self) -> int:
        """tau(f): max reduced-fraction bit size over coefficients; tau(0)=1."""
        if not self.terms:
            return 1
        return max(rat_bitsize(c) for c in self.terms.values())

    def weighted_norm(self) -> Rat:
        """max |f_alpha| alpha_1! ... alpha_n! / |alpha|!  (documentation-only
        size measure used in complexity statements; not used by the pipeline)."""
        best = mpq(0)
        for alpha, c in self.terms.items():
            w = abs(c) * mpq(_multifact(alpha), _fact(sum(alpha)))
            if w > best:
                best = w
        return best

    # -- rendering -------------------------------------------------------------

    def render(self) -> str:
        """Canonical text form, graded-lex descending; parses back exactly."""
        if not self.terms:
            return "0"
        parts: list[str] = []
        for alpha in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[alpha]
            mono = "*".join(
                f"X{i + 1}" if e == 1 else f"X{i + 1}^{e}"
                for i, e in enumerate(alpha)
                if e
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.n}, {self.render()!r})"


def _horner(items: list[tuple[Mono, Rat]], vals: list[Rat], var: int) -> Rat:
    if not items:
        return mpq(0)
    if var < 0:
        # All exponents exhausted: items collapsed to constants.
        return sum((c for _, c in items), mpq(0))
    groups: dict[int, list[tuple[Mono, Rat]]] = {}
    for alpha, c in items:
        groups.setdefault(alpha[var], []).append((alpha, c))
    x = vals[var]
    acc = mpq(0)
    prev = None
    for e in sorted(groups, reverse=True):
        inner = _horner(groups[e], vals, var - 1)
        acc = inner if prev is None else acc * x ** (prev - e) + inner
        prev = e
    if prev:
        acc = acc * x**prev
    return acc


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _multifact(alpha: Mono) -> int:
    out = 1
    for e in alpha:
        out *= _fact(e)
    return out


# -- parsing ---------------------------------------------------------------


def parse(text: str, n: int) -> Polynomial:
    """Parse the ASCII grammar into a polynomial in n variables."""
    return _Parser(text, n).parse()


def render(f: Polynomial) -> str:
    return f.render()


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.pos = 0

    def parse(self) -> Polynomial:
        terms: dict[Mono, Rat] = {}
        self._skip_ws()
        if self._eof():
            raise PolyParseError("empty polynomial text", self.pos)
        sign = self._read_sign(optional=True)
        while True:
            alpha, coeff = self._read_term()
            coeff *= sign
            terms[alpha] = terms.get(alpha, mpq(0)) + coeff
            self._skip_ws()
            if self._eof():
                break
            sign = self._read_sign(optional=False)
        return Polynomial(self.n, terms)

    # one term: [rational] ['*' power]* | power ['*' power]*
    def _read_term(self) -> tuple[Mono, Rat]:
        self._skip_ws()
        start = self.pos
        coeff = mpq(1)
        have_any = False
        exps = [0] * self.n
        if self._peek() is not None and (self._peek().isdigit()):
            coeff = self._read_rational()
            have_any = True
            self._skip_ws()
            if self._peek() == "*":
                self.pos += 1
                self._skip_ws()
                self._read_powers(exps)
        elif self._peek() == "X":
            self._read_powers(exps)
            have_any = True
        else:
            raise PolyParseError("expected a coefficient or a power", self.pos)
        if not have_any:
            raise PolyParseError("empty term", start)
        return tuple(exps), coeff

    def _read_powers(self, exps: list[int]):
        while True:
            self._skip_ws()
            if self._peek() != "X":
                raise PolyParseError("expected variable 'Xi'", self.pos)
            self.pos += 1
            idx = self._read_int()
            if not 1 <= idx <= self.n:
                raise PolyParseError(
                    f"variable index {idx} out of range 1..{self.n}", self.pos
                )
            k = 1
            self._skip_ws()
            if self._peek() == "^":
                self.pos += 1
                self._skip_ws()
                k = self._read_int()
            exps[idx - 1] += k
            self._skip_ws()
            if self._peek() == "*":
                self.pos += 1
                continue
            return

    def _read_rational(self) -> Rat:
        num = self._read_int()
        self._skip_ws()
        if self._peek() == "/":
            self.pos += 1
            self._skip_ws()
            den = self._read_int()
            if den == 0:
                raise PolyParseError("zero denominator", self.pos)
            return mpq(num, den)
        return mpq(num)

    def _read_int(self) -> int:
        self._skip_ws()
        start = self.pos
        while not self._eof() and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise PolyParseError("expected an integer", self.pos)
        return int(self.text[start : self.pos])

    def _read_sign(self, optional: bool) -> Rat:
        self._skip_ws()
        ch = self._peek()
        if ch == "+":
            self.pos += 1
            return mpq(1)
        if ch == "-":
            self.pos += 1
            return mpq(-1)
        if optional:
            return mpq(1)
        raise PolyParseError("expected '+' or '-'", self.pos)

    def _skip_ws(self):
        while not self._eof() and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self):
        return None if self._eof() else self.text[self.pos]

    def _eof(self) -> bool:
        return self.pos >= len(self.text)


def require_nonzero(f: Polynomial):
    if f.is_zero():
        raise ZeroPolynomial("operation undefined for the zero polynomial")


def sum_polynomials(polys: Iterable[Polynomial], n: int) -> Polynomial:
    out: dict[Mono, Rat] = {}
    for p in polys:
        if p.n != n:
            raise VariableMismatch("mixed variable counts in sum")
        for a, c in p.terms.items():
            out[a] = out.get(a, mpq(0)) + c
    return Polynomial(n, out)
