"""Exact rational helpers: bit sizes, dyadic rounding, dyadic square roots.

All exact arithmetic in the library uses gmpy2.mpq; this module collects the
small numeric utilities every stage shares.  A "dyadic with b fractional
bits" is a rational of the form m / 2^b with integer m.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpq, mpz

Rat = mpq
RatLike = Union[int, str, Fraction, mpq]


def rat(value: RatLike, den: int | None = None) -> Rat:
    """Coerce ints, strings ('p/q'), Fractions, or mpq to mpq."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def parse_rational_literal(text: str) -> Rat:
    """Parse 'p', 'p/q', or 'b^e' (e possibly negative, as in '2^-20')."""
    s = text.strip()
    if "^" in s:
        base_s, _, exp_s = s.partition("^")
        base = int(base_s)
        exp = int(exp_s)
        if base == 0 and exp < 0:
            raise ValueError(f"invalid rational literal {text!r}")
        return mpq(base) ** exp
    return mpq(s)


def int_bitsize(b) -> int:
    """Bit size of an integer: floor(log2 |b|) + 1, with 0 mapped to 1."""
    b = mpz(b)
    return 1 if b == 0 else b.bit_length()


def rat_bitsize(q: RatLike) -> int:
    """Bit size of a reduced fraction b/c: max of the two integer bit sizes."""
    q = rat(q)
    if q == 0:
        return 1
    return max(int_bitsize(q.numerator), int_bitsize(q.denominator))


def dyadic_round(q: RatLike, bits: int) -> Rat:
    """Round to the nearest multiple of 2^-bits (ties to even)."""
    q = rat(q)
    scale = mpz(1) << bits
    num = q.numerator * scale
    den = q.denominator
    quo, rem = divmod(num, den)
    twice = 2 * rem
    if twice > den or (twice == den and (quo & 1)):
        quo += 1
    return mpq(quo, scale)


def dyadic_trunc(q: RatLike, bits: int) -> Rat:
    """Truncate toward -inf to a multiple of 2^-bits."""
    q = rat(q)
    scale = mpz(1) << bits
    return mpq((q.numerator * scale) // q.denominator, scale)


def dyadic_sqrt(q: RatLike, bits: int) -> Rat:
    """Nearest dyadic with `bits` fractional bits to sqrt(q), q >= 0.

    Returns m/2^bits where m = floor(sqrt(q)*2^bits + 1/2), i.e. the unique
    m with (2m-1)^2 <= 4^(bits+1) q < (2m+1)^2.
    """
    q = rat(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    if q == 0:
        return mpq(0)
    # t = q * 4^bits; m0 = isqrt(floor(t)) is within 1 of the answer.
    p = q.numerator << (2 * bits)
    d = q.denominator
    m = gmpy2.isqrt(p // d)
    while (2 * m + 1) ** 2 * d <= 4 * p:
        m += 1
    while m > 0 and (2 * m - 1) ** 2 * d > 4 * p:
        m -= 1
    return mpq(m, mpz(1) << bits)


def pow2(k: int) -> Rat:
    """2^k as an exact rational (k may be negative)."""
    if k >= 0:
        return mpq(mpz(1) << k)
    return mpq(1, mpz(1) << (-k))


def ceil_log2_ratio(num: Rat, floor_excluded: bool = True) -> int:
    """Smallest integer e with 2^e > num (num a positive rational)."""
    if num <= 0:
        raise ValueError("ceil_log2_ratio needs a positive rational")
    e = 0
    # Bracket by bit lengths, then adjust.
    e = int(num.numerator.bit_length() - num.denominator.bit_length())
    while pow2(e) <= num:
        e += 1
    while e > 0 and pow2(e - 1) > num:
        e -= 1
    return e
