"""Certify positivity over a compact box via quadratic-module multipliers.

The output identity writes f as an SOS combination of the constraints plus
non-negative multiples of the redundant cube inequalities 1 - X^(2 alpha);
every coefficient is an exact rational.
"""

from exactsos import (
    Precision,
    SemialgebraicSet,
    parse,
    putinarsos,
    round_project_putinar,
    verify,
)
from gmpy2 import mpq

f = parse("6 - X1^2 - 2*X1*X2 - 2*X2^2", 2)
S = SemialgebraicSet(2, (parse("1 - X1^2", 2), parse("1 - X2^2", 2)))
print("input f =", f.render())
print("over S: 1 - X1^2 >= 0, 1 - X2^2 >= 0")

cert = putinarsos(f, S, Precision(eps=mpq(1), delta=60, radius=60, chol=10))
print("\nrelaxation degree D =", cert.degree)
print("verified:", verify(f, cert, S).verified)
for g, terms in cert.blocks:
    if len(terms):
        print(f"multiplier {g.render()}:")
        for w, s in terms:
            print(f"  {w} * ({s.render()})^2")
for c, p in cert.scalar_terms:
    if not p.is_zero():
        print(f"scalar {c} * ({p.render()})")

print("\n-- rounding-projection variant ----------------------------------")
cert2 = round_project_putinar(f, S)
print("verified:", verify(f, cert2, S).verified,
      "| blocks:", len(cert2.blocks), "| terms:", cert2.term_count())
