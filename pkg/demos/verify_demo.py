"""The exact checker as a standalone audit tool.

Certificates are plain data; the checker recomputes the defining identity
with rational polynomial arithmetic only, so a tampered weight is caught
with an itemized report of the offending monomials.
"""

from exactsos import Certificate, Polynomial, SosTerms, parse, verify
from gmpy2 import mpq

f = parse("4*X1^4 + 4*X1^3*X2 - 7*X1^2*X2^2 - 2*X1*X2^3 + 10*X2^4", 2)
witness = SosTerms(
    (mpq(1), mpq(1)),
    (parse("2*X1*X2 + X2^2", 2), parse("2*X1^2 + X1*X2 - 3*X2^2", 2)),
)
cert = Certificate(
    kind="unconstrained", n=2, input_poly=f,
    blocks=((Polynomial.constant(2, 1), witness),),
)
print("pristine certificate verified:", verify(f, cert).verified)

tampered = Certificate(
    kind="unconstrained", n=2, input_poly=f,
    blocks=((Polynomial.constant(2, 1),
             SosTerms((mpq(1) + mpq(1, 10**6), mpq(1)), witness.polys)),),
)
report = verify(f, tampered)
print("tampered certificate verified:", report.verified)
print("report:", report.message)
for gamma, diff in report.mismatches:
    print(f"  monomial {gamma}: off by {diff}")
