"""Rational-function certificate for a positive form that is not SOS.

The perturbed Motzkin form is positive semidefinite but admits no SOS
decomposition; multiplying by X1^2 + X2^2 + X3^2 moves it into the
interior, and the certificate divides the multiplier back out.
"""

from exactsos import Polynomial, Precision, reznicksos, verify
from exactsos.rational import pow2
from gmpy2 import mpq

c = 1 + pow2(-20)
f = Polynomial(3, {(0, 0, 6): c, (4, 2, 0): c, (2, 4, 0): c, (2, 2, 2): mpq(-3)})
print("input f =", f.render())

cert = reznicksos(f, Precision(eps=pow2(-20), delta=60, radius=60, chol=10))
print("multiplier degree D =", cert.degree)
print("verified:", verify(f, cert).verified)
print("denominator (expands to (X1^2+X2^2+X3^2)^D):")
for w, s in cert.denominator:
    print(f"  {w} * ({s.render()})^2")
print(f"numerator: {len(cert.blocks[0][1])} weighted squares, "
      f"max coefficient bit size {cert.max_coeff_bitsize()}")
