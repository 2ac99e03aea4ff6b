"""Walk through the two unconstrained certifiers on a classic quartic.

The input is SOS with an explicit two-square witness, so everything the
pipeline produces can be compared against exact ground truth.
"""

from exactsos import Precision, intsos, parse, round_project, verify
from gmpy2 import mpq

f = parse("4*X1^4 + 4*X1^3*X2 - 7*X1^2*X2^2 - 2*X1*X2^3 + 10*X2^4", 2)
print("input f =", f.render())

# Hand-written witness: f = (2 X1 X2 + X2^2)^2 + (2 X1^2 + X1 X2 - 3 X2^2)^2
s1 = parse("2*X1*X2 + X2^2", 2)
s2 = parse("2*X1^2 + X1*X2 - 3*X2^2", 2)
print("hand witness reproduces f:", s1 * s1 + s2 * s2 == f)

print("\n-- perturb / solve / absorb ------------------------------------")
cert = intsos(f, Precision(eps=mpq(1), delta=60, radius=60, chol=10))
print("verified:", verify(f, cert).verified)
for w, s in cert.blocks[0][1]:
    print(f"  {w} * ({s.render()})^2")

print("\n-- round / project / exact LDL^T --------------------------------")
cert2 = round_project(f)
print("verified:", verify(f, cert2).verified)
for w, s in cert2.blocks[0][1]:
    print(f"  {w} * ({s.render()})^2")
