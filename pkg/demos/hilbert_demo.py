"""Sum-of-squares-of-rational-functions decomposition f = sigma / sigma_D.

Both sigma and sigma_D are explicit weighted SOS lists and the identity
sigma_D * f = sigma holds coefficient for coefficient.
"""

from exactsos import Precision, hilbertsos, parse, verify
from exactsos.verify import expand_sos

f = parse("4*X1^4 + 4*X1^3*X2 - 7*X1^2*X2^2 - 2*X1*X2^3 + 10*X2^4", 2)
print("input f =", f.render())

cert = hilbertsos(f, Precision(), maxD=2)
print("denominator half-degree D =", cert.degree)
print("verified:", verify(f, cert).verified)

sigma_D = expand_sos(cert.denominator, f.n)
sigma = expand_sos(cert.blocks[0][1], f.n)
print("denominator sigma_D =", sigma_D.render())
print("identity sigma_D * f == sigma:", sigma_D * f == sigma)
print("sample: sigma_D(1, 2) =", sigma_D.eval([1, 2]))
