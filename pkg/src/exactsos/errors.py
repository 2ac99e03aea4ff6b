"""Exception hierarchy shared by all certification stages."""

from __future__ import annotations


class ExactSosError(Exception):
    """Base class for all library errors."""


class PolyParseError(ExactSosError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class VariableMismatch(ExactSosError):
    """Operands or points do not share the ambient variable count."""


class ZeroPolynomial(ExactSosError):
    """An operation that needs a nonzero polynomial received zero."""


class SupportNotCovered(ExactSosError):
    """A support monomial is not a sum of two basis points.

    By the Newton-polytope support theorem this certifies that the input
    has no SOS decomposition over the candidate basis, so retrying at
    higher precision cannot help.
    """


class SolveError(ExactSosError):
    """Base class for numeric SDP engine failures."""


class Infeasible(SolveError):
    """No strictly feasible point was found at this precision."""


class RadiusExceeded(SolveError):
    """Every candidate violated the Frobenius-norm radius bound."""


class MaxIterations(SolveError):
    """The engine exhausted its iteration budget without certifying."""


class NonPositivePivot(ExactSosError):
    """Rounded Cholesky hit a pivot <= 0; the eigenvalue bound was unsound."""


class NotPSD(ExactSosError):
    """Exact LDL^T found a negative pivot or an inconsistent zero pivot."""


class UnabsorbableMonomial(ExactSosError):
    """A residual monomial is not decomposable over the basis."""


class EpsilonUnderflow(ExactSosError):
    """Perturbation halved below its floor; input likely lies on or outside
    the SOS-cone boundary."""


class PrecisionCeiling(ExactSosError):
    """Precision doubling exceeded its cap without success."""


class DegreeCapExceeded(ExactSosError):
    """The multiplier/relaxation degree loop hit its cap."""


class NotAForm(ExactSosError):
    """Input is not homogeneous of even degree."""


class MalformedCertificate(ExactSosError):
    """Certificate or problem file is structurally invalid."""
