"""Exact rational sums-of-squares certificates of polynomial non-negativity.

The pipeline is hybrid numeric-symbolic: an arbitrary-precision SDP solve
produces an approximate Gram matrix, a precision-controlled factorization
turns it into candidate squares, and symbolic compensation repairs the
numeric error exactly.  Every returned certificate passes an independent
exact-rational verification; nothing numeric is ever trusted.

Main entry points:

    intsos, round_project      unconstrained interior-of-cone certificates
    reznicksos, hilbertsos     rational-function decompositions
    putinarsos, round_project_putinar
                               positivity over compact semialgebraic sets
    verify, reconstruct        the exact trust anchor
"""

from .certificate import (
    Certificate,
    format_certificate,
    parse_certificate,
    read_certificate,
    write_certificate,
)
from .errors import (
    DegreeCapExceeded,
    EpsilonUnderflow,
    ExactSosError,
    Infeasible,
    MalformedCertificate,
    MaxIterations,
    NonPositivePivot,
    NotAForm,
    NotPSD,
    PolyParseError,
    PrecisionCeiling,
    RadiusExceeded,
    SolveError,
    SupportNotCovered,
    UnabsorbableMonomial,
    VariableMismatch,
    ZeroPolynomial,
)
from .extensions import hilbertsos, reznicksos, squares_sum, squares_sum_power_terms
from .factor import SosTerms, approx_cholesky, exact_ldlt
from .gram import (
    GramProblem,
    GramSolution,
    Precision,
    assemble_hilbert,
    assemble_putinar,
    assemble_unconstrained,
    min_eig_lower_bound,
    solve,
)
from .poly import Polynomial, parse, render
from .polytope import (
    LatticePolytope,
    SupportBasis,
    convex_hull,
    degree_simplex_points,
    half_lattice_points,
    minkowski_half_support,
    newton_polytope,
)
from .putinar import (
    SemialgebraicSet,
    membership_heuristic,
    putinarsos,
    read_problem,
    round_project_putinar,
    write_problem,
)
from .rational import parse_rational_literal, rat, rat_bitsize
from .unconstrained import (
    CertifyOptions,
    EpsilonMap,
    absorb,
    interior_heuristic,
    intsos,
    round_project,
)
from .verify import VerifyReport, reconstruct, verify

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
