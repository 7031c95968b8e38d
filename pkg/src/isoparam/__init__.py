"""Numerical geometry of isoparametric and transnormal functions on Sp(2).

Modules
-------
quaternion
    Quaternion arithmetic on ``(..., 4)`` arrays.
sp2
    The group Sp(2), its Lie algebra, left-invariant metrics, geodesics.
calculus
    Finite-difference gradients, Hessians, Laplacians and a dependence test.
sp2_function
    Closed forms for ``F(Q) = Re(a)`` and the geometry of its level sets.
gromoll_meyer
    The S^3 biquotient action and the induced function on the quotient.
levels
    Mean-curvature profiles, focal identities and conformal deformation.
munzner
    Cohomology forced by a splitting into two ball bundles.
report, cli
    Verification suites and the command-line front end.
"""
from .errors import (
    DegenerateOrbitError,
    DomainError,
    FocalPointError,
    InconsistentFocalData,
    InsufficientSamplesError,
    IsoparamError,
    SpectrumMismatchError,
    UnclassifiedError,
)
from .quaternion import Quaternion
from .sp2 import BIINVARIANT_METRIC, STANDARD_METRIC, MetricWeights, Sp2Algebra, Sp2Element, Sp2Tangent

__version__ = "0.1.0"

__all__ = [
    "BIINVARIANT_METRIC",
    "DegenerateOrbitError",
    "DomainError",
    "FocalPointError",
    "InconsistentFocalData",
    "InsufficientSamplesError",
    "IsoparamError",
    "MetricWeights",
    "STANDARD_METRIC",
    "Quaternion",
    "SpectrumMismatchError",
    "Sp2Algebra",
    "Sp2Element",
    "Sp2Tangent",
    "UnclassifiedError",
]
