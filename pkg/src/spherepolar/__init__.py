"""Polar factorizations of conformal and projective maps of the sphere.

Algebraic (Cartan / polar) decompositions are computed next to the optimal
transport factorization S = T o U for the cost d^2/2, with closed-form
optimal maps, c-convexity checks, a Lagrangian-graph test and a discrete
optimal transport backend.
"""

__version__ = "0.1.0"

from .errors import (
    SpherePolarError,
    AntipodalPoints,
    DegenerateDistance,
    DegenerateCoordinates,
    NotLorentz,
    NotGLPlus,
    FixedPoint,
    UnsupportedScheme,
    SizeMismatch,
    NotUniform,
    NotConverged,
    SolverFailure,
    ConfigError,
)
from .policy import NumericPolicy, POLICY
