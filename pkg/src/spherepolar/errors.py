"""Exception hierarchy. Each class name doubles as the CLI error category."""


class SpherePolarError(Exception):
    category = "error"

    def __init__(self, message=""):
        super().__init__(message)
        self.category = type(self).__name__


class AntipodalPoints(SpherePolarError):
    """Minimal geodesic is not unique (points on the cut locus)."""


class DegenerateDistance(SpherePolarError):
    """Distance too close to 0 or pi for a frame-dependent construction."""


class DegenerateCoordinates(SpherePolarError):
    pass


class NotLorentz(SpherePolarError):
    """Matrix fails a Lorentz-group or GL+ invariant."""


class FixedPoint(SpherePolarError):
    pass


class UnsupportedScheme(SpherePolarError):
    pass


class SizeMismatch(SpherePolarError):
    pass


class NotUniform(SpherePolarError):
    pass


class NotConverged(SpherePolarError):
    """Entropic solver hit its iteration cap. The partial plan is attached."""

    def __init__(self, message="", plan=None):
        super().__init__(message)
        self.plan = plan


class SolverFailure(SpherePolarError):
    pass


class ConfigError(SpherePolarError):
    pass


class NotGLPlus(SpherePolarError):
    """Matrix is singular or has negative determinant."""
