"""Exception types shared across the package."""


class GeometryDomainError(ValueError):
    """Geometric parameter outside its valid range (radius, curvature, angle)."""


class DegenerateOrbitError(ValueError):
    """Orbit radius vanishes at an interior node of a mode problem."""


class AxisCrossingError(RuntimeError):
    """Profile integration hit the rotation axis (r -> 0)."""


class StiffnessError(RuntimeError):
    """Adaptive integrator underflowed its step size."""


class NoSolutionError(RuntimeError):
    """Shooting bracket contains no sign change of the boundary residual."""


class SolverFailure(RuntimeError):
    """Eigen or linear solver failed to converge; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
