"""Exception types raised by the solver library."""


class ElasticaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGridError(ElasticaError):
    """Parameter grid violates its invariants (too few nodes, bad widths)."""


class PresetError(ElasticaError):
    """Unknown curve preset or preset parameter out of range."""


class DegenerateMeshError(ElasticaError):
    """An edge of the polygon is shorter than the degeneracy threshold.

    Carries the offending edge index (edge ``j`` runs from vertex ``j-1``
    to vertex ``j``, cyclically).
    """

    def __init__(self, edge, length, threshold):
        self.edge = int(edge)
        self.length = float(length)
        self.threshold = float(threshold)
        super().__init__(
            f"degenerate mesh: edge {self.edge} has length {self.length:.3e} "
            f"<= threshold {self.threshold:.3e}"
        )


class UnsupportedDimensionError(ElasticaError):
    """Operation only defined for a specific ambient dimension."""


class TurningNumberError(ElasticaError):
    """Summed turning angles do not add up to an integer multiple of 2*pi."""


class NonFiniteInputError(ElasticaError):
    """Input arrays contain NaN or infinity."""


class InvalidMonitorError(ElasticaError):
    """Monitor function returned a nonpositive value."""


class SolverFailureError(ElasticaError):
    """Direct solve failed (singular or numerically rank-deficient matrix).

    ``pivot_index`` is the zero-pivot column located by a dense elimination
    diagnostic, or None when the system was too large to diagnose densely.
    """

    def __init__(self, message, pivot_index=None):
        self.pivot_index = pivot_index
        if pivot_index is not None:
            message = f"{message} (pivot index {pivot_index})"
        super().__init__(message)


class SolverAccuracyError(ElasticaError):
    """Solution residual exceeded the acceptance threshold."""

    def __init__(self, residual, threshold):
        self.residual = float(residual)
        self.threshold = float(threshold)
        super().__init__(
            f"solve residual {self.residual:.3e} exceeds {self.threshold:.3e}"
        )


class MeshCollapseError(ElasticaError):
    """A time step produced a degenerate polygon.

    ``step`` is the 1-based index of the step that failed; it is filled in
    by the time-stepping driver.
    """

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)


class BlowDownError(ElasticaError):
    """Reference radius ODE reached a nonpositive radius."""


class UnsupportedReferenceError(ElasticaError):
    """Analytic reference requested for a preset it does not cover."""


class EocUndefinedError(ElasticaError):
    """Order-of-convergence ratio undefined (nonpositive error values)."""


class ConfigError(ElasticaError):
    """Invalid run configuration or config file."""
