"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Requested object exceeds the dense-simulation size guards."""


class DegenerateProjectionError(RuntimeError):
    """Projection onto an outcome whose probability is numerically zero."""


class EstimatorStarvedError(RuntimeError):
    """No sampled shots survived post-selection; the estimate is undefined."""
