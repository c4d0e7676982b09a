"""Exception types shared across the package."""


class WirecovError(Exception):
    """Base class for all package-specific errors."""


class DegenerateWire(WirecovError):
    """Two wire specifications describe the same line."""


class OutOfWorkspace(WirecovError):
    """A point lies outside the workspace polygon beyond tolerance."""


class DuplicateGenerators(WirecovError):
    """Two Voronoi generators coincide within tolerance."""


class DegenerateTriangle(WirecovError):
    """Triangle is (near-)degenerate or wrongly oriented."""


class QuadratureFailure(WirecovError):
    """Path quadrature did not reach the error target after max refinement."""


class SingularPoint(WirecovError):
    """Derivative requested at a prevertex where it is singular."""


class NoConvergence(WirecovError):
    """Iterative inversion failed; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ApexExcluded(WirecovError):
    """Point falls inside the guard disk around a region centroid."""


class OutOfRegion(WirecovError):
    """Point is not inside any deformed region at the requested time."""


class TooLarge(WirecovError):
    """Brute-force search space exceeds the complexity guard."""


class ParseError(WirecovError):
    """Scenario file could not be parsed."""


class ValidationError(WirecovError):
    """Scenario file parsed but violates an invariant."""


class FrameOutOfRange(WirecovError):
    """Requested render time lies outside the recorded trajectory."""
