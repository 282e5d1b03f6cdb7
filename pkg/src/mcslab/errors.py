"""Exception types shared across the laboratory.

Each class corresponds to one failure label used in the operation
contracts; callers can catch the narrow class or the common base.
"""


class McslabError(Exception):
    """Base class for all laboratory errors."""


class InvalidArgumentError(McslabError, ValueError):
    """An argument is malformed (wrong sign, parity, shape, or kind)."""


class OutOfRangeError(McslabError, ValueError):
    """A numeric argument lies outside its documented interval."""


class InsufficientSampleError(McslabError, ValueError):
    """The point sample is too small for the requested estimate."""


class GraphDisconnectedError(McslabError, RuntimeError):
    """The neighbor graph is disconnected at the requested radius."""

    def __init__(self, radius: float, connecting_radius: float):
        self.radius = radius
        self.connecting_radius = connecting_radius
        super().__init__(
            f"neighbor graph is disconnected at radius {radius:g}; "
            f"doubling search connects at radius {connecting_radius:g}"
        )


class AssumptionViolatedError(McslabError, RuntimeError):
    """The volume-to-reach assumption required by a certificate fails."""


class UnsupportedShapeError(McslabError, ValueError):
    """An operator shape outside the supported regime (e.g. M > N)."""


class DegenerateSpectrumError(McslabError, RuntimeError):
    """Spectral iteration met a degenerate (rank-deficient) matrix."""


class PreconditionViolatedError(McslabError, RuntimeError):
    """A runtime-checked precondition of a construction does not hold."""


class NoApplicablePairsError(McslabError, RuntimeError):
    """No sampled tuple survives the property's preconditions."""


class NumericalDisagreementError(McslabError, RuntimeError):
    """Two internal computation routes disagree beyond tolerance."""


class ConfigError(McslabError, ValueError):
    """An experiment configuration is invalid; carries itemized issues."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))
