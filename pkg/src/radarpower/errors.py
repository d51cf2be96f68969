"""Exception types shared across the package."""


class RadarPowerError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RadarPowerError, ValueError):
    """An input lies outside the physical domain of an operation."""


class GeometryError(DomainError):
    """Singular observation geometry (target at the radar origin)."""


class InfeasibleScenarioError(RadarPowerError, ValueError):
    """The power constraints cannot be met (N * p_min > P)."""


class DegenerateScenarioError(RadarPowerError, ValueError):
    """Scenario statistics collapse (e.g. zero mean demand factor)."""


class SolverFailureError(RadarPowerError, RuntimeError):
    """An iterative solver could not bracket or converge."""


class NumericalError(RadarPowerError, RuntimeError):
    """A matrix operation lost positive definiteness or became singular."""


class SchemaError(RadarPowerError, ValueError):
    """A serialized scenario has the wrong schema or version."""


class IntegrityError(SchemaError):
    """A serialized scenario failed its checksum."""


class ExprError(RadarPowerError, ValueError):
    """Base class for expression parsing errors."""


class ExprSyntaxError(ExprError):
    """Malformed expression text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExprError):
    """Identifier is not a feature name X1..X20."""


class UnknownOperatorError(ExprError):
    """Function name outside the 12-operator library."""
