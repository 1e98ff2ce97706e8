"""Exception types shared across the package."""


class GeometryError(ValueError):
    pass


class NotHyperbolic(GeometryError):
    pass


class CoincidentBoundaryPoints(GeometryError):
    pass


class DomainError(GeometryError):
    pass


class HypothesisViolated(GeometryError):
    pass


class SideCrossing(GeometryError):
    pass


class ProfileOutOfRange(GeometryError):
    pass


class OutOfTable(GeometryError):
    pass


class NoConvergence(RuntimeError):
    pass


class DeltaTooLarge(GeometryError):
    pass


class NoWitness(GeometryError):
    pass


class NotDiscrete(GeometryError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class EmptyInput(ValueError):
    pass


class ConfigError(ValueError):
    pass
