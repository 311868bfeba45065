"""Exception hierarchy shared by every levelagg module."""


class LevelAggError(Exception):
    """Base class for all levelagg errors."""


class InvalidDistribution(LevelAggError, ValueError):
    """A probability vector is out of range or does not sum to one."""


class InvalidCdf(InvalidDistribution):
    """A cumulative vector decreases, leaves [0, 1], or does not end at one."""


class DomainError(LevelAggError, ValueError):
    """An argument lies outside the domain of the operation."""


class ScaleMismatch(LevelAggError, ValueError):
    """Two distributions live on different outcome scales."""


class InvalidWeights(LevelAggError, ValueError):
    pass


class InvalidCurve(LevelAggError, ValueError):
    """A grading curve breaks monotonicity or its boundary condition."""


class InvalidPhantoms(LevelAggError, ValueError):
    """A phantom system cannot be built (size cap, shape errors)."""


class ProfileError(LevelAggError, ValueError):
    """A profile does not match the aggregator it is fed to."""


class ConfigError(LevelAggError, ValueError):
    """Unknown method descriptor or bad configuration value."""


class NotDominated(LevelAggError, ValueError):
    """The profile is not a chain under pointwise CDF dominance."""


class BudgetExceeded(LevelAggError, RuntimeError):
    """An exhaustive audit would evaluate more instances than allowed."""


class PreconditionUnmet(LevelAggError, ValueError):
    """The instance does not satisfy the hypotheses of a check."""


class TransitivityViolation(LevelAggError, AssertionError):
    """Internal assertion: the MJ comparator produced a non-transitive order."""


class FileFormatError(LevelAggError, ValueError):
    """A ballot, prior, weight or phantom file is malformed."""
