"""Exception types shared across the package."""


class StarkLftError(Exception):
    """Base class for all package errors."""


class DomainError(StarkLftError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically too close to) a pole."""


class RangeError(StarkLftError, ValueError):
    """Result or intermediate would leave the representable floating range."""


class ConvergenceError(StarkLftError, RuntimeError):
    """An iteration, series or eigenvalue search failed to converge."""


class PlateauError(StarkLftError, RuntimeError):
    """Cutoff-scale scan found no stable plateau for a gamma matrix."""


class WindowError(StarkLftError, RuntimeError):
    """Near-origin matching window produced an unacceptable fit residual."""


class RegionError(StarkLftError, ValueError):
    """Evaluation grid extends outside the validity region of an expansion."""


class ConfigError(StarkLftError, ValueError):
    """Invalid or contradictory run configuration."""
