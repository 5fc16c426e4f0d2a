# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Exceptions


class MmlocError(Exception):
    """
    Base class of every error raised by the package.
    """


class GeometryError(MmlocError, ValueError):
    """
    Invalid or degenerate geometry (zero range, coincident points, missing scatterer, |elevation| = pi/2).
    """


class UnderdeterminedError(MmlocError, ValueError):
    """
    Not enough anchors for the requested model.
    """


class SingularSystemError(MmlocError, ArithmeticError):
    def __init__(self, msg: str, cond: float = float("inf")) -> None:
        """
        Raised when a normal or covariance matrix is numerically singular.

        :param msg: Description of the failing system.
        :type msg: str
        :param cond: Condition number of the offending matrix.
        :type cond: float
        """
        super().__init__(f"{msg} (cond={cond:.3e})")
        self.cond = cond


class UnobservableError(SingularSystemError):
    """
    Singular Fisher information matrix.
    """


class DivergenceError(MmlocError, ArithmeticError):
    """
    Non-finite iterate, estimate or training loss.
    """


class DimensionError(MmlocError, ValueError):
    """
    Vector, matrix or network shape mismatch.
    """


class ConfigError(MmlocError, ValueError):
    """
    Unknown preset, family or estimator name, or an invalid configuration value.
    """


class EnsembleError(MmlocError, RuntimeError):
    """
    No ensemble member produced an estimate.
    """


class RunAborted(MmlocError, RuntimeError):
    """
    Raised by critical/fatal log calls and by runs with too many failed trials.
    """


__all__ = [
    "MmlocError",
    "GeometryError",
    "UnderdeterminedError",
    "SingularSystemError",
    "UnobservableError",
    "DivergenceError",
    "DimensionError",
    "ConfigError",
    "EnsembleError",
    "RunAborted",
]
