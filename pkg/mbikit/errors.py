"""Exception types raised across mbikit.

Each exception carries a human-readable message; ``DegenerateState`` also
records where on a grid (or in a batch of samples) admissibility failed so the
CLI can report the offending node.
"""
from __future__ import annotations

from typing import Optional, Sequence


class MbiKitError(Exception):
    """Base class for all mbikit errors."""


class DegenerateState(MbiKitError, ValueError):
    """Raised when a state leaves the admissible (hyperbolic) regime.

    ``index`` is the flat or multi-dimensional index of the first offending
    sample, ``point`` its spacetime location when known, and ``value`` the
    quantity that failed the threshold (usually ℓ²).
    """

    def __init__(
        self,
        message: str,
        index: Optional[Sequence[int]] = None,
        point: Optional[Sequence[float]] = None,
        value: Optional[float] = None,
    ):
        super().__init__(message)
        self.index = tuple(int(i) for i in index) if index is not None else None
        self.point = tuple(float(x) for x in point) if point is not None else None
        self.value = value

    def location_report(self) -> dict:
        return {
            'message': str(self),
            'index': list(self.index) if self.index is not None else None,
            'point': list(self.point) if self.point is not None else None,
            'value': self.value,
        }


class FrameSingularity(MbiKitError, ValueError):
    """The null frame is undefined at (or too close to) the spatial origin."""


class NotCausal(MbiKitError, ValueError):
    """A vector passed where a future-directed causal vector is required."""


class InsufficientHistory(MbiKitError, RuntimeError):
    """Not enough stored snapshots (or time derivatives) for the request."""


class InsufficientData(MbiKitError, ValueError):
    """Too few usable samples to fit a decay exponent."""


class ConfigError(MbiKitError, ValueError):
    """Run configuration failed validation."""


__all__ = [
    'MbiKitError',
    'DegenerateState',
    'FrameSingularity',
    'NotCausal',
    'InsufficientHistory',
    'InsufficientData',
    'ConfigError',
]
