"""Bounded intervals and boxes of intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["Interval", "Box"]


@dataclass(frozen=True)
class Interval:
    """A bounded interval; half-open ``[left, right)`` unless flags say otherwise.

    ``left == right`` is allowed and denotes an empty (degenerate) interval.
    """

    left: float
    right: float
    closed_left: bool = True
    closed_right: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.left) and np.isfinite(self.right)):
            raise DomainError("interval endpoints must be finite")
        if self.right < self.left:
            raise DomainError(f"interval has right < left: [{self.left}, {self.right}]")

    @classmethod
    def closed(cls, left: float, right: float) -> "Interval":
        return cls(left, right, True, True)

    @classmethod
    def coerce(cls, obj) -> "Interval":
        if isinstance(obj, Interval):
            return obj
        left, right = obj
        return cls(float(left), float(right))

    @property
    def length(self) -> float:
        return self.right - self.left

    def negated(self) -> "Interval":
        return Interval(-self.right, -self.left, self.closed_right, self.closed_left)

    def scaled(self, factor: float) -> "Interval":
        if factor <= 0:
            raise DomainError("scale factor must be positive")
        return Interval(self.left * factor, self.right * factor, self.closed_left, self.closed_right)

    def intersection_length(self, other: "Interval") -> float:
        return max(0.0, min(self.right, other.right) - max(self.left, other.left))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo = x >= self.left if self.closed_left else x > self.left
        hi = x <= self.right if self.closed_right else x < self.right
        return lo & hi


@dataclass(frozen=True)
class Box:
    """Product I_1 x ... x I_m of bounded intervals."""

    intervals: tuple[Interval, ...]

    def __init__(self, intervals: Iterable):
        object.__setattr__(self, "intervals", tuple(Interval.coerce(i) for i in intervals))
        if not self.intervals:
            raise DomainError("a box needs at least one interval")

    @property
    def m(self) -> int:
        return len(self.intervals)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(i.length for i in self.intervals)

    def hull(self) -> Interval:
        """Smallest interval containing every side (the union for overlapping sides)."""
        return Interval(min(i.left for i in self.intervals), max(i.right for i in self.intervals))

    def to_json(self) -> list[list[float]]:
        return [[i.left, i.right] for i in self.intervals]

    @classmethod
    def from_json(cls, data: Sequence) -> "Box":
        if data and not isinstance(data[0], (list, tuple)):
            data = [data]
        return cls(data)
