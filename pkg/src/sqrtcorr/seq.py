"""Fractional parts of sqrt(n) and n**alpha as sorted points on the circle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptySequenceError

__all__ = ["FracSequence", "generate", "generate_alpha_power", "sequence_count", "write_sequence"]


@dataclass(frozen=True)
class FracSequence:
    """Sorted fractional parts with the parameters that produced them.

    ``values`` is a read-only float64 array sorted ascending. ``source_indices``
    holds the n that produced each value (same order) when requested.
    """

    values: np.ndarray
    T: int
    c: float = 0.0
    alpha_exp: float = 0.5
    source_indices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)
        if self.source_indices is not None:
            self.source_indices.setflags(write=False)

    @property
    def N(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.N

    def min_distance_to_integer(self) -> float:
        v = self.values
        return float(np.min(np.minimum(v, 1.0 - v))) if v.size else math.inf


def sequence_count(T: int, c: float = 0.0) -> int:
    """Number of non-squares n with c^2 T < n <= T."""
    lo = _lower_cutoff(T, c)
    return (T - lo) - (math.isqrt(T) - math.isqrt(lo))


def _lower_cutoff(T: int, c: float) -> int:
    # largest integer n with n <= c^2 T, so the range is lo < n <= T
    if c == 0:
        return 0
    lo = math.floor(c * c * T)
    while lo > 0 and lo > c * c * T:
        lo -= 1
    while lo + 1 <= c * c * T:
        lo += 1
    return lo


def _check_T(T) -> int:
    if isinstance(T, bool) or int(T) != T:
        raise DomainError(f"T must be an integer, got {T!r}")
    T = int(T)
    if T <= 0:
        raise EmptySequenceError("T must be at least 1")
    return T


def generate(T: int, c: float = 0.0, keep_indices: bool = False) -> FracSequence:
    """Fractional parts of sqrt(n) for c^2 T < n <= T, perfect squares removed.

    Square roots use hardware double precision; square detection uses exact
    integer square roots.
    """
    T = _check_T(T)
    if not 0.0 <= c < 1.0:
        raise DomainError(f"c must lie in [0, 1), got {c!r}")
    lo = _lower_cutoff(T, c)
    n = np.arange(lo + 1, T + 1, dtype=np.int64)
    # math.isqrt is exact; np.sqrt may round up just below a square for huge n
    roots = np.sqrt(n.astype(np.float64))
    fl = np.floor(roots).astype(np.int64)
    fl -= (fl * fl > n).astype(np.int64)
    fl += ((fl + 1) * (fl + 1) <= n).astype(np.int64)
    nonsquare = fl * fl != n
    n = n[nonsquare]
    frac = roots[nonsquare] - fl[nonsquare]
    order = np.argsort(frac, kind="stable")
    return FracSequence(
        values=np.ascontiguousarray(frac[order]),
        T=T,
        c=float(c),
        source_indices=n[order] if keep_indices else None,
    )


def generate_alpha_power(T: int, alpha_exp: float, keep_indices: bool = False) -> FracSequence:
    """Fractional parts of n**alpha_exp for 1 <= n <= T.

    Exact integer powers (fractional part 0) are kept, except for
    ``alpha_exp == 0.5`` where the call is routed to :func:`generate`.
    """
    if not 0.0 < alpha_exp < 1.0:
        raise DomainError(f"alpha_exp must lie in (0, 1), got {alpha_exp!r}")
    if alpha_exp == 0.5:
        return generate(T, 0.0, keep_indices=keep_indices)
    T = _check_T(T)
    n = np.arange(1, T + 1, dtype=np.int64)
    powers = n.astype(np.float64) ** alpha_exp
    nearest = np.rint(powers)
    # snap floating noise around exact powers such as 8**(1/3) = 1.9999999999999998;
    # distinct integers are >= 1 apart, so the back-transform separates them
    exact = np.abs(nearest ** (1.0 / alpha_exp) - n) < 0.25
    frac = np.where(exact, 0.0, powers - np.floor(powers))
    order = np.argsort(frac, kind="stable")
    return FracSequence(
        values=np.ascontiguousarray(frac[order]),
        T=T,
        c=0.0,
        alpha_exp=float(alpha_exp),
        source_indices=n[order] if keep_indices else None,
    )


def write_sequence(seq: FracSequence, path) -> None:
    """One value per line with 17 significant digits after a ``# T= c= N=`` header."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# T={seq.T} c={seq.c!r} N={seq.N}\n")
        for x in seq.values:
            fh.write(f"{x:.17g}\n")
