"""Local statistics of a point set on the circle R/Z.

Everything here works on the sorted values of a :class:`~sqrtcorr.seq.FracSequence`
(or any sorted array in [0, 1)), rescaled by the number of points N so that the
mean spacing is one.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import kstest

from .errors import DomainError, InsufficientDataError
from .intervals import Box, Interval
from .seq import FracSequence

__all__ = [
    "TestFunction",
    "FunctionSum",
    "CountDistribution",
    "AlphaSampler",
    "scaled_gaps",
    "ks_exponential",
    "pair_correlation",
    "pair_correlation_weighted",
    "count_in_window",
    "window_counts",
    "window_count_matrix",
    "empirical_count_distribution",
    "mixed_moment",
    "restricted_moment",
    "histogram",
]

_PAIR_CHUNK = 1 << 20


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported real function on R.

    Build instances with :meth:`indicator`, :meth:`triangle` or
    :meth:`piecewise_linear`; calling the instance evaluates it on an array.
    """

    __test__ = False  # not a pytest class

    kind: str
    a: float
    b: float
    knots: tuple[float, ...] = ()
    heights: tuple[float, ...] = ()
    closed_left: bool = True
    closed_right: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("test function needs bounded support")
        if self.b < self.a:
            raise DomainError("support must satisfy a <= b")
        if self.kind not in ("indicator", "triangle", "piecewise_linear"):
            raise DomainError(f"unknown test function kind {self.kind!r}")

    @classmethod
    def indicator(cls, a: float, b: float, closed_left: bool = True, closed_right: bool = True):
        return cls("indicator", float(a), float(b), closed_left=closed_left, closed_right=closed_right)

    @classmethod
    def triangle(cls, half_width: float = 1.0, height: float = 1.0, center: float = 0.0):
        """``height * max(0, 1 - |x - center| / half_width)``."""
        if half_width <= 0:
            raise DomainError("half_width must be positive")
        c, w = float(center), float(half_width)
        return cls("piecewise_linear", c - w, c + w, (c - w, c, c + w), (0.0, float(height), 0.0))

    @classmethod
    def piecewise_linear(cls, knots, heights):
        knots = tuple(float(k) for k in knots)
        heights = tuple(float(h) for h in heights)
        if len(knots) != len(heights) or len(knots) < 2:
            raise DomainError("need matching knots and heights, at least two of each")
        if any(k2 <= k1 for k1, k2 in zip(knots, knots[1:])):
            raise DomainError("knots must be strictly increasing")
        if heights[0] != 0.0 or heights[-1] != 0.0:
            raise DomainError("piecewise-linear test functions must vanish at the end knots")
        return cls("piecewise_linear", knots[0], knots[-1], knots, heights)

    @property
    def support(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def is_triangle(self) -> bool:
        return self.kind == "piecewise_linear" and len(self.knots) == 3

    def integral(self) -> float:
        if self.kind == "indicator":
            return self.b - self.a
        k, h = np.asarray(self.knots), np.asarray(self.heights)
        return float(np.sum(np.diff(k) * (h[1:] + h[:-1]) / 2))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "indicator":
            lo = x >= self.a if self.closed_left else x > self.a
            hi = x <= self.b if self.closed_right else x < self.b
            return (lo & hi).astype(float)
        return np.interp(x, self.knots, self.heights, left=0.0, right=0.0)

    def __add__(self, other):
        return FunctionSum((self, other))

    def describe(self) -> dict:
        d = {"kind": self.kind, "support": [self.a, self.b]}
        if self.kind == "indicator":
            d["closed"] = [self.closed_left, self.closed_right]
        else:
            d["knots"], d["heights"] = list(self.knots), list(self.heights)
        return d


@dataclass(frozen=True)
class FunctionSum:
    """Pointwise sum of compactly supported functions."""

    terms: tuple

    @property
    def support(self) -> tuple[float, float]:
        return min(t.support[0] for t in self.terms), max(t.support[1] for t in self.terms)

    def __call__(self, x):
        return sum(t(x) for t in self.terms)

    def __add__(self, other):
        return FunctionSum(self.terms + (other,))

    def integral(self) -> float:
        return sum(t.integral() for t in self.terms)


@dataclass
class CountDistribution:
    """Weighted tally of count vectors k in Z^m_{>=0}.

    Frequencies sum to ``samples``; with unit weights they are plain counts.
    """

    counts: dict[tuple[int, ...], float]
    samples: int
    m: int

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, weights: np.ndarray | None = None) -> "CountDistribution":
        vectors = np.asarray(vectors, dtype=np.int64)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        n, m = vectors.shape
        if n == 0:
            raise InsufficientDataError("no samples")
        if weights is None:
            uniq, freq = np.unique(vectors, axis=0, return_counts=True)
            counts = {tuple(int(v) for v in row): float(f) for row, f in zip(uniq, freq)}
        else:
            w = np.asarray(weights, dtype=float)
            w = w * (n / w.sum())
            uniq, inv = np.unique(vectors, axis=0, return_inverse=True)
            sums = np.bincount(inv.ravel(), weights=w, minlength=len(uniq))
            counts = {tuple(int(v) for v in row): float(f) for row, f in zip(uniq, sums)}
        return cls(counts=counts, samples=n, m=m)

    def probability(self, k) -> float:
        if np.isscalar(k):
            k = (int(k),)
        return self.counts.get(tuple(k), 0.0) / self.samples

    def expectation(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        keys = np.array(list(self.counts.keys()), dtype=float)
        freq = np.array(list(self.counts.values()))
        return float(np.sum(fn(keys) * freq) / self.samples)

    def mean(self, j: int = 0) -> float:
        return self.expectation(lambda k: k[:, j])

    def moment(self, order: int, j: int = 0) -> float:
        return self.expectation(lambda k: k[:, j] ** order)

    def cross_moment(self, i: int = 0, j: int = 1) -> float:
        return self.expectation(lambda k: k[:, i] * k[:, j])

    def marginal(self, j: int = 0) -> "CountDistribution":
        acc: Counter = Counter()
        for key, f in self.counts.items():
            acc[(key[j],)] += f
        return CountDistribution(dict(acc), self.samples, 1)

    def pmf(self, kmax: int, j: int = 0) -> np.ndarray:
        """Probabilities of k = 0..kmax for coordinate j; the last entry lumps k >= kmax."""
        out = np.zeros(kmax + 1)
        for key, f in self.counts.items():
            out[min(key[j], kmax)] += f
        return out / self.samples

    def total_variation(self, other: "CountDistribution", kmax: int | None = None) -> float:
        """TV distance; with ``kmax`` both sides are first truncated to one lumped tail cell."""
        if kmax is not None and self.m == other.m == 1:
            return 0.5 * float(np.abs(self.pmf(kmax) - other.pmf(kmax)).sum())
        keys = set(self.counts) | set(other.counts)
        return 0.5 * sum(abs(self.probability(k) - other.probability(k)) for k in keys)

    def rows(self):
        """(k..., frequency, probability) sorted by k."""
        for key in sorted(self.counts):
            f = self.counts[key]
            yield (*key, f, f / self.samples)


@dataclass
class AlphaSampler:
    """How the shift alpha is drawn from the circle.

    ``uniform_grid`` uses the midpoints (k + 1/2)/S; ``seeded_uniform_random``
    draws S uniform points from a seeded generator; ``density`` uses the grid
    with importance weights proportional to ``density(alpha)``.
    """

    mode: str = "uniform_grid"
    samples: int = 0
    seed: int | None = None
    density: Callable | None = field(default=None, repr=False)
    density_tol: float = 1e-9

    def __post_init__(self):
        if self.mode not in ("uniform_grid", "seeded_uniform_random", "density"):
            raise DomainError(f"unknown sampler mode {self.mode!r}")
        if self.mode == "seeded_uniform_random" and self.seed is None:
            raise DomainError("random alpha sampling needs an explicit seed")
        if self.mode == "density":
            if self.density is None:
                raise DomainError("density mode needs a density function")
            from scipy.integrate import quad

            total, _ = quad(lambda a: float(self.density(a)), 0.0, 1.0, limit=500, epsabs=1e-13, epsrel=1e-13)
            if abs(total - 1.0) > self.density_tol:
                raise DomainError(f"density integrates to {total!r}, not 1")

    def draw(self, default_samples: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Return (alphas, weights) with weights averaging to one."""
        S = self.samples or default_samples or 0
        if S < 1:
            raise InsufficientDataError("sampler needs at least one sample")
        if self.mode == "seeded_uniform_random":
            rng = np.random.default_rng(self.seed)
            return rng.random(S), np.ones(S)
        alphas = (np.arange(S) + 0.5) / S
        if self.mode == "uniform_grid":
            return alphas, np.ones(S)
        w = np.asarray(self.density(alphas), dtype=float)
        if np.any(w < 0):
            raise DomainError("density must be nonnegative")
        return alphas, w * (S / w.sum())

    def describe(self) -> dict:
        return {"mode": self.mode, "samples": self.samples, "seed": self.seed}


def _values(seq) -> np.ndarray:
    return seq.values if isinstance(seq, FracSequence) else np.asarray(seq, dtype=float)


def scaled_gaps(seq) -> np.ndarray:
    """The N circular nearest-neighbour gaps, each multiplied by N."""
    v = _values(seq)
    N = v.size
    if N < 2:
        raise InsufficientDataError("need at least two points for gaps")
    gaps = np.empty(N)
    gaps[:-1] = np.diff(v)
    gaps[-1] = v[0] + 1.0 - v[-1]
    return gaps * N


def ks_exponential(data) -> float:
    """Kolmogorov-Smirnov distance between the sample and the Exp(1) law."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("empty sample")
    return float(kstest(x, "expon").statistic)


def _pairs(v: np.ndarray, lo: float, hi: float):
    """Yield chunks (i, src, scaled) over ordered pairs i != src with N*(v_i - v_src + m) in [lo, hi]."""
    N = v.size
    reach = max(abs(lo), abs(hi)) / N
    K = 1 + math.ceil(reach)
    shifts = np.arange(-K, K + 1, dtype=float)
    ext = (v[None, :] + shifts[:, None]).ravel()
    src = np.tile(np.arange(N), shifts.size)
    pad = 1e-12
    start = np.searchsorted(ext, v - hi / N - pad, side="left")
    stop = np.searchsorted(ext, v - lo / N + pad, side="right")
    width = stop - start
    # chunk over i so the materialized pair list stays bounded
    cum = np.cumsum(width)
    i0 = 0
    while i0 < N:
        base = cum[i0 - 1] if i0 else 0
        i1 = int(np.searchsorted(cum, base + _PAIR_CHUNK, side="right"))
        i1 = max(i1, i0 + 1)
        idx = np.arange(i0, i1)
        w = width[idx]
        rows = np.repeat(idx, w)
        offs = np.arange(w.sum()) - np.repeat(np.cumsum(w) - w, w)
        j = np.repeat(start[idx], w) + offs
        keep = src[j] != rows
        rows, j = rows[keep], j[keep]
        yield rows, src[j], N * (v[rows] - ext[j])
        i0 = i1


def pair_correlation(seq, f) -> float:
    """(1/N) sum over m in Z and ordered pairs i != j of f(N (a_i - a_j + m))."""
    v = _values(seq)
    N = v.size
    if N < 2:
        raise InsufficientDataError("need at least two points")
    lo, hi = _support(f)
    total = 0.0
    for _, _, s in _pairs(v, lo, hi):
        total += float(np.sum(f(s)))
    return total / N


def pair_correlation_weighted(seq, g: Callable, h) -> float:
    """Two-point correlation with weight g(a_i) g(a_j) h(N (a_i - a_j + m))."""
    v = _values(seq)
    N = v.size
    if N < 2:
        raise InsufficientDataError("need at least two points")
    lo, hi = _support(h)
    gv = np.broadcast_to(np.asarray(g(v), dtype=float), v.shape)
    total = 0.0
    for i, j, s in _pairs(v, lo, hi):
        total += float(np.sum(gv[i] * gv[j] * h(s)))
    return total / N


def _support(f) -> tuple[float, float]:
    try:
        lo, hi = f.support
    except AttributeError as exc:
        raise DomainError("test function must expose a bounded .support") from exc
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("test function support must be bounded")
    return float(lo), float(hi)


def window_counts(values: np.ndarray, alphas, left: float, right: float, N: int | None = None) -> np.ndarray:
    """Number of values in the half-open arc [alpha + left/N, alpha + right/N) mod 1."""
    values = np.asarray(values)
    N = values.size if N is None else N
    alphas = np.asarray(alphas, dtype=float)
    length = (right - left) / N if N else 0.0
    if length >= 1.0:
        return np.full(alphas.shape, values.size, dtype=np.int64)
    start = np.mod(alphas + left / N, 1.0)
    end = start + length
    c_start = np.searchsorted(values, start, side="left")
    wrapped = end > 1.0
    c_end = np.searchsorted(values, np.where(wrapped, end - 1.0, end), side="left")
    return np.where(wrapped, values.size - c_start + c_end, c_end - c_start).astype(np.int64)


def count_in_window(seq, I, alpha: float) -> int:
    """#{j : a_j in N^{-1} I + alpha mod 1}, with the arc taken half-open."""
    v = _values(seq)
    I = Interval.coerce(I)
    return int(window_counts(v, np.array([alpha]), I.left, I.right)[0])


def window_count_matrix(seq, box: Box, alphas) -> np.ndarray:
    """Counts for every side of ``box`` (columns) and every alpha (rows)."""
    v = _values(seq)
    box = box if isinstance(box, Box) else Box(box)
    return np.stack([window_counts(v, alphas, I.left, I.right) for I in box.intervals], axis=1)


def _sampled_counts(seq, box, sampler):
    v = _values(seq)
    alphas, w = sampler.draw(default_samples=v.size)
    return window_count_matrix(v, box, alphas), w


def empirical_count_distribution(seq, box, sampler: AlphaSampler | None = None) -> CountDistribution:
    """Joint law of the window counts over the sampled shifts."""
    sampler = sampler or AlphaSampler()
    k, w = _sampled_counts(seq, box, sampler)
    weights = None if np.all(w == 1.0) else w
    return CountDistribution.from_vectors(k, weights)


def _moment_from_counts(k: np.ndarray, w: np.ndarray, svec, K: int | None) -> float:
    s = np.asarray(svec, dtype=float)
    if s.shape != (k.shape[1],):
        raise DomainError(f"need {k.shape[1]} exponents, got {s.size}")
    integrand = np.prod((k + 1.0) ** s, axis=1)
    if K is not None:
        integrand = np.where(k.max(axis=1) <= K, integrand, 0.0)
    return float(np.sum(integrand * w) / w.sum())


def mixed_moment(seq, box, svec, sampler: AlphaSampler | None = None) -> float:
    """Estimate of the integral over alpha of prod_j (N_j(alpha) + 1)^{s_j}."""
    sampler = sampler or AlphaSampler()
    k, w = _sampled_counts(seq, box, sampler)
    return _moment_from_counts(k, w, svec, None)


def restricted_moment(seq, box, svec, K: int, sampler: AlphaSampler | None = None) -> float:
    """As :func:`mixed_moment`, restricted to shifts where every count is <= K."""
    if K < 0:
        raise DomainError("K must be nonnegative")
    sampler = sampler or AlphaSampler()
    k, w = _sampled_counts(seq, box, sampler)
    return _moment_from_counts(k, w, svec, K)


def histogram(data, bins: int, range: tuple[float, float]) -> list[tuple[float, float, float]]:
    """Density histogram normalized by the total sample size (in-range or not)."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise InsufficientDataError("cannot histogram empty data")
    lo, hi = range
    if bins < 1 or not lo < hi:
        raise DomainError("need bins >= 1 and lo < hi")
    counts, edges = np.histogram(data, bins=bins, range=(lo, hi))
    width = (hi - lo) / bins
    dens = counts / (data.size * width)
    return [(float(edges[i]), float(edges[i + 1]), float(dens[i])) for i in np.arange(bins)]
