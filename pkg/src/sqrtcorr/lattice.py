"""Affine lattices Z^2 g for g in G' = SL(2,R) x R^2, and lattice-point counts in triangles.

Coordinates follow g = (1, xi) n(u) a(v) k(phi) with tau = u + iv, where

    n(u) = [[1, u], [0, 1]],  a(v) = diag(v^1/2, v^-1/2),  k(phi) = [[cos, -sin], [sin, cos]],

and the group law is (M, xi)(M', xi') = (M M', xi M' + xi').  Points act as row
vectors, x -> x M + xi, so the lattice of g is (Z^2 + xi) n(u) a(v) k(phi).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DomainError
from .intervals import Box, Interval
from .stats import CountDistribution

__all__ = [
    "AffineLattice",
    "Triangle",
    "iwasawa_decompose",
    "iwasawa_compose",
    "group_action",
    "compose_elements",
    "gamma_prime",
    "horocycle_point",
    "flow_point",
    "count_in_triangle",
    "count_in_triangles",
    "sample_random_affine_lattice",
    "sample_haar",
    "limit_process_counts",
    "limit_process_distribution",
    "limit_triangle",
    "siegel_moment_check",
    "SiegelResult",
    "lemma_window_bound",
    "jackknife_mean",
]

log = logging.getLogger(__name__)

DET_TOL = 1e-9
COND_TOL = 1e-6
CHUNK = 1 << 15
SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class AffineLattice:
    """A point (tau, phi; xi) of G'.

    ``xi`` is stored as given so that real G' elements act associatively;
    :meth:`reduced` returns the representative with xi in [0,1)^2, which is the
    same point of the quotient by Gamma'.
    """

    tau: complex
    phi: float = 0.0
    xi: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.tau.imag > 0:
            raise DomainError(f"Im tau must be positive, got {self.tau!r}")
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))
        object.__setattr__(self, "xi", (float(self.xi[0]), float(self.xi[1])))

    @property
    def u(self) -> float:
        return self.tau.real

    @property
    def v(self) -> float:
        return self.tau.imag

    def matrix(self) -> np.ndarray:
        return iwasawa_compose(self.tau, self.phi)

    def shift(self) -> np.ndarray:
        """Translation vector: the lattice is Z^2 M + shift."""
        return np.asarray(self.xi) @ self.matrix()

    def reduced(self) -> "AffineLattice":
        return AffineLattice(self.tau, self.phi, (self.xi[0] % 1.0, self.xi[1] % 1.0))

    def points(self, radius: float) -> np.ndarray:
        """All lattice points within ``radius`` of the origin (small radii only)."""
        M, s = self.matrix(), self.shift()
        Minv = np.linalg.inv(M)
        corners = np.array([[radius, radius], [radius, -radius], [-radius, radius], [-radius, -radius]])
        coef = (corners - s) @ Minv
        lo, hi = np.floor(coef.min(axis=0)) - 1, np.ceil(coef.max(axis=0)) + 1
        m1, m2 = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1))
        pts = np.stack([m1.ravel(), m2.ravel()], axis=1) @ M + s
        return pts[np.hypot(pts[:, 0], pts[:, 1]) <= radius]


def iwasawa_compose(tau: complex, phi: float) -> np.ndarray:
    u, v = tau.real, tau.imag
    sv = math.sqrt(v)
    c, s = math.cos(phi), math.sin(phi)
    na = np.array([[sv, u / sv], [0.0, 1.0 / sv]])
    return na @ np.array([[c, -s], [s, c]])


def iwasawa_decompose(M) -> tuple[complex, float]:
    """Return (tau, phi) with M = n(u) a(v) k(phi)."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) >= DET_TOL:
        raise DomainError(f"matrix is not unimodular (det = {det!r})")
    (p, q), (r, s) = M
    norm2 = r * r + s * s
    v = 1.0 / norm2
    u = (p * r + q * s) / norm2
    phi = math.atan2(r, s) % (2 * math.pi)
    return complex(u, v), phi


def compose_elements(g1, g2):
    """Product of G' elements given as (matrix, shift) pairs."""
    A1, e1 = np.asarray(g1[0], float), np.asarray(g1[1], float)
    A2, e2 = np.asarray(g2[0], float), np.asarray(g2[1], float)
    return A1 @ A2, e1 @ A2 + e2


def gamma_prime(M, m=(0, 0)):
    """The element (1, m)(M, 0) = (M, m M); with integral M and m it lies in Gamma'."""
    M = np.asarray(M, dtype=float)
    return M, np.asarray(m, dtype=float) @ M


def group_action(g, x: AffineLattice) -> AffineLattice:
    """Left multiplication by g = (A, eta) in G'.

    In coordinates: tau -> (a tau + b)/(c tau + d), phi -> phi + arg(c tau + d),
    xi -> (xi + eta) A^{-1}.  For g = gamma_prime(A, m) the shift becomes
    xi A^{-1} + m = (d xi1 - c xi2, -b xi1 + a xi2) + m.
    """
    A, eta = np.asarray(g[0], dtype=float), np.asarray(g[1], dtype=float)
    tau, phi = iwasawa_decompose(A @ x.matrix())
    (a, b), (c, d) = A
    Ainv = np.array([[d, -b], [-c, a]])
    xi = (np.asarray(x.xi) + eta) @ Ainv
    return AffineLattice(tau, phi, (xi[0], xi[1]))


def horocycle_point(u: float, v: float) -> AffineLattice:
    """The point n~(u) a(v) = (u + iv, 0; (u/2, -u^2/4)), shift reduced mod 1."""
    if not v > 0:
        raise DomainError("v must be positive")
    return AffineLattice(complex(u, v), 0.0, ((u / 2) % 1.0, (-u * u / 4) % 1.0))


def flow_point(alpha: float, t: float) -> AffineLattice:
    """n~(2 alpha) Phi^t with Phi^t = diag(e^{-t/2}, e^{t/2}) = a(e^{-t})."""
    return horocycle_point(2 * alpha, math.exp(-t))


@dataclass(frozen=True)
class Triangle:
    """Region {x_min < x < x_max, y in 2 x I}.

    The default ``x_max = 2`` is the bounding triangle of the window bound;
    the limit process uses ``x_max = 1``, whose area equals |I|.
    """

    interval: Interval
    x_min: float = 0.0
    x_max: float = 2.0

    def __init__(self, interval, x_min: float = 0.0, x_max: float = 2.0):
        if not isinstance(interval, Interval):
            interval = Interval.closed(*interval)
        object.__setattr__(self, "interval", interval)
        object.__setattr__(self, "x_min", float(x_min))
        object.__setattr__(self, "x_max", float(x_max))
        if not 0.0 <= self.x_min < self.x_max:
            raise DomainError("need 0 <= x_min < x_max")

    @property
    def area(self) -> float:
        return (self.x_max**2 - self.x_min**2) * self.interval.length

    def vertices(self) -> np.ndarray:
        a, b = self.interval.left, self.interval.right
        return np.array([[x, 2 * x * y] for x in (self.x_min, self.x_max) for y in (a, b)])

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        I = self.interval
        ok = (x > self.x_min) & (x < self.x_max)
        lo, hi = y - 2 * I.left * x, 2 * I.right * x - y
        ok &= (lo >= 0) if I.closed_left else (lo > 0)
        ok &= (hi >= 0) if I.closed_right else (hi > 0)
        return ok


def limit_triangle(I, c: float = 0.0) -> Triangle:
    """Triangle whose Haar-random lattice count has the law E_c(., I)."""
    I = Interval.coerce(I)
    if not 0.0 <= c < 1.0:
        raise DomainError("c must lie in [0, 1)")
    if c:
        I = I.scaled(1.0 / (1.0 - c * c))
    return Triangle(I, c, 1.0)


def _gauss_reduce(B: np.ndarray) -> np.ndarray:
    """Lagrange-Gauss reduction of the row bases B[k] (n, 2, 2); row 0 ends up shortest."""
    B = B.copy()
    active = np.ones(len(B), dtype=bool)
    for _ in range(200):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return B
        b1, b2 = B[idx, 0], B[idx, 1]
        n1, n2 = np.einsum("ij,ij->i", b1, b1), np.einsum("ij,ij->i", b2, b2)
        swap = n2 < n1
        b1s = np.where(swap[:, None], b2, b1)
        b2s = np.where(swap[:, None], b1, b2)
        n1s = np.where(swap, n2, n1)
        mu = np.rint(np.einsum("ij,ij->i", b1s, b2s) / n1s)
        b2s = b2s - mu[:, None] * b1s
        B[idx, 0], B[idx, 1] = b1s, b2s
        done = (mu == 0) & ~swap
        active[idx[done]] = False
    raise ConditioningError("basis reduction did not converge")


def count_in_triangles(M: np.ndarray, shift: np.ndarray, tri: Triangle) -> np.ndarray:
    """Exact counts #(tri ∩ (Z^2 M[k] + shift[k])) for a batch of affine lattices."""
    M = np.asarray(M, dtype=float).reshape(-1, 2, 2)
    shift = np.asarray(shift, dtype=float).reshape(-1, 2)
    n = len(M)
    B = _gauss_reduce(M)
    det = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    if np.any(np.abs(np.abs(det) - 1.0) > COND_TOL):
        raise ConditioningError("lattice basis is numerically degenerate")
    short, long_ = B[:, 0], B[:, 1]
    # coordinates of a point p in the reduced basis: p = c_long * long + c_short * short
    inv = np.empty_like(B)
    inv[:, 0, 0], inv[:, 0, 1] = B[:, 1, 1] / det, -B[:, 0, 1] / det
    inv[:, 1, 0], inv[:, 1, 1] = -B[:, 1, 0] / det, B[:, 0, 0] / det
    zeta = np.einsum("ni,nij->nj", shift, inv)  # (c_short, c_long) of the shift
    verts = tri.vertices()
    vc = np.einsum("vi,nij->nvj", verts, inv)
    c_long = vc[:, :, 1] - zeta[:, 1:2]
    m1_lo = np.floor(c_long.min(axis=1)) - 1
    m1_hi = np.ceil(c_long.max(axis=1)) + 1
    span = (m1_hi - m1_lo).astype(np.int64)

    I = tri.interval
    counts = np.zeros(n, dtype=np.int64)
    wx, wy = short[:, 0], short[:, 1]
    # each constraint is g0 + g1 * t (>=, >) 0 along the line p(t) = P0 + t * short
    g1 = np.stack([wx, -wx, wy - 2 * I.left * wx, 2 * I.right * wx - wy], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(int(span.max()) + 1):
            live = j <= span
            if not live.any():
                break
            m1 = m1_lo + j
            P0 = (m1 + zeta[:, 1])[:, None] * long_
            px, py = P0[:, 0], P0[:, 1]
            g0 = np.stack(
                [px - tri.x_min, tri.x_max - px, py - 2 * I.left * px, 2 * I.right * px - py], axis=1
            )
            root = -g0 / g1
            lower = np.where(g1 > 0, root, -np.inf).max(axis=1)
            upper = np.where(g1 < 0, root, np.inf).min(axis=1)
            flat_ok = np.where(g1 == 0, g0 >= 0, True).all(axis=1)
            a0 = np.ceil(lower - zeta[:, 0])
            b0 = np.floor(upper - zeta[:, 0])
            feasible = live & flat_ok & np.isfinite(a0) & np.isfinite(b0)
            a0 = np.where(feasible, a0, 0.0)
            b0 = np.where(feasible, b0, -1.0)
            inner = np.maximum(0.0, b0 - a0 - 1.0)
            # boundary candidates are decided by the exact region predicate
            extra = np.zeros(n)
            seen = []
            for cand in (a0 - 1, a0, b0, b0 + 1):
                is_inner = (cand > a0) & (cand < b0)
                dup = np.zeros(n, dtype=bool)
                for prev in seen:
                    dup |= cand == prev
                seen.append(cand)
                pts = P0 + (cand + zeta[:, 0])[:, None] * short
                hit = tri.contains(pts) & feasible & ~is_inner & ~dup
                extra += hit
            counts += (inner + extra).astype(np.int64) * feasible
    return counts


def count_in_triangle(x: AffineLattice, tri: Triangle) -> int:
    """#(tri ∩ Z^2 g) for the affine lattice g = x."""
    return int(count_in_triangles(x.matrix()[None], x.shift()[None], tri)[0])


def sample_haar(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Haar-random (tau, phi, xi) arrays: tau in the standard fundamental domain.

    u is uniform on [-1/2, 1/2] and v has density v^-2 on [sqrt(3)/2, inf);
    proposals with |tau| < 1 are rejected.
    """
    taus, drawn = [], 0
    need = n
    while need > 0:
        m = int(need * 1.15) + 16
        u = rng.random(m) - 0.5
        v = SQRT3_2 / (1.0 - rng.random(m))
        ok = u * u + v * v >= 1.0
        drawn += m
        taus.append((u + 1j * v)[ok][:need])
        need -= int(min(ok.sum(), need))
    tau = np.concatenate(taus)
    log.debug("haar sampler: %d accepted of %d proposals", n, drawn)
    phi = rng.random(n) * (2 * math.pi)
    xi = rng.random((n, 2))
    return tau, phi, xi


def sample_random_affine_lattice(rng_seed) -> AffineLattice:
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    tau, phi, xi = sample_haar(1, rng)
    return AffineLattice(complex(tau[0]), float(phi[0]), (float(xi[0, 0]), float(xi[0, 1])))


def _batch_matrices(tau: np.ndarray, phi: np.ndarray) -> np.ndarray:
    u, v = tau.real, tau.imag
    sv = np.sqrt(v)
    c, s = np.cos(phi), np.sin(phi)
    M = np.empty((tau.size, 2, 2))
    M[:, 0, 0] = sv * c + (u / sv) * s
    M[:, 0, 1] = -sv * s + (u / sv) * c
    M[:, 1, 0] = s / sv
    M[:, 1, 1] = c / sv
    return M


def _chunk_counts(seed_seq, n, triangles):
    rng = np.random.default_rng(seed_seq)
    tau, phi, xi = sample_haar(n, rng)
    M = _batch_matrices(tau, phi)
    shift = np.einsum("ni,nij->nj", xi, M)
    return np.stack([count_in_triangles(M, shift, tri) for tri in triangles], axis=1)


def limit_process_counts(box, samples: int, seed: int, c: float = 0.0, threads: int = 1) -> np.ndarray:
    """Counts (samples, m) of Haar-random affine lattice points in the limit triangles.

    The stream is cut into fixed chunks, each with its own spawned seed, so the
    result does not depend on ``threads``.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    box = box if isinstance(box, Box) else Box(box)
    triangles = [limit_triangle(I, c) for I in box.intervals]
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda a: _chunk_counts(a[0], a[1], triangles), zip(seeds, sizes)))
    else:
        parts = [_chunk_counts(s, n, triangles) for s, n in zip(seeds, sizes)]
    return np.concatenate(parts, axis=0)


def limit_process_distribution(box, samples: int, seed: int, c: float = 0.0, threads: int = 1) -> CountDistribution:
    """Monte Carlo estimate of E(k, I) from random affine lattices."""
    return CountDistribution.from_vectors(limit_process_counts(box, samples, seed, c, threads))


def jackknife_mean(x: np.ndarray, blocks: int = 100) -> tuple[float, float]:
    """Mean and delete-one-block jackknife standard error."""
    x = np.asarray(x, dtype=float)
    n = x.size
    blocks = min(blocks, n)
    if blocks < 2:
        return float(x.mean()), float("nan")
    parts = np.array_split(x, blocks)
    sums = np.array([p.sum() for p in parts])
    sizes = np.array([p.size for p in parts])
    loo = (sums.sum() - sums) / (n - sizes)
    theta = x.mean()
    se = math.sqrt((blocks - 1) / blocks * np.sum((loo - loo.mean()) ** 2))
    return float(theta), se


@dataclass(frozen=True)
class SiegelResult:
    second_moment: float
    second_moment_se: float
    second_moment_target: float
    cross_moment: float
    cross_moment_se: float
    cross_moment_target: float

    def z_scores(self) -> tuple[float, float]:
        z1 = (self.second_moment - self.second_moment_target) / self.second_moment_se
        z2 = (self.cross_moment - self.cross_moment_target) / self.cross_moment_se
        return z1, z2


def siegel_moment_check(I1, I2, samples: int, seed: int, threads: int = 1) -> SiegelResult:
    """Monte Carlo second and cross moments against |I1|+|I1|^2 and |I1∩I2|+|I1||I2|."""
    I1, I2 = Interval.coerce(I1), Interval.coerce(I2)
    k = limit_process_counts(Box([I1, I2]), samples, seed, threads=threads)
    sm, sm_se = jackknife_mean(k[:, 0].astype(float) ** 2)
    cm, cm_se = jackknife_mean(k[:, 0].astype(float) * k[:, 1])
    return SiegelResult(
        sm, sm_se, I1.length + I1.length**2,
        cm, cm_se, I1.intersection_length(I2) + I1.length * I2.length,
    )


def lemma_window_bound(T: int, N: int, I, alpha: float, scale: str = "N", reflect: bool = True) -> int:
    """Two-triangle lattice bound for the window count at shift alpha in [-1/2, 1/2].

    Returns N(n~(2a) Phi^t, C) + N(n~(-2a) Phi^t, C) with C the x < 2 triangle.
    ``scale`` picks e^t = N (default, the window normalisation) or e^t = T; ``reflect`` uses
    the triangle of -I, which is the side the row-vector convention maps
    sqrt(n) in alpha + I/N onto.
    """
    I = Interval.coerce(I)
    J = I.negated() if reflect else I
    tri = Triangle(Interval(J.left, J.right, True, True), 0.0, 2.0)
    et = N if scale == "N" else T
    t = math.log(et)
    pts = [flow_point(alpha, t), flow_point(-alpha, t)]
    M = np.stack([p.matrix() for p in pts])
    s = np.stack([p.shift() for p in pts])
    return int(count_in_triangles(M, s, tri).sum())
