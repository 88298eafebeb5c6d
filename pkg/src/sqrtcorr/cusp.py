"""Cusp-region coset sums F_{R,beta} on the space of affine lattices and their
integrals along translated non-linear horocycles.

The coset sum runs over Gamma_inf \\ Gamma modulo +-1: the identity coset once
and each coprime bottom row (c, d) with c > 0 once.  With the indicator cutoff
chi_R(v) = [v >= R] only rows with |c tau + d|^2 <= v/R contribute, so the
enumeration below is exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import hyp2f1

from .errors import DomainError, TruncationWarning
from .intervals import Interval
from .lattice import AffineLattice, Triangle, gamma_prime, group_action
from .numth import totients_upto
from .stats import TestFunction

__all__ = [
    "CuspFunction",
    "cosets",
    "F_R_beta",
    "F_bar",
    "reduce_to_fundamental_domain",
    "majorant_cusp_function",
    "majorant_threshold",
    "escape_mass_integral",
    "F_bar_integral_direct",
    "zeroth_fourier_coefficient",
    "K_R",
    "K_R_integral",
]

QUAD_EPSABS = 1e-8


@dataclass(frozen=True)
class CuspFunction:
    """Parameters (R, beta, f) of F_{R,beta}.

    ``f`` should be nonnegative, even and non-increasing in |x|; ``f=None``
    stands for the f-free majorant used in F-bar.
    """

    R: float = 4.0
    beta: float = 0.5
    f: TestFunction | None = field(default_factory=TestFunction.triangle)

    def __post_init__(self):
        if self.R < 1:
            raise DomainError("R must be >= 1")
        if not 0.0 <= self.beta < 1.5:
            raise DomainError("beta must lie in [0, 3/2)")


def cosets(tau: complex, R: float, c_limit: int | None = None):
    """Yield (c, d, v_gamma) for the cosets with v_gamma >= R, identity first as (0, 1)."""
    u, v = tau.real, tau.imag
    if v >= R:
        yield 0, 1, v
    c_max = math.floor(1.0 / math.sqrt(v * R))
    if c_limit is not None and c_max > c_limit:
        warnings.warn(
            f"coset enumeration capped at c={c_limit}; exactness needs c up to {c_max}",
            TruncationWarning,
            stacklevel=3,
        )
        c_max = c_limit
    for c in range(1, c_max + 1):
        slack = v / R - (c * v) ** 2
        if slack < 0:
            continue
        w = math.sqrt(slack)
        for d in range(math.ceil(-c * u - w), math.floor(-c * u + w) + 1):
            if math.gcd(c, d) != 1:
                continue
            vg = v / ((c * u + d) ** 2 + (c * v) ** 2)
            if vg >= R:
                yield c, d, vg


def _fsum_shifts(f, x: float, scale: float) -> float:
    """sum over m in Z of f((x + m) * scale)."""
    lo, hi = f.support
    m_lo = math.ceil(lo / scale - x)
    m_hi = math.floor(hi / scale - x)
    if m_hi < m_lo:
        return 0.0
    m = np.arange(m_lo, m_hi + 1)
    return float(np.sum(f((x + m) * scale)))


def F_R_beta(x: AffineLattice, cf: CuspFunction, coset_bound: int | None = None) -> float:
    """sum over cosets and m of f(((xi gamma^-1)_1 + m) v_gamma^1/2) v_gamma^beta chi_R(v_gamma)."""
    if cf.f is None:
        return F_bar(x.tau, cf.R, cf.beta, coset_bound)
    xi1, xi2 = x.xi
    total = 0.0
    for c, d, vg in cosets(x.tau, cf.R, coset_bound):
        first = d * xi1 - c * xi2
        total += _fsum_shifts(cf.f, first, math.sqrt(vg)) * vg**cf.beta
    return total


def F_bar(tau: complex, R: float, beta: float, coset_bound: int | None = None) -> float:
    """sum over cosets of v_gamma^beta chi_R(v_gamma)."""
    return float(sum(vg**beta for _, _, vg in cosets(complex(tau), R, coset_bound)))


def reduce_to_fundamental_domain(x: AffineLattice, max_steps: int = 10_000) -> AffineLattice:
    """A Gamma'-equivalent point with |u| <= 1/2, |tau| >= 1 and xi in [0,1)^2."""
    S = np.array([[0.0, -1.0], [1.0, 0.0]])
    for _ in range(max_steps):
        k = math.floor(x.u + 0.5)
        if k:
            x = group_action(gamma_prime(np.array([[1.0, -k], [0.0, 1.0]])), x)
        if abs(x.tau) < 1.0 - 1e-15:
            x = group_action(gamma_prime(S), x)
        else:
            return x.reduced()
    raise DomainError("fundamental-domain reduction did not terminate")


def majorant_cusp_function(I, sigma: float) -> CuspFunction:
    """A concrete (R, f) with N(g, C(I))^sigma <= F_{R, sigma/2}(g) whenever v >= R.

    For v >= R the points of Z^2 g inside the triangle C(I) (x < 2) lie on a
    single line |m1 + xi1| v^1/2 <= rho, at most (diam + 1) v^1/2 of them, where
    rho bounds the norm of the triangle and diam its diameter.  A tent of height
    2 (diam + 1)^sigma and half-width 2 rho then dominates.
    """
    if not 0.0 <= sigma < 3.0:
        raise DomainError("sigma must lie in [0, 3)")
    tri = Triangle(I)
    verts = tri.vertices()
    rho = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))
    diam = float(max(np.hypot(*(p - q)) for p in verts for q in verts))
    R = 4.0 * rho * rho + 1.0
    f = TestFunction.triangle(half_width=2.0 * rho, height=2.0 * (diam + 1.0) ** sigma)
    return CuspFunction(R=R, beta=sigma / 2.0, f=f)


def majorant_threshold(I, sigma: float) -> int:
    """Count K0 above which :func:`majorant_cusp_function` is guaranteed to dominate.

    A lattice with shortest vector lambda has at most (2 rho lambda + 1)(2 rho / lambda + 1)
    points in a disc of radius rho.  Outside the cusp region lambda lies in
    [R^-1/2, (4/3)^1/4], so larger counts force v >= R.
    """
    cf = majorant_cusp_function(I, sigma)
    verts = Triangle(I).vertices()
    rho = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))
    bound = lambda lam: (2 * rho * lam + 1) * (2 * rho / lam + 1)
    return math.floor(max(bound(cf.R**-0.5), bound((4 / 3) ** 0.25))) + 1


def _u_ranges(v: float, beta: float, eta: float, theta: float) -> list[tuple[float, float]]:
    if beta < 1.0:
        return [(-1.0, 1.0)]
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if beta > 1.0 and not 0.0 <= eta < beta / (2.0 * (beta - 1.0)):
        raise DomainError(f"eta must lie in [0, {beta / (2 * (beta - 1)):.6g})")
    if eta < 0:
        raise DomainError("eta must be nonnegative")
    cut = theta * v**eta
    return [(-1.0, -cut), (cut, 1.0)]


def _term_integral(c: int, d: int, v: float, cf: CuspFunction, ranges) -> float:
    """Integral over u in ``ranges`` of the (c, d) summand along n~(u) a(v), via t = (u + d/c)/v."""
    R, beta, f = cf.R, cf.beta, cf.f
    L2 = 1.0 / (R * c * c * v) - 1.0
    if L2 < 0:
        return 0.0
    L = math.sqrt(L2)
    center = -d / c
    if f is not None:
        # quick reject: x(u) = c u^2/4 + d u/2 has its vertex at the centre
        s = max(abs(f.a), abs(f.b)) / math.sqrt(R)
        x_c = c * center**2 / 4 + d * center / 2
        u_ends = (center - L * v, center + L * v)
        xs = [x_c] + [c * uu * uu / 4 + d * uu / 2 for uu in u_ends]
        x_lo, x_hi = min(xs), max(xs)
        if math.floor(x_hi + s) < math.ceil(x_lo - s):
            return 0.0

    def integrand(t):
        vg = 1.0 / (c * c * v * (t * t + 1.0))
        if f is None:
            return vg**beta
        u = center + t * v
        first = c * u * u / 4 + d * u / 2
        return _fsum_shifts(f, first, math.sqrt(vg)) * vg**beta

    total = 0.0
    for a, b in ranges:
        t_lo = max(-L, (a - center) / v)
        t_hi = min(L, (b - center) / v)
        if t_hi <= t_lo:
            continue
        pts = [0.0] if t_lo < 0.0 < t_hi else None
        val, _ = quad(integrand, t_lo, t_hi, points=pts, limit=200, epsabs=QUAD_EPSABS / v, epsrel=1e-10)
        total += val * v
    return total


def _identity_integral(v: float, cf: CuspFunction, ranges) -> float:
    if v < cf.R:
        return 0.0
    sv = math.sqrt(v)
    if cf.f is None:
        g = lambda u: v**cf.beta
    else:
        g = lambda u: _fsum_shifts(cf.f, u / 2, sv) * v**cf.beta
    return sum(quad(g, a, b, limit=200, epsabs=QUAD_EPSABS)[0] for a, b in ranges)


def escape_mass_integral(v: float, cf: CuspFunction, eta: float = 0.5, theta: float = 0.5) -> float:
    """Integral of u -> F_{R,beta}(n~(u) a(v)) over [-1, 1], minus (-theta v^eta, theta v^eta) when beta >= 1.

    Each coset contributes on the short u-window where its v_gamma >= R, so the
    integral is a finite sum of one-dimensional quadratures.
    """
    if not v > 0:
        raise DomainError("v must be positive")
    ranges = _u_ranges(v, cf.beta, eta, theta)
    if cf.f is not None and not np.any(cf.f(np.linspace(cf.f.a, cf.f.b, 257))):
        return 0.0
    total = _identity_integral(v, cf, ranges)
    c_max = math.floor(1.0 / math.sqrt(v * cf.R))
    for c in range(1, c_max + 1):
        w = math.sqrt(max(0.0, v / cf.R - (c * v) ** 2))
        d_lo = math.ceil(-c * (1.0 + w / c) - 1)
        d_hi = math.floor(c * (1.0 + w / c) + 1)
        for d in range(d_lo, d_hi + 1):
            if math.gcd(c, d) == 1:
                total += _term_integral(c, d, v, cf, ranges)
    return total


def F_bar_integral_direct(v: float, R: float, beta: float, u_range=(0.0, 1.0)) -> float:
    """Integral of F-bar(u + iv) over u by explicit coset enumeration and quadrature."""
    cf = CuspFunction(R=R, beta=beta, f=None)
    ranges = [tuple(u_range)]
    total = _identity_integral(v, cf, ranges)
    a, b = u_range
    c_max = math.floor(1.0 / math.sqrt(v * R))
    for c in range(1, c_max + 1):
        for d in range(math.floor(-c * b) - 1, math.ceil(-c * a) + 2):
            if math.gcd(c, d) == 1:
                total += _term_integral(c, d, v, cf, ranges)
    return total


def _t_integral(L: float, beta: float) -> float:
    """Integral of (t^2 + 1)^-beta over [-L, L]."""
    return 2.0 * L * float(hyp2f1(0.5, beta, 1.5, -L * L))


def zeroth_fourier_coefficient(v: float, R: float, beta: float, c_max: int | None = None) -> float:
    """Mean of F-bar(u + iv) over one period in u, as a totient series.

    v^beta chi_R(v) + v^(1-beta) sum_c phi(c) c^(-2 beta) int (t^2+1)^(-beta) chi_R(1/(v c^2 (t^2+1))) dt;
    the c-sum is exact once c > (v R)^(-1/2).
    """
    if beta >= 1.0:
        raise DomainError("the Fourier-coefficient formula needs beta < 1")
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    total = v**beta if v >= R else 0.0
    c_top = math.floor(1.0 / math.sqrt(v * R))
    if c_max is not None:
        c_top = min(c_top, c_max)
    if c_top < 1:
        return total
    phi = totients_upto(c_top)
    for c in range(1, c_top + 1):
        L2 = 1.0 / (v * R * c * c) - 1.0
        if L2 < 0:
            continue
        total += v ** (1 - beta) * phi[c] * c ** (-2 * beta) * _t_integral(math.sqrt(L2), beta)
    return total


def K_R(x: float, R: float, beta: float) -> float:
    """x^(1-2 beta) times the measure-weighted t-integral; vanishes for x > R^(-1/2)."""
    if x <= 0:
        raise DomainError("K_R is defined for x > 0")
    L2 = 1.0 / (R * x * x) - 1.0
    if L2 < 0:
        return 0.0
    return x ** (1 - 2 * beta) * _t_integral(math.sqrt(L2), beta)


def K_R_integral(R: float, beta: float) -> float:
    """Integral of K_R over (0, inf); equals R^(beta-1) times its value at R = 1."""
    top = 1.0 / math.sqrt(R)
    val, _ = quad(lambda x: K_R(x, R, beta), 0.0, top, limit=200, epsabs=1e-12)
    return val
