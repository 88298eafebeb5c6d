"""Exact integer arithmetic: totient, divisor counts, Jacobi symbol, quadratic Gauss sums,
and the coprime sum S(D, T) over fractions d^2/4c."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "factorize",
    "totient",
    "totients_upto",
    "omega_tau",
    "jacobi",
    "gauss_sum_direct",
    "gauss_sum_closed",
    "gauss_sum_closed_signed",
    "lemma_sum_S",
    "LemmaRow",
    "lemma_bound_report",
    "lemma_envelope_check",
]


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (intended for n up to ~1e12)."""
    n = int(n)
    if n < 1:
        raise DomainError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
        p += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def totient(c: int) -> int:
    if c < 1:
        raise DomainError("totient is defined for c >= 1")
    result = c
    for p in factorize(c):
        result -= result // p
    return result


def totients_upto(n: int) -> np.ndarray:
    """phi(0..n) by a sieve; phi(0) is set to 0."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


def omega_tau(n: int) -> tuple[int, int]:
    """Number of distinct prime factors and number of divisors."""
    if n < 1:
        raise DomainError("omega/tau are defined for n >= 1")
    f = factorize(n)
    return len(f), math.prod(e + 1 for e in f.values())


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 1."""
    if n < 1 or n % 2 == 0:
        raise DomainError("Jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _check_gauss(n: int, c: int) -> None:
    if c < 1:
        raise DomainError("c must be a positive integer")
    if n == 0 or math.gcd(n, 4 * c) != 1:
        raise DomainError(f"need gcd(n, 4c) = 1, got n={n}, c={c}")


def gauss_sum_direct(n: int, c: int) -> complex:
    """sum_{d mod 4c} e(n d^2 / 4c), phases reduced exactly mod 4c before exponentiating."""
    _check_gauss(n, c)
    q = 4 * c
    d = np.arange(q, dtype=np.int64)
    r = ((n % q) * (d * d % q)) % q
    return complex(np.exp(2j * np.pi * (r / q)).sum())


def gauss_sum_closed(n: int, c: int) -> complex:
    """(1 + i) eps_n^{-1} (4c / n) sqrt(4c) for odd positive n coprime to c.

    eps_n is 1 for n = 1 mod 4 and i for n = 3 mod 4.  Negative n is rejected;
    see :func:`gauss_sum_closed_signed`.
    """
    _check_gauss(n, c)
    if n < 0:
        raise DomainError("closed form is stated for n > 0; use gauss_sum_closed_signed")
    eps_inv = 1.0 if n % 4 == 1 else -1j
    return (1 + 1j) * eps_inv * jacobi(4 * c, n) * math.sqrt(4 * c)


def gauss_sum_closed_signed(n: int, c: int) -> complex:
    """Closed form extended to n < 0 through G(-n, c) = conj(G(n, c))."""
    if n < 0:
        return gauss_sum_closed(-n, c).conjugate()
    return gauss_sum_closed(n, c)


def lemma_sum_S(D: float, T: float, f) -> float:
    """Brute-force S = sum over D<=c<=2D, 1<=d<=D, gcd(c,d)=1, m in Z of f(T (d^2/4c + m))."""
    if D < 1 or T <= 0:
        raise DomainError("need D >= 1 and T > 0")
    c = np.arange(math.ceil(D), math.floor(2 * D) + 1, dtype=np.int64)
    d = np.arange(1, math.floor(D) + 1, dtype=np.int64)
    cc, dd = np.meshgrid(c, d, indexing="ij")
    keep = np.gcd(cc, dd) == 1
    cc, dd = cc[keep], dd[keep]
    q = 4 * cc
    frac = (dd * dd % q) / q
    lo, hi = f.support
    total = 0.0
    for m in range(math.floor(lo / T) - 1, math.ceil(hi / T) + 2):
        total += float(np.sum(f(T * (frac + m))))
    return total


@dataclass(frozen=True)
class LemmaRow:
    D: float
    T: float
    S: float
    bound1: float
    bound2: float
    ratio1: float
    ratio2: float
    ratio: float  # S T^(1-eps) / D^2


def lemma_bound_report(D_grid, T_grid, f, eps: float = 0.1, eps1: float = 0.1, eps2: float = 0.1) -> list[LemmaRow]:
    """S on a grid together with the two bounds D^(2+eps1)/T and D^2/T + D^(3/2) T^eps2."""
    rows = []
    for D in D_grid:
        for T in T_grid:
            S = lemma_sum_S(D, T, f)
            b1 = D ** (2 + eps1) / T
            b2 = D**2 / T + D**1.5 * T**eps2
            rows.append(LemmaRow(D, T, S, b1, b2, S / b1, S / b2, S * T ** (1 - eps) / D**2))
    return rows


def lemma_envelope_check(rows: list[LemmaRow]) -> tuple[float, float, bool]:
    """Compare the largest ratio on the top-right quarter of the grid with the rest.

    The quarter holds the rows whose D and T are both in the upper half of the
    grid values.  Returns (max on the rest, max on the quarter, quarter <= rest).
    """
    Ds = sorted({r.D for r in rows})
    Ts = sorted({r.T for r in rows})
    d_cut, t_cut = Ds[len(Ds) // 2], Ts[len(Ts) // 2]
    quarter = [r.ratio for r in rows if r.D >= d_cut and r.T >= t_cut]
    rest = [r.ratio for r in rows if not (r.D >= d_cut and r.T >= t_cut)]
    c_rest, c_quarter = max(rest), max(quarter)
    return c_rest, c_quarter, c_quarter <= c_rest
