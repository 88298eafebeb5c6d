import math
import warnings

import numpy as np
import pytest

from sqrtcorr import DomainError, Interval, TruncationWarning
from sqrtcorr.cusp import (
    CuspFunction,
    F_R_beta,
    F_bar,
    F_bar_integral_direct,
    K_R_integral,
    cosets,
    escape_mass_integral,
    majorant_cusp_function,
    majorant_threshold,
    reduce_to_fundamental_domain,
    zeroth_fourier_coefficient,
)
from sqrtcorr.lattice import AffineLattice, Triangle, count_in_triangle, gamma_prime, group_action, horocycle_point
from sqrtcorr.stats import TestFunction

from test_lattice import random_sl2z


def test_cusp_function_invariants():
    with pytest.raises(DomainError):
        CuspFunction(R=0.5)
    with pytest.raises(DomainError):
        CuspFunction(beta=1.5)
    with pytest.raises(DomainError):
        CuspFunction(beta=-0.1)


def test_F_vanishes_below_cutoff():
    assert F_R_beta(AffineLattice(1j, 0.4, (0.3, 0.1)), CuspFunction(R=4, beta=0.5)) == 0.0
    assert F_bar(0.2 + 0.9j, 4, 0.5) == 0.0


def test_F_identity_term():
    R = 4.0
    cf = CuspFunction(R=R, beta=1.0, f=TestFunction.indicator(-0.5, 0.5))
    assert F_R_beta(AffineLattice(2j * R), cf) == 2 * R


def test_coset_enumeration_is_exact():
    tau, R = 0.137 + 0.0021j, 2.0
    found = {(c, d) for c, d, _ in cosets(tau, R)}
    brute = set()
    for c in range(1, 40):
        for d in range(-60, 60):
            if math.gcd(c, d) == 1 and tau.imag / abs(c * tau + d) ** 2 >= R:
                brute.add((c, d))
    assert found - {(0, 1)} == brute


def test_coset_truncation_warns():
    with pytest.warns(TruncationWarning):
        list(cosets(0.1 + 1e-4j, 1.0, c_limit=3))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        list(cosets(0.1 + 1e-4j, 1.0))


@pytest.mark.property
def test_F_gamma_prime_invariant():
    rng = np.random.default_rng(8)
    cf = CuspFunction(R=1.5, beta=0.7, f=TestFunction.triangle(1.3))
    nonzero = 0
    for _ in range(1000):
        tau = complex(rng.uniform(-0.5, 0.5), 10 ** rng.uniform(-2.5, 0.7))
        x = AffineLattice(tau, rng.uniform(0, 2 * math.pi), tuple(rng.uniform(0, 1, 2)))
        g = gamma_prime(random_sl2z(rng, steps=3), tuple(rng.integers(-3, 4, 2)))
        a, b = F_R_beta(x, cf), F_R_beta(group_action(g, x), cf)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))
        nonzero += a > 0
    assert nonzero > 100


def test_reduce_to_fundamental_domain():
    rng = np.random.default_rng(9)
    cf = CuspFunction(R=1.2, beta=0.5)
    for _ in range(200):
        x = AffineLattice(complex(rng.uniform(-3, 3), 10 ** rng.uniform(-3, 0)), 0.0, tuple(rng.uniform(0, 1, 2)))
        y = reduce_to_fundamental_domain(x)
        assert abs(y.u) <= 0.5 + 1e-12 and abs(y.tau) >= 1 - 1e-12
        assert F_R_beta(y, cf) == pytest.approx(F_R_beta(x, cf), rel=1e-9, abs=1e-12)


@pytest.mark.property
@pytest.mark.parametrize("I,sigma", [((0, 1), 2.0), ((-0.5, 0.5), 1.0), ((0, 2), 2.5)])
def test_majorant_dominates_large_counts(I, sigma):
    I = Interval.closed(*I)
    cf = majorant_cusp_function(I, sigma)
    K0 = majorant_threshold(I, sigma)
    tri = Triangle(I)
    rng = np.random.default_rng(10)
    tested = 0
    for _ in range(2000):
        q = int(rng.integers(1, 20))
        p = int(rng.integers(-q, q + 1))
        x = horocycle_point(2 * p / q + rng.normal() * 1e-5, 10 ** rng.uniform(-8, -3))
        n = count_in_triangle(x, tri)
        if n >= K0:
            tested += 1
            assert F_R_beta(x, cf) >= n**sigma
    assert tested >= 30


def test_escape_mass_zero_function():
    zero = TestFunction.piecewise_linear([-1, 0, 1], [0, 0, 0])
    assert escape_mass_integral(1e-3, CuspFunction(R=4, beta=0.5, f=zero)) == 0.0


def test_escape_mass_parameter_domain():
    cf = CuspFunction(R=4, beta=1.25)
    with pytest.raises(DomainError):
        escape_mass_integral(1e-3, cf, eta=2.5)
    with pytest.raises(DomainError):
        escape_mass_integral(1e-3, cf, eta=0.5, theta=1.0)
    with pytest.raises(DomainError):
        escape_mass_integral(0.0, cf)


def test_escape_mass_bounded_in_v():
    cf = CuspFunction(R=4, beta=0.5)
    vals = [escape_mass_integral(v, cf) for v in (1e-2, 1e-3, 1e-4)]
    assert all(0 < x < 2 for x in vals)


def test_escape_mass_decays_with_R():
    vals = {R: escape_mass_integral(1e-4, CuspFunction(R=R, beta=0.5)) for R in (4, 16, 64)}
    scaled = [vals[R] * R ** 0.5 for R in (4, 16, 64)]
    # the upper envelope is a constant times R^-(1-beta)
    assert scaled[0] >= scaled[1] >= scaled[2] > 0


def test_escape_mass_beta_above_one_decreasing():
    vals = [escape_mass_integral(1e-3, CuspFunction(R=R, beta=1.25), eta=0.5, theta=0.5) for R in (4, 16, 64)]
    assert vals[0] > vals[1] > vals[2]


def test_F_bar_integral_matches_escape_mass():
    v = 1e-3
    full = escape_mass_integral(v, CuspFunction(R=4, beta=0.5, f=None))
    assert full == pytest.approx(F_bar_integral_direct(v, 4, 0.5, (-1.0, 1.0)), rel=1e-9)


def test_zeroth_coefficient_domain():
    with pytest.raises(DomainError):
        zeroth_fourier_coefficient(1e-3, 4, 1.0)


def test_zeroth_coefficient_empty_sum():
    assert zeroth_fourier_coefficient(10.0, 4, 0.5) == math.sqrt(10.0)
    assert zeroth_fourier_coefficient(1.0, 4, 0.5) == 0.0


def test_zeroth_coefficient_matches_direct():
    z = zeroth_fourier_coefficient(1e-4, 4, 0.5)
    direct = F_bar_integral_direct(1e-4, 4, 0.5)
    assert z == pytest.approx(direct, rel=1e-3)


def test_zeroth_coefficient_truncation_is_exact():
    v, R = 1e-4, 4
    c_top = math.floor(1 / math.sqrt(v * R))
    assert zeroth_fourier_coefficient(v, R, 0.5, c_max=c_top) == zeroth_fourier_coefficient(v, R, 0.5, c_max=10 * c_top)


def test_zeroth_coefficient_scaling():
    vals = np.array([zeroth_fourier_coefficient(1e-4, R, 0.5) for R in (4, 16, 64)])
    slope = np.polyfit(np.log([4, 16, 64]), np.log(vals), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_K_R_integral_scaling(beta):
    base = K_R_integral(1.0, beta)
    for R in (4.0, 16.0, 64.0):
        assert K_R_integral(R, beta) == pytest.approx(base * R ** (beta - 1), rel=1e-8)
