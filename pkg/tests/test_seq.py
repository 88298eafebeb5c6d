import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sqrtcorr import DomainError, EmptySequenceError, generate, generate_alpha_power
from sqrtcorr.seq import sequence_count, write_sequence


def test_generate_t10():
    seq = generate(10)
    assert seq.N == 7
    expected = sorted(math.sqrt(n) % 1 for n in (2, 3, 5, 6, 7, 8, 10))
    np.testing.assert_array_equal(seq.values, expected)


def test_generate_t2000_count():
    assert generate(2000).N == 1956


def test_generate_t4_values():
    seq = generate(4)
    assert seq.N == 2
    np.testing.assert_allclose(seq.values, [0.414214, 0.732051], atol=1e-6)


def test_generate_errors():
    with pytest.raises(EmptySequenceError):
        generate(0)
    with pytest.raises(DomainError):
        generate(10, c=1.0)
    with pytest.raises(DomainError):
        generate(10, c=-0.1)
    with pytest.raises(DomainError):
        generate(2.5)


def test_generate_with_cutoff():
    seq = generate(100, c=0.5, keep_indices=True)
    # 25 < n <= 100, minus the squares 36, 49, 64, 81, 100
    assert seq.N == 75 - 5
    assert seq.source_indices.min() == 26
    assert seq.N == sequence_count(100, 0.5)


def test_source_indices_match_values():
    seq = generate(500, keep_indices=True)
    recomputed = np.sqrt(seq.source_indices.astype(float)) % 1
    np.testing.assert_array_equal(seq.values, recomputed)


def test_values_are_read_only():
    seq = generate(10)
    with pytest.raises(ValueError):
        seq.values[0] = 0.5


def test_alpha_power_examples():
    seq = generate_alpha_power(3, 1 / 3)
    np.testing.assert_allclose(seq.values, [0.0, 0.259921, 0.442250], atol=1e-6)
    assert generate_alpha_power(1, 0.9).values.tolist() == [0.0]
    assert generate_alpha_power(200_000, 1 / 3).N == 200_000


def test_alpha_power_exact_cubes_are_zero():
    seq = generate_alpha_power(1000, 1 / 3, keep_indices=True)
    zeros = seq.source_indices[seq.values == 0.0]
    assert sorted(zeros.tolist()) == [k**3 for k in range(1, 11)]


def test_alpha_power_domain():
    for a in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            generate_alpha_power(10, a)


def test_alpha_half_removes_squares():
    assert generate_alpha_power(100, 0.5).N == 90


def _check_invariants(seq, T):
    v = seq.values
    assert np.all(v > 0.0) and np.all(v < 1.0)
    assert np.all(np.diff(v) >= 0.0)
    assert seq.N == T - math.isqrt(T)


@pytest.mark.property
@given(st.integers(min_value=1, max_value=5000))
def test_invariants_property(T):
    seq = generate(T)
    _check_invariants(seq, T)
    # squares contribute the missing zeros: N + floor(sqrt T) == T
    assert seq.N + math.isqrt(T) == T


@pytest.mark.property
@given(st.integers(min_value=1, max_value=3000), st.floats(min_value=0.0, max_value=0.99))
def test_cutoff_count_property(T, c):
    seq = generate(T, c, keep_indices=True)
    n = seq.source_indices
    assert np.all(n > c * c * T) and np.all(n <= T)
    assert seq.N == sequence_count(T, c)
    brute = sum(1 for k in range(1, T + 1) if k > c * c * T and math.isqrt(k) ** 2 != k)
    assert seq.N == brute


@pytest.mark.property
@pytest.mark.parametrize("T", [10**2, 10**4, 10**6])
def test_distance_to_integer_bound(T):
    seq = generate(T)
    _check_invariants(seq, T)
    assert seq.min_distance_to_integer() >= 0.5 * (T + 1) ** -0.5


def test_write_sequence(tmp_path):
    path = tmp_path / "s.txt"
    seq = generate(2000)
    write_sequence(seq, path)
    lines = path.read_bytes().decode().split("\n")
    assert lines[0] == "# T=2000 c=0.0 N=1956"
    assert lines[-1] == ""
    data = lines[1:-1]
    assert len(data) == 1956
    assert np.array_equal(np.array([float(x) for x in data]), seq.values)
