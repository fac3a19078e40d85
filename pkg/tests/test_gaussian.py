import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from qdual.gaussian import (DomainError, GaussianSpec, UnsupportedSizeError, centered, entropy_1d,
                            entropy_sandwich, entropy_upper_1d, log_normal_tail, modular_pmf,
                            point_count, representatives, rho, rho_lattice, rho_lattice_bounds,
                            shannon_entropy, std_normal_cdf, std_normal_inv, std_normal_isf_log2,
                            theta)


def test_rho_examples():
    assert rho(1, 0) == 1.0
    assert rho(1, 2) == pytest.approx(math.exp(-1), rel=1e-15)
    assert rho(0.5, 1) == pytest.approx(0.135335283236613, rel=1e-12)


def test_rho_rejects_bad_input():
    with pytest.raises(DomainError):
        rho(0, 1)
    with pytest.raises(DomainError):
        rho(1, -1)


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0, 1.5, 3.2, 10.0])
def test_theta_against_jacobi_theta(sigma):
    ref = mpmath.jtheta(3, 0, mpmath.exp(-1 / (2 * mpmath.mpf(sigma) ** 2)))
    assert theta(sigma) == pytest.approx(float(ref), rel=1e-14)


def test_rho_lattice_examples():
    assert rho_lattice(1, 1) == pytest.approx(2.506628, abs=1e-6)
    assert rho_lattice(1, 1) == pytest.approx(math.sqrt(2 * math.pi) * (1 + 2 * math.exp(-2 * math.pi ** 2)), rel=1e-12)
    assert rho_lattice(1, 3) == pytest.approx(rho_lattice(1, 1) ** 3, rel=1e-14)
    lo, hi = 0.3 * math.sqrt(2 * math.pi), 0.3 * math.sqrt(2 * math.pi) / math.tanh(0.09 * math.pi ** 2)
    assert lo <= rho_lattice(0.3, 1) <= hi


@pytest.mark.parametrize("sigma", [0.3, 0.7, 1.0, 2.0, 5.0, 10.0])
@pytest.mark.parametrize("n", [1, 4, 16, 64])
def test_rho_lattice_poisson_sandwich(sigma, n):
    lo, hi = rho_lattice_bounds(sigma, n)
    val = math.exp(n * math.log(theta(sigma)))
    assert lo * (1 - 1e-12) <= val <= hi * (1 + 1e-12)


def test_modular_pmf_limits():
    sharp = modular_pmf(GaussianSpec(1e-4, 1, 5)).pmf
    assert sharp[0] == pytest.approx(1.0)
    assert all(v < 1e-12 for k, v in sharp.items() if k)
    flat = modular_pmf(GaussianSpec(1e6, 1, 3)).pmf
    assert all(abs(v - 1 / 3) < 1e-6 for v in flat.values())


def test_modular_pmf_brute_force_double_sum():
    num = sum(math.exp(-(7 * k) ** 2 / 2) for k in range(-30, 31))
    den = sum(math.exp(-j * j / 2) for j in range(-210, 211))
    assert modular_pmf(GaussianSpec(1.0, 1, 7)).pmf[0] == pytest.approx(num / den, rel=1e-13)


@given(st.floats(0.2, 40), st.integers(2, 200))
@settings(max_examples=60, deadline=None)
def test_modular_pmf_invariants(sigma, q):
    pmf = modular_pmf(GaussianSpec(sigma, 1, q)).pmf
    assert abs(sum(pmf.values()) - 1) < 1e-12
    for x, v in pmf.items():
        if -x in pmf:
            assert v == pytest.approx(pmf[-x], rel=1e-12, abs=1e-300)
    by_norm = sorted(pmf.items(), key=lambda kv: abs(kv[0]))
    assert all(a[1] >= b[1] * (1 - 1e-12) for a, b in zip(by_norm, by_norm[1:]))


def test_representatives_and_centered():
    assert representatives(5) == [-2, -1, 0, 1, 2]
    assert representatives(4) == [-1, 0, 1, 2]
    assert centered(6, 7) == -1
    assert list(centered(np.array([0, 3, 4, 6]), 7)) == [0, 3, -3, -1]


def test_shannon_entropy_examples():
    assert shannon_entropy([1 / 8] * 8) == pytest.approx(3.0)
    assert shannon_entropy([1.0]) == 0.0
    pmf = modular_pmf(GaussianSpec(1.0, 1, 7))
    brute = -math.fsum(p * math.log2(p) for p in sorted(pmf.pmf.values(), reverse=True))
    assert pmf.entropy_bits == pytest.approx(brute, rel=1e-14)
    with pytest.raises(DomainError):
        shannon_entropy([0.5, 0.6])


@pytest.mark.parametrize("sigma", [0.5, 1.0, 1.2247, 3.0])
def test_entropy_1d_high_precision(sigma):
    s = mpmath.mpf(sigma)
    K = int(20 * sigma) + 10
    w = [mpmath.exp(-k * k / (2 * s * s)) for k in range(-K, K + 1)]
    Z = mpmath.fsum(w)
    ref = -mpmath.fsum(x / Z * mpmath.log(x / Z, 2) for x in w)
    assert entropy_1d(sigma) == pytest.approx(float(ref), rel=1e-12)
    assert entropy_upper_1d(sigma) >= entropy_1d(sigma) - 1e-12


@pytest.mark.parametrize("sigma", [0.3, 0.5, 1.0, 2.0])
def test_entropy_sandwich_brackets_exact(sigma):
    for n in (1, 4, 9):
        lo, hi = entropy_sandwich(sigma, n)
        assert lo - 1e-9 <= n * entropy_1d(sigma) <= hi + 1e-9


def test_point_count_examples():
    assert point_count(2, 1) == 5
    assert point_count(1, 4) == 5
    assert point_count(3, 2) == 19
    assert point_count(3, -1) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_point_count_brute_force(n):
    r = 3
    norms = [sum(v * v for v in x) for x in itertools.product(range(-r, r + 1), repeat=n)]
    for ell in range(0, r * r + 1):
        assert point_count(n, ell) == sum(1 for v in norms if v <= ell)


def test_point_count_limits():
    with pytest.raises(UnsupportedSizeError):
        point_count(9, 3)
    with pytest.raises(DomainError):
        point_count(2, -2)


def test_std_normal_inv_examples():
    assert std_normal_inv(0.5) == pytest.approx(0.0, abs=1e-12)
    assert std_normal_inv(0.975) == pytest.approx(1.959964, abs=1e-6)
    for p in (0.6, 0.9, 0.999):
        assert std_normal_cdf(std_normal_inv(p)) == pytest.approx(p, abs=1e-12)
    for p in (1e-9, 0.01, 0.3, 0.77, 1 - 1e-9):
        assert std_normal_inv(p) == pytest.approx(stats.norm.ppf(p), abs=1e-9)
    with pytest.raises(DomainError):
        std_normal_inv(1.0)


@pytest.mark.parametrize("x", [0.5, 3.0, 12.0, 29.0, 31.0, 60.0, 300.0])
def test_log_normal_tail_against_scipy(x):
    assert log_normal_tail(x) == pytest.approx(float(special.log_ndtr(-x)), rel=1e-9)


@pytest.mark.parametrize("log2_tail", [-2.0, -30.0, -60.0, -200.0, -1000.0])
def test_isf_log2_round_trip(log2_tail):
    x = std_normal_isf_log2(log2_tail)
    assert float(special.log_ndtr(-x)) / math.log(2) == pytest.approx(log2_tail, rel=1e-8)
