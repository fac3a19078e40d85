import itertools
import math
import random

import mpmath
import numpy as np
import pytest

from qdual.gaussian import DomainError, GaussianSpec, entropy_1d, modular_pmf, theta
from qdual.guessing import (GQC_SIGMA_MIN, _sqrt_prefix, a_sigma, bound_G, bound_Gqc,
                            entropy_relative_bounds, exact_guessing, gaussian_bounds, massey_lower,
                            modular_gaussian_order, shell_guessing, truncated_guessing)


def brute_guessing(probs):
    """Independent oracle: sort probabilities descending, sum i p_i and sqrt(i) p_i."""
    ps = sorted(probs, reverse=True)
    return (math.fsum(i * p for i, p in enumerate(ps)), math.fsum(math.sqrt(i) * p for i, p in enumerate(ps)))


def test_exact_guessing_examples():
    u = exact_guessing([0.25] * 4)
    assert u.g_classical == pytest.approx(1.5)
    assert u.g_quantum == pytest.approx((1 + math.sqrt(2) + math.sqrt(3)) / 4)
    assert u.g_quantum == pytest.approx(1.036566, abs=1e-6)
    pt = exact_guessing({"x": 1.0})
    assert pt.g_classical == 0 and pt.g_quantum == 0


def test_exact_guessing_permutation_invariant():
    rng = random.Random(3)
    probs = [rng.random() for _ in range(30)]
    tot = sum(probs)
    probs = [p / tot for p in probs]
    ref = exact_guessing(probs)
    for _ in range(5):
        rng.shuffle(probs)
        r = exact_guessing(probs)
        assert r.g_classical == pytest.approx(ref.g_classical, rel=1e-14)
        assert r.g_quantum == pytest.approx(ref.g_quantum, rel=1e-14)
        assert r.g_quantum <= math.sqrt(r.g_classical) + 1


def test_exact_guessing_rejects_bad_pmf():
    with pytest.raises(DomainError):
        exact_guessing([0.3, 0.3])
    with pytest.raises(DomainError):
        exact_guessing([])


def test_modular_order_examples():
    flat = modular_gaussian_order(1e6, 3, 1)
    assert flat.g_classical == pytest.approx(1.0, abs=1e-6)
    one = modular_pmf(GaussianSpec(1.0, 1, 7)).pmf
    probs = [one[a] * one[b] for a in one for b in one]
    g, gqc = brute_guessing(probs)
    rep = modular_gaussian_order(1.0, 7, 2)
    assert rep.g_classical == pytest.approx(g, rel=1e-12)
    assert rep.g_quantum == pytest.approx(gqc, rel=1e-12)


def test_modular_order_is_by_lifted_norm():
    rep = modular_gaussian_order(1.3, 11, 2)
    norms = [sum(v * v for v in x) for x in rep.order]
    assert norms == sorted(norms)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_shell_matches_box_enumeration(sigma, n):
    bound = {1: 40, 2: 25, 3: 14}[n]
    g, gqc = shell_guessing(sigma, n)
    tg, tgqc = truncated_guessing(sigma, n, bound)
    assert g == pytest.approx(tg, rel=1e-9)
    assert gqc == pytest.approx(tgqc, rel=1e-9)


def test_shell_one_based_shift():
    g0, _ = shell_guessing(1.0, 3, first_index=0)
    g1, _ = shell_guessing(1.0, 3, first_index=1)
    assert g1 == pytest.approx(g0 + 1, rel=1e-12)


def test_sqrt_prefix_euler_maclaurin():
    for N in (100000, 123457, 2 * 10 ** 6):
        direct = math.fsum(np.sqrt(np.arange(1, N + 1, dtype=float)))
        assert _sqrt_prefix(N) == pytest.approx(direct, rel=1e-13)


def test_bound_G_examples():
    expected = math.log2(16 * theta(1.0) ** 4 / (1 - math.exp(-0.5)))
    assert bound_G(1.0, 4) == pytest.approx(expected, rel=1e-13)
    assert bound_G(1.0, 4) == pytest.approx(10.649, abs=2e-3)
    assert bound_G(1.0, 4, modular=True) == pytest.approx(bound_G(1.0, 4) + 1.0, abs=1e-14)


def test_bound_Gqc_examples():
    expected = math.log2(7 / 6 * 1.5 ** 3 * math.sqrt(theta(1.0) ** 4) / (1 - math.exp(-1 / 3)) ** 1.5)
    assert bound_Gqc(1.0, 4) == pytest.approx(expected, rel=1e-13)
    assert bound_Gqc(1.0, 4, modular=True) - bound_Gqc(1.0, 4) == pytest.approx(math.log2(1.5), abs=1e-14)
    assert GQC_SIGMA_MIN == pytest.approx(0.294, abs=1e-3)
    with pytest.raises(DomainError):
        bound_Gqc(0.29, 4)


def test_small_n_flagged_exact():
    assert gaussian_bounds(1.0, 3).exact
    assert not gaussian_bounds(1.0, 4).exact


def test_a_sigma_examples():
    assert a_sigma(10.0) == pytest.approx(1.0, abs=1e-12)
    assert a_sigma(0.5) == pytest.approx(1.150, abs=1e-3)
    t = math.pi ** 2
    assert a_sigma(1.0) == pytest.approx(math.exp(8 * t * math.exp(-2 * t) * math.tanh(t)), rel=1e-14)
    assert a_sigma(1.0) == pytest.approx(1 + 8 * t * math.exp(-2 * t) * math.tanh(t), rel=1e-6)


@pytest.mark.parametrize("sigma", [1.0, 2.0])
@pytest.mark.parametrize("n", [8, 16])
def test_entropy_form_consistent_with_closed_form(sigma, n):
    g, gqc = entropy_relative_bounds(sigma, n)
    assert abs(g - bound_G(sigma, n)) <= 0.2
    assert abs(gqc - bound_Gqc(sigma, n)) <= 0.2


def test_entropy_form_asymptotic_overheads():
    sigma = 50.0
    g1, q1 = entropy_relative_bounds(sigma, 10)
    g2, q2 = entropy_relative_bounds(sigma, 11)
    H = entropy_1d(sigma)
    assert g2 - g1 - H == pytest.approx(math.log2(2 / math.sqrt(math.e)), abs=1e-6)
    assert q2 - q1 - H / 2 == pytest.approx(0.25 * math.log2(27 / (8 * math.e)), abs=1e-6)
    assert math.log2(2 / math.sqrt(math.e)) == pytest.approx(0.2787, abs=1e-4)


def _mp_shell_exact(sigma, n):
    """High-precision oracle: sum over the box {-R..R}^n grouped by norm (n <= 4)."""
    s = mpmath.mpf(sigma)
    R = int(8 * sigma) + 3
    counts = {}
    for x in itertools.product(range(-R, R + 1), repeat=n):
        k = sum(v * v for v in x)
        counts[k] = counts.get(k, 0) + 1
    Z = mpmath.jtheta(3, 0, mpmath.exp(-1 / (2 * s * s))) ** n
    g = gqc = mpmath.mpf(0)
    idx = 0
    for k in sorted(counts):
        if k > R * R:
            break
        w = mpmath.exp(-k / (2 * s * s)) / Z
        c = counts[k]
        g += w * c * (2 * idx + c - 1) / 2
        gqc += w * mpmath.fsum(mpmath.sqrt(i) for i in range(idx, idx + c))
        idx += c
    return float(g), float(gqc)


def test_shell_against_high_precision_oracle():
    g, gqc = shell_guessing(1.0, 4)
    rg, rgqc = _mp_shell_exact(1.0, 4)
    assert g == pytest.approx(rg, rel=1e-10)
    assert gqc == pytest.approx(rgqc, rel=1e-10)


def test_massey_lower_bound_formula():
    assert massey_lower(2.0) == 2.0
    assert massey_lower(4.0) == 5.0
