"""
Guessing complexity of distributions.

G(X) = sum_i i * p_i and G^qc(X) = sum_i sqrt(i) * p_i, where p_0 >= p_1 >= ...
are the outcome probabilities sorted in non-increasing order and the index
starts at 0 (the first guess is free).  Exact values are obtained by
enumeration for small supports; the closed-form upper bounds for discrete
Gaussians are what the cost estimator uses.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (DomainError, GaussianSpec, UnsupportedSizeError, entropy_1d,
                       entropy_upper_1d, entropy_sandwich, log_rho_lattice, modular_pmf,
                       point_count, shannon_entropy, theta)

LN2 = math.log(2)
# zeta(-1/2), constant term of the Euler-Maclaurin expansion of sum sqrt(i)
ZETA_MINUS_HALF = -0.20788622497735457
GQC_SIGMA_MIN = (2 / (27 * math.pi ** 2)) ** 0.25
MAX_ENUMERATION = 2 ** 20


@dataclass
class GuessingReport:
    g_classical: float
    g_quantum: float
    entropy_bits: float
    order: list


@dataclass
class GuessingBounds:
    g_upper: float
    gqc_upper: float
    a_sigma: float
    entropy_lo: float
    entropy_hi: float
    modular_factor_applied: bool
    exact: bool = False


def _as_items(pmf):
    if isinstance(pmf, dict):
        return list(pmf.items())
    return list(enumerate(pmf))


def exact_guessing(pmf):
    """Exact G and G^qc of a finite distribution given as a dict or a vector."""
    items = _as_items(pmf)
    if not items:
        raise DomainError("empty distribution")
    probs = np.array([p for _, p in items], dtype=float)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise DomainError(f"masses sum to {probs.sum()}, not 1")
    # stable sort on the outcome first, then on decreasing probability
    items.sort(key=lambda kv: kv[0])
    items.sort(key=lambda kv: -kv[1])
    p = np.array([v for _, v in items], dtype=float)
    idx = np.arange(len(p), dtype=float)
    return GuessingReport(
        g_classical=float(np.dot(idx, p)),
        g_quantum=float(np.dot(np.sqrt(idx), p)),
        entropy_bits=shannon_entropy(p),
        order=[k for k, _ in items],
    )


def modular_gaussian_order(sigma, q, n):
    """Exact guessing report of D_{Z_q^n, sigma} by enumerating Z_q^n."""
    if n > 3 or q ** n > MAX_ENUMERATION:
        raise UnsupportedSizeError(f"q^n = {q}^{n} is too large to enumerate")
    one = modular_pmf(GaussianSpec(sigma, 1, q)).pmf
    pmf = {}
    for xs in itertools.product(sorted(one), repeat=n):
        pmf[xs] = math.prod(one[x] for x in xs)
    return exact_guessing(pmf)


def _sum_sqrt(a, b):
    """sum_{i=a}^{b} sqrt(i) for integers 0 <= a, b; empty if b < a."""
    if b < a:
        return 0.0
    if b - a < 200000:
        return float(np.sqrt(np.arange(a, b + 1, dtype=float)).sum())
    return _sqrt_prefix(b) - _sqrt_prefix(a - 1)


def _sqrt_prefix(N):
    if N < 1:
        return 0.0
    if N < 100000:
        return float(np.sqrt(np.arange(1, N + 1, dtype=float)).sum())
    s = math.sqrt(N)
    return 2 / 3 * N * s + s / 2 + ZETA_MINUS_HALF + 1 / (24 * s) - 1 / (1920 * N * N * s)


def shell_guessing(sigma, n, first_index=0, tol=1e-15):
    """
    Exact (G, G^qc) of D_{Z^n, sigma} summed over shells |x|^2 = l.

    Vectors are guessed by increasing norm; inside a shell all vectors are
    equally likely so only the index range of the shell matters.
    first_index=1 gives the one-based convention.
    """
    log_norm = log_rho_lattice(sigma, n)
    g = gqc = 0.0
    prev = 0
    ell = 0
    while True:
        cur = point_count(n, ell)
        cnt = cur - prev
        if cnt:
            w = math.exp(-ell / (2 * sigma * sigma) - log_norm)
            lo, hi = prev + first_index, cur - 1 + first_index
            g += w * cnt * (lo + hi) / 2
            gqc += w * _sum_sqrt(lo, hi)
            if w * cnt < tol * max(g, 1e-300) and ell > 4 * sigma * sigma * n:
                break
        prev = cur
        ell += 1
    return g, gqc


def truncated_guessing(sigma, n, bound):
    """Exact (G, G^qc) of D_{Z^n, sigma} restricted to the box [-bound, bound]^n, by enumeration."""
    if (2 * bound + 1) ** n > MAX_ENUMERATION:
        raise UnsupportedSizeError("box too large to enumerate")
    xs = np.arange(-bound, bound + 1)
    w1 = np.exp(-xs.astype(float) ** 2 / (2 * sigma * sigma))
    w = w1
    for _ in range(n - 1):
        w = np.multiply.outer(w, w1)
    p = np.sort(w.ravel())[::-1]
    p /= p.sum()
    i = np.arange(len(p), dtype=float)
    return float(i @ p), float(np.sqrt(i) @ p)


def a_sigma(sigma):
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    t = math.pi ** 2 * sigma ** 2
    return math.exp(8 * t * math.exp(-2 * t) * math.tanh(t))


def bound_G(sigma, n, modular=False):
    """log2 upper bound on G(D_{Z^n, sigma}); doubled when modular.

    For n < 4 the bound is not proven, so the exact shell value is returned.
    """
    if n < 4:
        g, _ = shell_guessing(sigma, n)
        return math.log2(g) + (1.0 if modular else 0.0)
    val = n + log_rho_lattice(sigma, n) / LN2 - math.log2(-math.expm1(-1 / (2 * sigma * sigma)))
    return val + (1.0 if modular else 0.0)


def bound_Gqc(sigma, n, modular=False):
    """log2 upper bound on G^qc(D_{Z^n, sigma}); times 3/2 when modular."""
    if sigma < GQC_SIGMA_MIN:
        raise DomainError(f"the G^qc bound needs sigma >= (2/(27 pi^2))^(1/4) ~ {GQC_SIGMA_MIN:.4f}")
    val = (math.log2(7 / 6) + 0.75 * n * math.log2(1.5) + 0.5 * log_rho_lattice(sigma, n) / LN2
           - 1.5 * math.log2(-math.expm1(-1 / (3 * sigma * sigma))))
    return val + (math.log2(1.5) if modular else 0.0)


def entropy_relative_bounds(sigma, n, entropy="exact"):
    """
    (log2 G bound, log2 G^qc bound) expressed relative to the entropy H of D_{Z^n, sigma}.

    entropy="exact" uses n times the exact one-dimensional entropy; "upper"
    substitutes the closed-form upper bound (1/2 + ln(sigma sqrt(2 pi)) + ln coth(pi^2 sigma^2)) / ln 2
    per coordinate, which is what the reference estimator does.
    """
    if entropy == "exact":
        H = n * entropy_1d(sigma)
    elif entropy == "upper":
        H = n * entropy_upper_1d(sigma)
    else:
        raise DomainError(f"unknown entropy mode {entropy!r}")
    a = a_sigma(sigma)
    g = H + n * math.log2(2 * a / math.sqrt(math.e)) - math.log2(-math.expm1(-1 / (2 * sigma * sigma)))
    gqc = (H / 2 + n / 4 * math.log2(27 * a * a / (8 * math.e)) + math.log2(7 / 6)
           - 1.5 * math.log2(-math.expm1(-1 / (3 * sigma * sigma))))
    return g, gqc


def gaussian_bounds(sigma, n, modular=False):
    lo, hi = entropy_sandwich(sigma, n)
    gqc = bound_Gqc(sigma, n, modular) if sigma >= GQC_SIGMA_MIN else math.inf
    return GuessingBounds(
        g_upper=bound_G(sigma, n, modular),
        gqc_upper=gqc,
        a_sigma=a_sigma(sigma),
        entropy_lo=lo,
        entropy_hi=hi,
        modular_factor_applied=modular,
        exact=n < 4,
    )


def massey_lower(entropy_bits):
    """Massey's lower bound 2^(H-2) + 1, valid when H >= 2."""
    return 2.0 ** (entropy_bits - 2) + 1


__all__ = [
    "GuessingReport", "GuessingBounds", "exact_guessing", "modular_gaussian_order",
    "shell_guessing", "truncated_guessing", "a_sigma", "bound_G", "bound_Gqc",
    "entropy_relative_bounds", "gaussian_bounds", "massey_lower", "theta",
]
