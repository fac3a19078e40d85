"""
Discrete Gaussian primitives: theta-series masses, the modular discrete
Gaussian, Shannon entropy, integer point counts in balls and the standard
normal distribution.

The width convention throughout is rho_sigma(x) = exp(-|x|^2 / (2 sigma^2)).
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a formula."""


class UnsupportedSizeError(DomainError):
    """Raised when an exhaustive computation would be too large."""


@dataclass(frozen=True)
class GaussianSpec:
    sigma: float
    n: int = 1
    q: int | None = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.q is not None and self.q < 2:
            raise DomainError(f"q must be >= 2, got {self.q}")


@dataclass
class ModularGaussian:
    spec: GaussianSpec
    pmf: dict = field(repr=False)
    entropy_bits: float

    def support(self):
        return sorted(self.pmf)

    def probabilities(self):
        """Masses ordered by representative."""
        return np.array([self.pmf[x] for x in self.support()])


def _check_sigma(sigma):
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")


def rho(sigma, norm_sq):
    _check_sigma(sigma)
    if norm_sq < 0:
        raise DomainError("squared norm must be nonnegative")
    return math.exp(-norm_sq / (2 * sigma * sigma))


def theta_cutoff(sigma):
    return math.ceil(13 * sigma) + 2


@lru_cache(maxsize=4096)
def theta(sigma):
    """rho_sigma(Z), the one-dimensional theta series."""
    _check_sigma(sigma)
    K = theta_cutoff(sigma)
    k = np.arange(1, K + 1, dtype=float)
    total = 1.0 + 2.0 * math.fsum(np.exp(-k * k / (2 * sigma * sigma)))
    nxt = 2.0 * math.exp(-(K + 1) ** 2 / (2 * sigma * sigma))
    if nxt >= 1e-18 * total:
        raise ArithmeticError("theta series truncation is not tight enough")
    return total


def log_rho_lattice(sigma, n):
    """Natural log of rho_sigma(Z^n)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return n * math.log(theta(sigma))


def rho_lattice(sigma, n):
    """rho_sigma(Z^n) = rho_sigma(Z)^n. Overflow raises; use log_rho_lattice."""
    lv = log_rho_lattice(sigma, n)
    if lv > 709.0:
        raise OverflowError("rho_lattice overflows a double, use log_rho_lattice")
    return math.exp(lv)


def rho_lattice_bounds(sigma, n):
    """(lower, upper) sandwich for rho_sigma(Z^n) from Poisson summation."""
    lo = sigma * math.sqrt(2 * math.pi)
    hi = lo / math.tanh(math.pi ** 2 * sigma ** 2)
    return lo ** n, hi ** n


def representatives(q):
    """Centered representatives of Z_q, i.e. x with -q/2 < x <= q/2 for even q."""
    return list(range(-((q - 1) // 2), q // 2 + 1))


def centered(x, q):
    """Centered lift of x mod q (works elementwise on arrays)."""
    r = np.mod(x, q)
    return np.where(r > q // 2, r - q, r) if isinstance(r, np.ndarray) else (r - q if r > q // 2 else r)


def modular_pmf(spec):
    if spec.q is None:
        raise DomainError("modular_pmf needs a modulus")
    sigma, q = spec.sigma, spec.q
    xs = np.array(representatives(q), dtype=float)
    K = math.ceil(13 * sigma / q) + 2
    ks = np.arange(-K, K + 1, dtype=float)
    # mass(x) = sum_k rho(x + kq); the normaliser rho(Z) cancels after renormalising
    pts = xs[:, None] + q * ks[None, :]
    masses = np.exp(-pts * pts / (2 * sigma * sigma)).sum(axis=1)
    masses = masses / masses.sum()
    pmf = {int(x): float(p) for x, p in zip(xs, masses)}
    return ModularGaussian(spec=spec, pmf=pmf, entropy_bits=shannon_entropy(masses))


def shannon_entropy(pmf):
    """Entropy in bits of a probability vector (or the values of a dict)."""
    if isinstance(pmf, dict):
        pmf = list(pmf.values())
    p = np.asarray(pmf, dtype=float)
    if np.any(p < 0):
        raise DomainError("negative probability mass")
    if abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"masses sum to {p.sum()}, not 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


@lru_cache(maxsize=1024)
def entropy_1d(sigma):
    """Exact entropy (bits) of the discrete Gaussian over Z."""
    K = theta_cutoff(sigma) + math.ceil(13 * sigma)
    k = np.arange(-K, K + 1, dtype=float)
    p = np.exp(-k * k / (2 * sigma * sigma))
    p /= p.sum()
    nz = p[p > 1e-300]
    return float(-(nz * np.log2(nz)).sum())


def entropy_upper_1d(sigma):
    """Per-coordinate entropy upper bound (1/2 + ln(sigma sqrt(2pi)) + ln coth(pi^2 sigma^2)) / ln 2."""
    _check_sigma(sigma)
    return (0.5 + math.log(sigma * math.sqrt(2 * math.pi))
            - math.log(math.tanh(math.pi ** 2 * sigma ** 2))) / math.log(2)


def entropy_sandwich(sigma, n):
    """Lower and upper bounds on H(D_{Z^n, sigma}) in bits."""
    base = n * (0.5 + math.log(sigma * math.sqrt(2 * math.pi))) / math.log(2)
    s2 = sigma * sigma
    t = math.tanh(math.pi ** 2 * s2)
    lo = base - n * 8 * math.pi ** 2 * s2 * math.exp(-2 * math.pi ** 2 * s2) * t / math.log(2)
    hi = base - n * math.log2(t)
    return lo, hi


MAX_POINT_COUNT_DIM = 8


def point_count(n, ell):
    """Number of x in Z^n with |x|^2 <= ell."""
    if n > MAX_POINT_COUNT_DIM or n < 1:
        raise UnsupportedSizeError(f"point_count supports 1 <= n <= {MAX_POINT_COUNT_DIM}")
    if ell < -1:
        raise DomainError("ell must be >= -1")
    return _count(n, int(ell))


@lru_cache(maxsize=None)
def _count(n, ell):
    if ell < 0:
        return 0
    if n == 0:
        return 1
    r = math.isqrt(ell)
    return _count(n - 1, ell) + 2 * sum(_count(n - 1, ell - x * x) for x in range(1, r + 1))


def std_normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


def log_normal_tail(x):
    """ln(1 - Phi(x)), accurate far into the upper tail."""
    if x < 30:
        return math.log(0.5 * math.erfc(x / math.sqrt(2)))
    # asymptotic series of the Mills ratio
    z = 1.0 / (x * x)
    series = 1 - z + 3 * z ** 2 - 15 * z ** 3 + 105 * z ** 4
    return -x * x / 2 - math.log(x * math.sqrt(2 * math.pi)) + math.log(series)


def std_normal_inv(p):
    """x with Phi(x) = p, to within 1e-10."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if p > 0.5:
        # 1 - p is exact here; the lower tail avoids cancellation in Phi
        return -std_normal_inv(1.0 - p)
    lo, hi = -40.0, 40.0
    x = 0.0
    for _ in range(200):
        x = 0.5 * (lo + hi)
        if std_normal_cdf(x) < p:
            lo = x
        else:
            hi = x
        if hi - lo < 1e-13:
            break
    # a few Newton steps polish the bisection
    for _ in range(3):
        dens = math.exp(-x * x / 2) / math.sqrt(2 * math.pi)
        if dens < 1e-300:
            break
        x -= (std_normal_cdf(x) - p) / dens
    return x


def std_normal_isf_log2(log2_tail):
    """x with 1 - Phi(x) = 2^log2_tail, for tails far below double precision."""
    if log2_tail >= 0:
        raise DomainError("tail probability must be < 1")
    if log2_tail > -40:
        return -std_normal_inv(2.0 ** log2_tail)
    target = log2_tail * math.log(2)
    lo, hi = 0.0, math.sqrt(-2 * target) + 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if log_normal_tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
