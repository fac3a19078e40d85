"""
Cost estimation for the dual attack on LWE, classical and quantum.

The secret is split as s = (s_enum, s_fft, s_lat) with k_enum + k_fft + k_lat = n.
Short vectors of the lattice generated by [[alpha I_m, 0], [A_lat^T, q I_k_lat]]
are produced by BKZ + sieving; D of them feed a distinguisher that is
evaluated on every guess of s_enum (classically through an FFT over the
s_fft part modulo p, quantumly through mean estimation inside a quantum
guessing search).

Two conventions for the sample count D are available:

"reference"
    D = D_eq * exp(k_fft/3 * (pi sigma_s / p)^2) * (k_enum H + k_fft ln p + ln(1/mu)),
    the closed form used by the lattice-estimator MATZOV model, with H the
    per-coordinate entropy upper bound.  This is the default and reproduces
    the published tables.
"analytic"
    The product D_eq * D_round * D_arg * D_fpfn of the averaged
    distinguisher analysis.
"""
import json
import math
from dataclasses import asdict, dataclass, field, replace

from . import costmodels as cm
from .gaussian import (DomainError, GaussianSpec, entropy_upper_1d, modular_pmf, std_normal_inv,
                       std_normal_isf_log2, theta)
from .guessing import entropy_relative_bounds

LN2 = math.log(2)


class InfeasibleError(RuntimeError):
    """No parameter choice gives a finite cost."""


@dataclass(frozen=True)
class LweParameters:
    n: int
    m: int
    q: int
    sigma_s: float
    sigma_e: float

    def __post_init__(self):
        if self.q < 2:
            raise DomainError("q must be >= 2")
        if self.m < 1 or self.n < 1:
            raise DomainError("n and m must be >= 1")
        if not (self.sigma_s > 0 and self.sigma_e > 0):
            raise DomainError("widths must be positive")

    @property
    def alpha(self):
        return self.sigma_e / self.sigma_s


@dataclass(frozen=True)
class AttackParameters:
    beta0: int
    beta1: int | None
    k_enum: int
    k_fft: int
    k_lat: int
    p: int
    mu: float = 0.25
    nu: float = 0.5
    eta: float | None = None

    @classmethod
    def build(cls, lwe, beta0, k_enum, k_fft, p, nu=0.5, beta1=None, mu=None):
        return cls(beta0=beta0, beta1=beta1, k_enum=k_enum, k_fft=k_fft,
                   k_lat=lwe.n - k_enum - k_fft, p=p, mu=nu / 2 if mu is None else mu, nu=nu)

    def validate(self, lwe, m=None):
        m = lwe.m if m is None else m
        if min(self.k_enum, self.k_fft, self.k_lat) < 0:
            raise DomainError("k_enum, k_fft, k_lat must be nonnegative")
        if self.k_enum + self.k_fft + self.k_lat != lwe.n:
            raise DomainError("k_enum + k_fft + k_lat must equal n")
        d = m + self.k_lat
        for b in (self.beta0, self.beta1):
            if b is not None and not 2 <= b <= d:
                raise DomainError(f"block size {b} outside [2, d={d}]")
        if self.p < 2:
            raise DomainError("p must be >= 2")
        if self.p > lwe.q:
            raise DomainError("p must not exceed q")
        if not (0 < self.mu < 1 and 0 < self.nu < 1):
            raise DomainError("mu and nu must lie in (0, 1)")


@dataclass(frozen=True)
class DistinguisherTerms:
    log2_eq: float
    log2_round: float
    log2_arg: float
    log2_fpfn: float
    phi_fp: float
    phi_fn: float
    tau_sq: float
    convention: str = "analytic"

    @staticmethod
    def _lin(x):
        return 2.0 ** x if x < 1000 else math.inf

    @property
    def d_eq(self):
        return self._lin(self.log2_eq)

    @property
    def d_round(self):
        return self._lin(self.log2_round)

    @property
    def d_arg(self):
        return self._lin(self.log2_arg)

    @property
    def d_fpfn(self):
        return self._lin(self.log2_fpfn)


@dataclass
class CostEstimate:
    total_log2: float
    reduction_log2: float
    search_log2: float
    D_log2: float
    C_log2: float
    ell: float
    params: AttackParameters
    model: str
    m: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["params"] = asdict(self.params)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class EstimatorConfig:
    samples: str = "reference"
    entropy: str = "upper"
    fill_cost: float = 640.0
    fft_cost: float = 1024.0
    search: str = "reference"
    k_step: int = 10
    beta_min: int = 50
    beta_step: int = 8
    optimize_m: bool = False
    modular_guess: bool = False
    grid_k_max: int = 160
    grid_step: int = 4
    m_step: int = 32

    def __post_init__(self):
        if self.samples not in ("reference", "analytic"):
            raise DomainError(f"unknown sample-count convention {self.samples!r}")
        if self.search not in ("reference", "grid"):
            raise DomainError(f"unknown search mode {self.search!r}")
        if min(self.k_step, self.beta_step, self.grid_step, self.m_step) < 1:
            raise DomainError("search steps must be >= 1")


DEFAULT_CONFIG = EstimatorConfig()


def _lse(*xs):
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    if m == math.inf:
        return m
    return m + math.log2(sum(2.0 ** (x - m) for x in xs))


def volume_log2(lwe, k_lat, m=None):
    m = lwe.m if m is None else m
    return m * math.log2(lwe.alpha) + k_lat * math.log2(lwe.q)


def _sinc(x):
    return math.sin(x) / x


def _fp_tail_log2(mu, n_enum_log2, k_fft, p):
    return math.log2(mu / 2) - max(n_enum_log2, 0.0) - k_fft * math.log2(p)


def _phi_pair(mu, n_enum_log2, k_fft, p):
    phi_fp = std_normal_isf_log2(_fp_tail_log2(mu, n_enum_log2, k_fft, p))
    phi_fn = std_normal_inv(1 - mu / 2)
    return phi_fp, phi_fn


def _chi0(sigma):
    """Probability of 0 under the discrete Gaussian of width sigma."""
    return 1.0 / theta(sigma)


def _log2_d_eq(sigma_s, ell, q):
    return 4 * (math.pi * sigma_s * ell / q) ** 2 / LN2


def distinguisher_terms(lwe, ap, ell, averaged=True, s=None, e=None, n_enum=None, m=None, entropy="exact"):
    """
    Sample-count factors of the distinguisher.

    averaged=True gives the expectation over s ~ chi_s, e ~ chi_e.  With
    averaged=False the secret s = (s_enum, s_fft, s_lat), the error e and the
    rank n_enum of s_enum among the enumerated candidates must be supplied.
    """
    if ap.p < 2:
        raise DomainError("degenerate modulus p")
    if not ell > 0:
        raise DomainError("ell must be positive")
    m = lwe.m if m is None else m
    q, p, mu = lwe.q, ap.p, ap.mu
    k_enum, k_fft, k_lat = ap.k_enum, ap.k_fft, ap.k_lat
    dim = m + k_lat
    if averaged:
        tau_sq = (lwe.sigma_s * ell) ** 2
        log2_eq = _log2_d_eq(lwe.sigma_s, ell, q)
        log2_round = 0.0
        if k_fft:
            red = modular_pmf(GaussianSpec(lwe.sigma_s, 1, p)).pmf
            for sb, w in red.items():
                if sb:
                    log2_round -= 2 * k_fft * w * math.log2(_sinc(math.pi * sb / p))
        c = 8 * math.pi ** 2 * ell ** 2 / (q ** 2 * dim)
        prod = ((_chi0(lwe.sigma_e) + math.exp(-c / lwe.alpha ** 2)) ** m
                * (_chi0(lwe.sigma_s) + math.exp(-c)) ** k_lat)
        d_arg = min(0.5 * math.exp(2 * prod), 1.5) if prod < 1 else 1.5
        log2_arg = math.log2(d_arg)
        n_enum_log2 = entropy_relative_bounds(lwe.sigma_s, k_enum, entropy)[0] if k_enum else 0.0
        phi_fp, phi_fn = _phi_pair(mu, n_enum_log2, k_fft, p)
        log2_fpfn = 2 * math.log2(phi_fp + phi_fn) + math.log2(mu)
    else:
        if s is None or e is None or n_enum is None:
            raise DomainError("fixed-secret terms need s, e and n_enum")
        s = [int(v) for v in s]
        s_fft = s[k_enum:k_enum + k_fft]
        s_lat = s[k_enum + k_fft:]
        e_sq = sum(int(v) ** 2 for v in e)
        tau_sq = (e_sq / lwe.alpha ** 2 + sum(v * v for v in s_lat)) / dim * ell ** 2
        log2_eq = 4 * math.pi ** 2 * tau_sq / q ** 2 / LN2
        log2_round = sum(-2 * math.log2(abs(_sinc(math.pi * v / p))) for v in s_fft if v)
        log2_arg = math.log2(0.5 + math.exp(-8 * math.pi ** 2 * tau_sq / q ** 2))
        phi_fp, phi_fn = _phi_pair(mu, math.log2(max(n_enum, 1)), k_fft, p)
        log2_fpfn = 2 * math.log2(phi_fp + phi_fn)
    return DistinguisherTerms(log2_eq, log2_round, log2_arg, log2_fpfn, phi_fp, phi_fn, tau_sq, "analytic")


def reference_terms(lwe, ap, ell):
    """Sample-count factors in the closed form of the reference estimator."""
    H = entropy_upper_1d(lwe.sigma_s)
    log2_eq = _log2_d_eq(lwe.sigma_s, ell, lwe.q)
    log2_round = ap.k_fft / 3 * (lwe.sigma_s * math.pi / ap.p) ** 2 / LN2
    log2_fpfn = math.log2(ap.k_enum * H + ap.k_fft * math.log(ap.p) + math.log(1 / ap.mu))
    n_enum_log2 = entropy_relative_bounds(lwe.sigma_s, ap.k_enum, "upper")[0] if ap.k_enum else 0.0
    phi_fp, phi_fn = _phi_pair(ap.mu, n_enum_log2, ap.k_fft, ap.p)
    tau_sq = (lwe.sigma_s * ell) ** 2
    return DistinguisherTerms(log2_eq, log2_round, 0.0, log2_fpfn, phi_fp, phi_fn, tau_sq, "reference")


def required_samples(terms):
    """log2 D."""
    return terms.log2_eq + terms.log2_round + terms.log2_arg + terms.log2_fpfn


def threshold_C(terms, D_log2):
    """(C, log2 C) with C = phi_fp * sqrt(D_arg * D)."""
    c_log2 = math.log2(terms.phi_fp) + (terms.log2_arg + D_log2) / 2
    return (2.0 ** c_log2 if c_log2 < 1000 else math.inf), c_log2


def eta_max(terms, mu):
    if not terms.phi_fp > 0:
        raise DomainError("phi_fp must be positive")
    return math.sqrt(2 * math.pi) * mu / (8 * terms.phi_fp)


def _terms(lwe, ap, ell, m, config):
    if config.samples == "reference":
        return reference_terms(lwe, ap, ell)
    return distinguisher_terms(lwe, ap, ell, averaged=True, m=m, entropy=config.entropy)


def _reduction(lwe, ap, model, m):
    d = m + ap.k_lat
    rc = cm.reduction_cost(d, ap.beta0, model, volume_log2(lwe, ap.k_lat, m))
    if ap.beta1 is not None and ap.beta1 != rc.beta1:
        sv = cm.sieve_cost(ap.beta1, model)
        rc = replace(rc, beta1=ap.beta1, log2_sieve=sv, log2_nsieve=cm.n_sieve(ap.beta1, model))
    return rc


def _estimate(lwe, ap, model, config, m, quantum):
    ap.validate(lwe, m)
    rc = _reduction(lwe, ap, model, m)
    terms = _terms(lwe, ap, rc.expected_length, m, config)
    D = required_samples(terms)
    red = cm.sampling_cost(rc, D, model)
    g, gqc = entropy_relative_bounds(lwe.sigma_s, ap.k_enum, config.entropy)
    if quantum:
        if ap.k_enum == 0:
            gqc = 0.0  # nothing to guess: a single verification
        elif config.modular_guess:
            gqc += math.log2(1.5)
        search = gqc + ap.k_fft / 2 * math.log2(ap.p) + D / 2
    else:
        if config.modular_guess:
            g += 1.0
        fill = math.log2(config.fill_cost) + D
        fft = (math.log2(config.fft_cost * ap.k_fft) + (ap.k_fft + 1) * math.log2(ap.p)) if ap.k_fft else -math.inf
        search = g + _lse(fill, fft)
    _, c_log2 = threshold_C(terms, D)
    ap = replace(ap, beta1=rc.beta1, eta=eta_max(terms, ap.mu))
    return CostEstimate(
        total_log2=_lse(red, search),
        reduction_log2=red,
        search_log2=search,
        D_log2=D,
        C_log2=c_log2,
        ell=rc.expected_length,
        params=ap,
        model=model.name,
        m=m,
        extra={"beta_sieve": rc.beta1, "log2_bkz": rc.log2_bkz, "log2_sieve": rc.log2_sieve,
               "samples": terms.convention},
    )


def quantum_attack_cost(lwe, ap, model, config=DEFAULT_CONFIG, m=None):
    """Cost of the quantum dual attack: sampling + G^qc * p^(k_fft/2) * sqrt(D)."""
    if not model.quantum_search:
        raise DomainError(f"model {model.name} does not cost the quantum attack")
    return _estimate(lwe, ap, model, config, lwe.m if m is None else m, quantum=True)


def classical_attack_cost(lwe, ap, model, config=DEFAULT_CONFIG, m=None):
    """Cost of the classical FFT dual attack (quantum sieving allowed for QN, Q0)."""
    if model.quantum_search:
        raise DomainError(f"model {model.name} costs the quantum attack")
    return _estimate(lwe, ap, model, config, lwe.m if m is None else m, quantum=False)


def attack_cost(lwe, ap, model, config=DEFAULT_CONFIG, m=None):
    f = quantum_attack_cost if model.quantum_search else classical_attack_cost
    return f(lwe, ap, model, config, m)


def _key(est):
    p = est.params
    return (est.total_log2, p.beta0, p.k_enum, p.k_fft, p.p)


class _Search:
    def __init__(self, lwe, model, nu, config, m):
        self.lwe, self.model, self.nu, self.config, self.m = lwe, model, nu, config, m
        self.evals = 0

    def cost(self, beta, k_enum, k_fft, p):
        self.evals += 1
        ap = AttackParameters.build(self.lwe, beta, k_enum, k_fft, p, self.nu)
        try:
            return attack_cost(self.lwe, ap, self.model, self.config, self.m)
        except (DomainError, OverflowError, ValueError):
            return None

    def best_beta(self, k_enum, k_fft, p):
        """Coarse scan over beta followed by a unit-step refinement."""
        n = self.lwe.n
        lo = self.config.beta_min
        hi = min(n, 1754) - 1
        if hi < lo:
            return None
        step = self.config.beta_step
        best = None
        for b in list(range(lo, hi + 1, step)) + [hi]:
            est = self.cost(b, k_enum, k_fft, p)
            if est is not None and (best is None or _key(est) < _key(best)):
                best = est
        if best is None:
            return None
        b0 = best.params.beta0
        for b in range(max(lo, b0 - step + 1), min(hi, b0 + step - 1) + 1):
            est = self.cost(b, k_enum, k_fft, p)
            if est is not None and _key(est) < _key(best):
                best = est
        return best


def _better_or_equal(new, best):
    return best is None or (new is not None and new.total_log2 <= best.total_log2)


def _search_reference(s):
    """Nested early-abort loops over p, k_enum and k_fft, the way the reference estimator searches."""
    n, q, step = s.lwe.n, s.lwe.q, s.config.k_step
    best_p = None
    p = 2
    while p < q:
        best_e = None
        for k_enum in range(0, n, step):
            best_f = None
            for k_fft in range(0, n - k_enum, step):
                est = s.best_beta(k_enum, k_fft, p)
                if _better_or_equal(est, best_f):
                    best_f = est if est is not None else best_f
                else:
                    break
            if _better_or_equal(best_f, best_e):
                best_e = best_f if best_f is not None else best_e
            else:
                break
        if _better_or_equal(best_e, best_p):
            best_p = best_e if best_e is not None else best_p
        else:
            break
        # once k_fft = 0 wins, p no longer matters
        if best_p is not None and best_p.params.k_fft == 0 and p > 2:
            break
        p += 1
    return best_p


def _search_grid(s):
    """Coarse grid over (k_enum, k_fft, p), then unit-step refinement around the best cell."""
    n, q, g = s.lwe.n, s.lwe.q, s.config.grid_step
    kmax = min(n, s.config.grid_k_max)
    ps = sorted({p for p in range(2, 13) if p < q} | {q})
    best = None

    def consider(est):
        nonlocal best
        if est is not None and (best is None or _key(est) < _key(best)):
            best = est

    for p in ps:
        for k_enum in range(0, kmax + 1, g):
            for k_fft in range(0, min(kmax, n - k_enum) + 1, g):
                if p == q and k_fft:
                    break
                consider(s.best_beta(k_enum, k_fft, p))
    if best is None:
        return None
    c = best.params
    for k_enum in range(max(0, c.k_enum - 3), min(n, c.k_enum + 3) + 1):
        for k_fft in range(max(0, c.k_fft - 3), min(n - k_enum, c.k_fft + 3) + 1):
            consider(s.best_beta(k_enum, k_fft, c.p))
    return best


def optimize(lwe, model, nu=0.5, config=DEFAULT_CONFIG):
    """Minimise the total cost over (beta, k_enum, k_fft, p), and over m if configured."""
    if not 0 < nu < 1:
        raise DomainError("nu must lie in (0, 1)")
    if config.optimize_m:
        # fixed grid, so a larger budget only adds candidates
        ms = sorted(set(range(config.m_step, lwe.m + 1, config.m_step)) | {lwe.m})
    else:
        ms = [lwe.m]
    search = _search_reference if config.search == "reference" else _search_grid
    best = None
    for m in ms:
        est = search(_Search(lwe, model, nu, config, m))
        if est is not None and (best is None or (est.total_log2, est.m) < (best.total_log2, best.m)):
            best = est
    if best is None or not math.isfinite(best.total_log2):
        raise InfeasibleError(f"no feasible parameters for model {model.name}")
    return best


TABLE_COLUMNS = ("model", "total", "red", "search", "D", "beta0", "beta1", "k_enum", "k_fft", "p", "m")


def table_row(est):
    p = est.params
    return (est.model, f"{est.total_log2:.1f}", f"{est.reduction_log2:.1f}", f"{est.search_log2:.1f}",
            f"{est.D_log2:.1f}", str(p.beta0), str(p.beta1), str(p.k_enum), str(p.k_fft), str(p.p), str(est.m))


def format_table(rows, header=TABLE_COLUMNS):
    """Aligned plain-text table from a header and rows of strings."""
    rows = [tuple(header)] + [tuple(r) for r in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
