"""
Small-scale laboratory for the classical dual attack.

Generates toy LWE instances, obtains short dual vectors (LLL plus
enumeration, or synthetic draws), evaluates the score F_L, runs the FFT
based attack, and checks the distinguisher statistics by Monte-Carlo.
Also solves the sparse-input FFT threshold problem and reports its cost
regimes.

Every entry point is a pure function of its arguments and seed.
"""
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import dualattack as da
from .fft import dftn
from .gaussian import DomainError, GaussianSpec, UnsupportedSizeError, centered, modular_pmf, std_normal_cdf
from .guessing import modular_gaussian_order

MAX_LLL_DIM = 30
Z95 = 1.959963984540054


# ---------------------------------------------------------------- instances

@dataclass
class LweInstance:
    A: np.ndarray
    b: np.ndarray
    s: np.ndarray
    e: np.ndarray
    q: int
    sigma_s: float
    sigma_e: float
    seed: int

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def lwe(self):
        return da.LweParameters(self.n, self.m, self.q, self.sigma_s, self.sigma_e)

    def dumps(self):
        """Plain-text dump: header line, then A, b, s, e as whitespace separated rows."""
        rows = [f"{self.n} {self.m} {self.q} {self.sigma_s!r} {self.sigma_e!r} {self.seed}"]
        rows += [" ".join(map(str, r)) for r in self.A]
        rows += [" ".join(map(str, v)) for v in (self.b, self.s, self.e)]
        return "\n".join(rows) + "\n"

    @classmethod
    def loads(cls, text):
        lines = text.strip().splitlines()
        n, m, q, ss, se, seed = lines[0].split()
        n, m = int(n), int(m)
        A = np.array([[int(v) for v in ln.split()] for ln in lines[1:1 + m]], dtype=np.int64)
        b, s, e = (np.array([int(v) for v in ln.split()], dtype=np.int64) for ln in lines[1 + m:4 + m])
        return cls(A, b, s, e, int(q), float(ss), float(se), int(seed))


@lru_cache(maxsize=256)
def _cdf_table(sigma, q):
    mg = modular_pmf(GaussianSpec(sigma, 1, q))
    return np.array(mg.support(), dtype=np.int64), np.cumsum(mg.probabilities())


def sample_modular_gaussian(rng, sigma, q, size):
    """Inverse-cdf sampling from the exact modular Gaussian pmf; centred representatives."""
    if q > 2 ** 16:
        raise UnsupportedSizeError("simulator moduli are limited to 2^16")
    support, cdf = _cdf_table(float(sigma), int(q))
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return support[np.minimum(idx, len(support) - 1)]


def gen_lwe(n, m, q, sigma_s, sigma_e, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, q, size=(m, n), dtype=np.int64)
    s = sample_modular_gaussian(rng, sigma_s, q, n)
    e = sample_modular_gaussian(rng, sigma_e, q, m)
    b = (A @ s + e) % q
    return LweInstance(A, b, s, e, q, sigma_s, sigma_e, seed)


def split_columns(instance, ap):
    ke, kf = ap.k_enum, ap.k_fft
    A = instance.A
    return A[:, :ke], A[:, ke:ke + kf], A[:, ke + kf:]


# ---------------------------------------------------------------- reduction

def gram_schmidt(B):
    """(mu, |b*_i|^2) of the rows of B."""
    B = np.asarray(B, dtype=float)
    d = len(B)
    Bs = B.copy()
    mu = np.eye(d)
    bb = np.zeros(d)
    for i in range(d):
        if i:
            mu[i, :i] = (Bs[:i] @ B[i]) / bb[:i]
            Bs[i] = B[i] - mu[i, :i] @ Bs[:i]
        bb[i] = Bs[i] @ Bs[i]
    return mu, bb


def lll(B, delta=0.99):
    """LLL on the rows of B. Returns (reduced basis, integer transform U with reduced = U @ B)."""
    B = np.array(B, dtype=float)
    d = len(B)
    if d > MAX_LLL_DIM:
        raise UnsupportedSizeError(f"in-repo LLL is capped at dimension {MAX_LLL_DIM}")
    U = np.eye(d, dtype=np.int64)
    mu, bb = gram_schmidt(B)
    k = 1
    while k < d:
        for j in range(k - 1, -1, -1):
            r = round(mu[k, j])
            if r:
                B[k] -= r * B[j]
                U[k] -= r * U[j]
                mu[k, :j + 1] -= r * mu[j, :j + 1]
        if bb[k] >= (delta - mu[k, k - 1] ** 2) * bb[k - 1]:
            k += 1
        else:
            B[[k - 1, k]] = B[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            mu, bb = gram_schmidt(B)
            k = max(k - 1, 1)
    return B, U


def enumerate_short(B, radius, limit=200000):
    """
    Coefficient vectors c (w.r.t. the rows of B) of all nonzero lattice vectors
    with norm <= radius, one per +-pair (highest nonzero coefficient positive).
    """
    mu, bb = gram_schmidt(B)
    d = len(B)
    R2 = radius * radius * (1 + 1e-12)
    out = []
    x = [0] * d
    xs = np.zeros(d)

    def rec(i, partial, top):
        if len(out) >= limit:
            return
        c = -float(xs[i + 1:] @ mu[i + 1:, i])
        rad = math.sqrt(max(R2 - partial, 0.0) / bb[i])
        lo, hi = math.ceil(c - rad), math.floor(c + rad)
        if top:
            lo = max(lo, 0)
        for v in range(lo, hi + 1):
            nxt = partial + (v - c) ** 2 * bb[i]
            if nxt > R2:
                continue
            x[i] = v
            xs[i] = v
            if i == 0:
                if not (top and v == 0):
                    out.append(list(x))
            else:
                rec(i - 1, nxt, top and v == 0)
        x[i] = 0
        xs[i] = 0

    rec(d - 1, 0.0, True)
    return out


# ---------------------------------------------------------------- dual vectors

@dataclass
class DualVector:
    x: np.ndarray
    y_lat: np.ndarray
    y_enum: np.ndarray
    y_fft: np.ndarray
    xb: int
    norm: float
    synthetic: bool = False


def dual_basis(instance, ap):
    """Rows generate {(alpha x, A_lat^T x + q z)}."""
    _, _, A_lat = split_columns(instance, ap)
    m, k = instance.m, A_lat.shape[1]
    alpha = instance.sigma_e / instance.sigma_s
    B = np.zeros((m + k, m + k))
    B[:m, :m] = alpha * np.eye(m)
    B[:m, m:] = A_lat
    B[m:, m:] = instance.q * np.eye(k)
    return B


def _make_vector(instance, ap, x):
    A_enum, A_fft, A_lat = split_columns(instance, ap)
    q = instance.q
    alpha = instance.sigma_e / instance.sigma_s
    x = np.asarray(x, dtype=np.int64)
    y_lat = centered(x @ A_lat % q, q)
    norm = math.sqrt(alpha ** 2 * float(x @ x) + float(y_lat @ y_lat))
    return DualVector(x=x, y_lat=y_lat, y_enum=centered(x @ A_enum % q, q), y_fft=centered(x @ A_fft % q, q),
                      xb=int(x @ instance.b % q), norm=norm)


def is_dual_member(instance, ap, v):
    """Exact integer check that (alpha x, y_lat) lies in the dual lattice and the side data are consistent."""
    if v.synthetic:
        return False
    A_enum, A_fft, A_lat = split_columns(instance, ap)
    q = instance.q
    return (np.all((v.x @ A_lat - v.y_lat) % q == 0) and np.all((v.x @ A_enum - v.y_enum) % q == 0)
            and np.all((v.x @ A_fft - v.y_fft) % q == 0) and int(v.x @ instance.b - v.xb) % q == 0)


def _reduced_vectors(instance, ap, count, rng, radius_factor, batches):
    B0 = dual_basis(instance, ap)
    m = instance.m
    found = {}
    for batch in range(batches):
        if batch:
            # randomise the basis with a unimodular lower-triangular transform
            T = np.eye(len(B0), dtype=np.int64) + np.tril(rng.integers(-1, 2, size=B0.shape), -1)
        else:
            T = np.eye(len(B0), dtype=np.int64)
        R, U = lll(T @ B0)
        b_min = min(np.linalg.norm(R, axis=1))
        # grow the radius until enough vectors are inside it, then allow one enlargement
        radii = list(np.geomspace(b_min, radius_factor * b_min, 7)) + [1.15 * radius_factor * b_min]
        for radius in radii:
            for c in enumerate_short(R, radius):
                x = (np.asarray(c, dtype=np.int64) @ U @ T)[:m]
                if not x.any():
                    continue
                if x[np.flatnonzero(x)[-1]] < 0:
                    x = -x
                found.setdefault(tuple(x), x)
            if len(found) >= count:
                break
        if len(found) >= count:
            break
    vecs = sorted((_make_vector(instance, ap, x) for x in found.values()), key=lambda v: (v.norm, tuple(v.x)))
    if len(vecs) < count:
        warnings.warn(f"only {len(vecs)} of {count} dual vectors found", RuntimeWarning, stacklevel=3)
    return vecs[:count]


def _synthetic_vectors(instance, ap, count, rng, ell):
    """
    Virtual dual vectors: the short part (alpha x, y_lat) is drawn with i.i.d.
    modular-Gaussian coordinates of width ell/sqrt(d), y_enum and y_fft are
    uniform, and x^T b is set to the value a genuine dual vector would give.
    """
    q = instance.q
    m, k_lat = instance.m, ap.k_lat
    d = m + k_lat
    alpha = instance.sigma_e / instance.sigma_s
    w = ell / math.sqrt(d)
    s = instance.s
    s_enum, s_fft, s_lat = s[:ap.k_enum], s[ap.k_enum:ap.k_enum + ap.k_fft], s[ap.k_enum + ap.k_fft:]
    out = []
    for _ in range(count):
        x = sample_modular_gaussian(rng, w / alpha, q, m)
        y_lat = sample_modular_gaussian(rng, w, q, k_lat)
        y_enum = centered(rng.integers(0, q, ap.k_enum), q)
        y_fft = centered(rng.integers(0, q, ap.k_fft), q)
        xb = int(y_enum @ s_enum + y_fft @ s_fft + y_lat @ s_lat + x @ instance.e) % q
        norm = math.sqrt(alpha ** 2 * float(x @ x) + float(y_lat @ y_lat))
        out.append(DualVector(x, y_lat, y_enum, y_fft, xb, norm, synthetic=True))
    return out


def sample_dual_vectors(instance, ap, count, mode="reduced", seed=0, ell=None, radius_factor=1.3, batches=3):
    """Short dual vectors, by LLL + enumeration ("reduced") or drawn synthetically around length ell."""
    rng = np.random.default_rng(seed)
    if mode == "reduced":
        if instance.m + ap.k_lat > MAX_LLL_DIM:
            raise UnsupportedSizeError(f"reduced mode needs m + k_lat <= {MAX_LLL_DIM}")
        return _reduced_vectors(instance, ap, count, rng, radius_factor, batches)
    if mode == "synthetic":
        if ell is None or not ell > 0:
            raise DomainError("synthetic mode needs a positive target length ell")
        return _synthetic_vectors(instance, ap, count, rng, ell)
    raise DomainError(f"unknown sampling mode {mode!r}")


# ---------------------------------------------------------------- scoring

def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def psi_constant(p, q):
    """c_{q'} with q' = q / gcd(p, q): 0 for odd q', 1/(2 q') for even q'."""
    qp = q // math.gcd(p, q)
    return 0.0 if qp % 2 else 1 / (2 * qp)


@dataclass
class ScoreContext:
    L: list
    p: int
    q: int
    k_enum: int
    k_fft: int

    def psi(self, s_fft):
        c = psi_constant(self.p, self.q)
        return np.exp(2j * np.pi * c / self.p * np.sum(s_fft, axis=-1))

    def arrays(self):
        if not self.L:
            return (np.zeros((0, self.k_enum)), np.zeros((0, self.k_fft), dtype=np.int64), np.zeros(0))
        Y_enum = np.array([v.y_enum for v in self.L], dtype=float).reshape(len(self.L), self.k_enum)
        Y_fft = np.array([v.y_fft for v in self.L], dtype=float).reshape(len(self.L), self.k_fft)
        xb = np.array([v.xb for v in self.L], dtype=float)
        return Y_enum, round_half_away(self.p * Y_fft / self.q), xb


def score_FL(ctx, instance, s_enum_guess, s_fft_guess):
    """Re(psi(s_fft)^-1 sum_j exp(2 pi i/p (round(p y_fft/q).s_fft + (p/q)(y_enum.s_enum - x.b))))."""
    if instance is not None and instance.q != ctx.q:
        raise DomainError("context and instance moduli differ")
    if not ctx.L:
        return 0.0
    se = np.asarray(s_enum_guess, dtype=float).reshape(ctx.k_enum)
    sf = np.asarray(s_fft_guess, dtype=float).reshape(ctx.k_fft)
    Y_enum, U, xb = ctx.arrays()
    phase = 2 * np.pi / ctx.p * (U @ sf) + 2 * np.pi / ctx.q * (Y_enum @ se - xb)
    total = np.exp(1j * phase).sum()
    return float((total / ctx.psi(sf)).real)


def fft_cells(ctx):
    """Centred s_fft value of every cell of the p^k_fft table, in flat (C) order."""
    if ctx.k_fft == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.array(np.meshgrid(*([np.arange(ctx.p)] * ctx.k_fft), indexing="ij")).reshape(ctx.k_fft, -1).T
    return np.where(grid > ctx.p // 2, grid - ctx.p, grid)


def score_table(ctx, candidates):
    """Scores of every (candidate s_enum, s_fft cell) pair via table fill + FFT; shape (len(candidates), p^k_fft)."""
    S = np.asarray(candidates, dtype=float).reshape(len(candidates), ctx.k_enum)
    ncell = ctx.p ** ctx.k_fft
    if not ctx.L:
        return np.zeros((len(S), ncell))
    Y_enum, U, xb = ctx.arrays()
    strides = ctx.p ** np.arange(ctx.k_fft - 1, -1, -1)
    flat = (U % ctx.p) @ strides if ctx.k_fft else np.zeros(len(U), dtype=np.int64)
    onehot = np.zeros((len(U), ncell))
    onehot[np.arange(len(U)), flat] = 1.0
    E = np.exp(2j * np.pi / ctx.q * (S @ Y_enum.T - xb[None, :]))
    T = (E @ onehot).reshape((len(S),) + (ctx.p,) * ctx.k_fft)
    F = dftn(T, axes=range(1, ctx.k_fft + 1), sign=+1).reshape(len(S), ncell)
    cells = fft_cells(ctx)
    return (F / ctx.psi(cells)[None, :]).real


def candidate_order(sigma_s, q, k_enum):
    """All s_enum candidates in decreasing likelihood (ties broken by value)."""
    if k_enum == 0:
        return [()]
    if q ** k_enum > 2 ** 20:
        raise UnsupportedSizeError("too many s_enum candidates")
    return modular_gaussian_order(sigma_s, q, k_enum).order


@dataclass
class AttackResult:
    s_enum: tuple | None
    s_fft: tuple | None
    score: float
    tested: int
    debug_max_error: float | None = None


def run_classical_attack(instance, ap, C, vectors, candidates=None, debug=False, chunk=256):
    """
    FFT dual attack: for each s_enum candidate in decreasing likelihood fill the
    p^k_fft table, transform it, and return the first candidate whose best cell
    exceeds C.  Candidates are processed in chunks; the first hit in order is
    returned, so the outcome equals the one-at-a-time loop.
    """
    if ap.p ** ap.k_fft > 2 ** 22:
        raise UnsupportedSizeError("FFT table larger than 2^22")
    ctx = ScoreContext(list(vectors), ap.p, instance.q, ap.k_enum, ap.k_fft)
    cands = candidates if candidates is not None else candidate_order(instance.sigma_s, instance.q, ap.k_enum)
    cells = fft_cells(ctx)
    dbg = 0.0 if debug else None
    rng = np.random.default_rng(0)
    for start in range(0, len(cands), chunk):
        block = cands[start:start + chunk]
        tab = score_table(ctx, block)
        if debug:
            for _ in range(min(100, tab.size)):
                i, j = rng.integers(len(block)), rng.integers(tab.shape[1])
                direct = score_FL(ctx, instance, block[i], cells[j])
                dbg = max(dbg, abs(direct - tab[i, j]))
        best = tab.max(axis=1)
        hits = np.flatnonzero(best > C)
        if hits.size:
            i = int(hits[0])
            j = int(np.argmax(tab[i]))
            return AttackResult(tuple(block[i]), tuple(int(v) for v in cells[j]), float(tab[i, j]), start + i + 1, dbg)
    return AttackResult(None, None, float("nan"), len(cands), dbg)


# ---------------------------------------------------------------- statistics

def wilson_interval(k, n, z=Z95):
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class ToyConfig:
    n: int = 16
    m: int = 12
    q: int = 127
    sigma_s: float = 1.0
    sigma_e: float = 1.0
    k_enum: int = 2
    k_fft: int = 2
    p: int = 5
    mu: float = 0.25
    nu: float = 0.5
    mode: str = "reduced"
    ell: float | None = None
    max_vectors: int = 400

    def attack_parameters(self):
        return da.AttackParameters(beta0=2, beta1=2, k_enum=self.k_enum, k_fft=self.k_fft,
                                   k_lat=self.n - self.k_enum - self.k_fft, p=self.p, mu=self.mu, nu=self.nu)


@dataclass
class TrialSetup:
    instance: LweInstance
    ap: da.AttackParameters
    vectors: list
    terms: da.DistinguisherTerms
    D_log2: float
    C: float
    rank: int
    candidates: list
    ell: float


def _terms_for(instance, ap, ell, rank):
    return da.distinguisher_terms(instance.lwe, ap, ell, averaged=False, s=instance.s, e=instance.e,
                                  n_enum=rank + 1, m=instance.m)


def prepare_trial(cfg, seed):
    """Instance, dual vectors and the fixed-secret (D, C) of the distinguisher analysis."""
    inst = gen_lwe(cfg.n, cfg.m, cfg.q, cfg.sigma_s, cfg.sigma_e, seed)
    ap = cfg.attack_parameters()
    cands = candidate_order(cfg.sigma_s, cfg.q, cfg.k_enum)
    rank = cands.index(tuple(int(v) for v in inst.s[:cfg.k_enum]))
    if cfg.mode == "synthetic":
        ell = cfg.ell if cfg.ell is not None else 0.2 * cfg.q / cfg.sigma_s
        terms = _terms_for(inst, ap, ell, rank)
        D = required_count(terms)
        vecs = sample_dual_vectors(inst, ap, D, "synthetic", seed=seed + 1, ell=ell)
        ell_used = ell
    else:
        vecs = terms = ell_used = None
        want = 48
        while vecs is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                pool = sample_dual_vectors(inst, ap, want, "reduced", seed=seed + 1)
            for D in range(1, len(pool) + 1):
                ell_used = pool[D - 1].norm
                terms = _terms_for(inst, ap, ell_used, rank)
                if D >= required_count(terms):
                    vecs = pool[:D]
                    break
            if vecs is None:
                if len(pool) < want or want >= cfg.max_vectors:
                    warnings.warn("dual vector pool too small for the required sample count",
                                  RuntimeWarning, stacklevel=2)
                    vecs = pool
                want *= 2
    D_log2 = math.log2(len(vecs))
    C, _ = da.threshold_C(terms, D_log2)
    return TrialSetup(inst, ap, vecs, terms, D_log2, C, rank, cands, ell_used)


def required_count(terms):
    return max(1, math.ceil(2.0 ** da.required_samples(terms)))


@dataclass
class MonteCarloReport:
    trials: int
    successes: int
    success_rate: float
    success_ci: tuple
    target: float
    wrong_cells: int
    false_positives: int
    fp_rate: float
    fp_ci: tuple
    fp_predicted: float
    fp_gaussian: float
    wrong_fft_at_correct_enum: int
    correct_enum_cells: int
    details: list = field(default_factory=list)

    @property
    def passed(self):
        return self.success_rate >= self.target and self.fp_ci[1] <= 1.5 * self.fp_predicted

    def to_json(self):
        d = {k: v for k, v in self.__dict__.items() if k != "details"}
        d["passed"] = self.passed
        return json.dumps(d, sort_keys=True)


def run_monte_carlo(cfg=ToyConfig(), trials=50, seed=0):
    """
    Repeated attack on fresh toy instances with the fixed-secret D and C.
    Wrong-guess false positives are counted over every cell whose s_enum is wrong.
    """
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    succ = fp = wrong = 0
    weird = weird_total = 0
    pred_sum = gauss_sum = 0.0
    details = []
    for t in range(trials):
        st = prepare_trial(cfg, int(seeds[t]))
        res = run_classical_attack(st.instance, st.ap, st.C, st.vectors, st.candidates)
        true_enum = tuple(int(v) for v in st.instance.s[:cfg.k_enum])
        ok = res.s_enum == true_enum
        succ += ok
        ctx = ScoreContext(st.vectors, cfg.p, cfg.q, cfg.k_enum, cfg.k_fft)
        tab = np.vstack([score_table(ctx, st.candidates[i:i + 4096]) for i in range(0, len(st.candidates), 4096)])
        mask = np.ones(len(st.candidates), dtype=bool)
        mask[st.rank] = False
        cells_wrong = int(mask.sum()) * tab.shape[1]
        wrong += cells_wrong
        fp += int((tab[mask] > st.C).sum())
        pred_sum += cells_wrong * cfg.mu / (2 * (st.rank + 1) * cfg.p ** cfg.k_fft)
        # tail of a zero-mean score of variance D/2 at C
        gauss_sum += cells_wrong * (1 - std_normal_cdf(st.C / math.sqrt(len(st.vectors) / 2)))
        cells = fft_cells(ctx)
        true_fft = st.instance.s[cfg.k_enum:cfg.k_enum + cfg.k_fft]
        others = np.any(cells != true_fft, axis=1)
        weird += int((tab[st.rank][others] > st.C).sum())
        weird_total += int(others.sum())
        details.append({"seed": int(seeds[t]), "D": len(st.vectors), "C": st.C, "rank": st.rank,
                        "ell": st.ell, "success": bool(ok), "tested": res.tested})
    return MonteCarloReport(
        trials=trials, successes=succ, success_rate=succ / trials, success_ci=wilson_interval(succ, trials),
        target=1 - cfg.nu, wrong_cells=wrong, false_positives=fp, fp_rate=fp / max(wrong, 1),
        fp_ci=wilson_interval(fp, wrong), fp_predicted=pred_sum / max(wrong, 1),
        fp_gaussian=gauss_sum / max(wrong, 1),
        wrong_fft_at_correct_enum=weird, correct_enum_cells=weird_total, details=details)


def validate_statistics(cfg=None, trials=1000, seed=0, wrong_per_trial=200):
    """
    Moments of wrong-guess scores against the zero-mean, variance-D/2 model,
    false-positive rate at C against mu / (2 N_enum p^k_fft), and
    false-negative rate against mu/2, each with a Wilson interval.
    """
    if trials < 1000:
        raise DomainError("validate_statistics needs at least 1000 trials")
    cfg = cfg or ToyConfig(mode="synthetic")
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    z = []
    fp = wrong = fn = 0
    pred_fp = 0.0
    for t in range(trials):
        st = prepare_trial(cfg, int(seeds[t]))
        rng = np.random.default_rng(int(seeds[t]) ^ 0x5EED)
        ctx = ScoreContext(st.vectors, cfg.p, cfg.q, cfg.k_enum, cfg.k_fft)
        true_enum = st.instance.s[:cfg.k_enum]
        true_fft = st.instance.s[cfg.k_enum:cfg.k_enum + cfg.k_fft]
        fn += score_FL(ctx, st.instance, true_enum, true_fft) <= st.C
        idx = rng.integers(0, len(st.candidates) - 1, wrong_per_trial)
        idx = idx + (idx >= st.rank)
        cells = fft_cells(ctx)
        tab = score_table(ctx, [st.candidates[i] for i in idx])
        pick = tab[np.arange(len(idx)), rng.integers(0, len(cells), len(idx))]
        D = len(st.vectors)
        z.extend(pick / math.sqrt(D / 2))
        fp += int((pick > st.C).sum())
        wrong += len(pick)
        pred_fp += len(pick) * cfg.mu / (2 * (st.rank + 1) * cfg.p ** cfg.k_fft)
    z = np.array(z)
    se = z.std(ddof=1) / math.sqrt(len(z))
    return {
        "trials": trials,
        "wrong_mean": float(z.mean()),
        "wrong_mean_se": float(se),
        "wrong_var": float(z.var(ddof=1)),
        "fp": fp, "wrong": wrong, "fp_rate": fp / wrong, "fp_ci": wilson_interval(fp, wrong),
        "fp_predicted": pred_fp / wrong,
        "fn": int(fn), "fn_rate": fn / trials, "fn_ci": wilson_interval(int(fn), trials),
        "fn_predicted": cfg.mu / 2,
    }


# ---------------------------------------------------------------- FFT threshold problem

@dataclass
class ThresholdInstance:
    q: int
    n: int
    u: np.ndarray
    w: np.ndarray
    delta_minus: float
    delta_plus: float

    def __post_init__(self):
        if not self.delta_plus > self.delta_minus > 0:
            raise DomainError("need delta_plus > delta_minus > 0")

    @property
    def size(self):
        return self.q ** self.n

    @property
    def Z(self):
        acc = {}
        for u, w in zip(map(tuple, self.u), self.w):
            acc[u] = acc.get(u, 0) + w
        return float(sum(abs(v) ** 2 for v in acc.values()))


@dataclass
class ThresholdResult:
    decision: bool
    witness: tuple | None
    promise_violated: bool


def random_threshold_instance(q, n, k, seed, delta_minus=None, delta_plus=None):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, q, size=(k, n))
    w = np.exp(2j * np.pi * rng.random(k))
    if delta_plus is None:
        delta_plus = 2.5 * math.sqrt(max(k, 1))
    if delta_minus is None:
        delta_minus = 0.9 * delta_plus
    return ThresholdInstance(q, n, u, w, delta_minus, delta_plus)


def threshold_table(inst):
    T = np.zeros((inst.q,) * inst.n, dtype=complex)
    for u, w in zip(inst.u, inst.w):
        T[tuple(u)] += w
    return T


def f_L_brute(inst):
    """Direct evaluation of f_L(x) = sum_j w_j exp(2 pi i <u_j, x> / q) at every x."""
    xs = np.array(list(np.ndindex(*(inst.q,) * inst.n)))
    if len(inst.u) == 0:
        return np.zeros((inst.q,) * inst.n, dtype=complex)
    vals = np.exp(2j * np.pi * (xs @ inst.u.T) / inst.q) @ inst.w
    return vals.reshape((inst.q,) * inst.n)


def _decide(vals, inst):
    re = vals.real
    hit = np.argwhere(re > inst.delta_plus)
    violated = bool(np.any((re > inst.delta_minus) & (re <= inst.delta_plus)))
    witness = tuple(int(v) for v in hit[0]) if len(hit) else None
    return ThresholdResult(bool(len(hit)), witness, violated)


def fft_threshold_classical(inst):
    """Fill T(u) = sum_{j: u_j = u} w_j, transform over Z_q^n, scan for Re > delta_plus."""
    if inst.size > 2 ** 22:
        raise UnsupportedSizeError("q^n above 2^22")
    return _decide(dftn(threshold_table(inst), sign=+1), inst)


def fft_threshold_brute(inst):
    return _decide(f_L_brute(inst), inst)


def fft_threshold_costs(k, G, delta_plus, delta_minus, nu=0.1, Z=None, A=2.0):
    """
    log2 costs (unit constants) of the three regimes and the number of QFT
    measurements N = (ln A - ln nu) / (2 eps^2), eps = (eta+ - eta-)/2,
    eta+- = delta+-^2 / (Z |G|).
    """
    if min(k, G, delta_plus, delta_minus) <= 0:
        raise DomainError("all inputs must be positive")
    if delta_plus <= delta_minus:
        raise DomainError("need delta_plus > delta_minus")
    Z = k if Z is None else Z
    eta_p, eta_m = delta_plus ** 2 / (Z * G), delta_minus ** 2 / (Z * G)
    eps = (eta_p - eta_m) / 2
    lg = math.log2(G)
    return {
        "log2_classical": math.log2(G * lg + k) if G > 1 else math.log2(k + 1),
        "log2_quantum_no_qracm": math.log2(k) + lg / 2,
        "log2_quantum_qracm": math.log2(k) + lg / 2 - math.log2(delta_plus - delta_minus),
        "qft_samples": (math.log(A) - math.log(nu)) / (2 * eps * eps),
        "eps": eps,
        "crossover_k": math.sqrt(G) * max(lg, 1.0),
    }
