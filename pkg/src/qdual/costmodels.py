"""
Lattice reduction cost models.

Two kinds of model are supported:

core_svp
    One sieve call in dimension beta costs 2^(a*beta + b) and BKZ is charged as
    that same single call (tour factor 1, no polynomial term).

list_decoding
    Affine fits of list-decoding sieves.  BKZ-beta0 runs tour_factor*(d - beta0)
    sieve calls in dimension beta0 - d4f(beta0) (dimensions for free), and the
    final sieve dimension beta1 is chosen so that its cost balances the BKZ
    cost, the way the reference estimator does it.

All costs are log2.  Coefficients live in data/cost_models.json.
"""
import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .gaussian import DomainError

LOG2_SQRT_4_3 = math.log2(math.sqrt(4 / 3))
BETA_FLOOR = 50
MODEL_NAMES = ("CC", "CN", "C0", "QN", "Q0", "TW_QN", "TW_Q0")
KINDS = ("core_svp", "list_decoding")


class ConfigError(ValueError):
    """Unknown model or malformed model file."""


@dataclass(frozen=True)
class CostModel:
    name: str
    sieve_exponent: float
    sieve_affine: float
    bkz_tour_factor: float
    o_term: float
    source: str
    kind: str = "core_svp"

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ConfigError(f"unknown cost model {self.name!r}")
        if not self.sieve_exponent > 0:
            raise ConfigError("sieve_exponent must be positive")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")

    @property
    def quantum_search(self):
        """True for the models costing the quantum variant of the attack."""
        return self.name.startswith("TW_")


@dataclass(frozen=True)
class ReductionCost:
    log2_bkz: float
    log2_sieve: float
    log2_nsieve: float
    expected_length: float
    beta0: int
    beta1: int
    clamped: bool = False


def _record(m):
    d = asdict(m)
    d["tour_factor"] = d.pop("bkz_tour_factor")
    return d


def default_models_path():
    return resources.files("qdual") / "data" / "cost_models.json"


def load_models(path=None):
    """Load {name: CostModel} from a coefficient file."""
    src = Path(path) if path is not None else default_models_path()
    with src.open() as fh:
        raw = json.load(fh)
    models = {}
    for rec in raw["models"]:
        try:
            m = CostModel(
                name=rec["name"],
                sieve_exponent=rec["sieve_exponent"],
                sieve_affine=rec["sieve_affine"],
                bkz_tour_factor=rec["tour_factor"],
                o_term=rec["o_term"],
                source=rec["source"],
                kind=rec.get("kind", "core_svp"),
            )
        except KeyError as exc:
            raise ConfigError(f"model record misses field {exc}") from None
        models[m.name] = m
    return models


def save_models(models, path, comment=None):
    recs = [_record(m) for m in (models.values() if isinstance(models, dict) else models)]
    doc = {"comment": comment or "log2 cost = sieve_exponent * beta + sieve_affine", "models": recs}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def get_model(name, models=None):
    models = models if models is not None else load_models()
    try:
        return models[name]
    except KeyError:
        raise ConfigError(f"unknown cost model {name!r}; known: {', '.join(sorted(models))}") from None


def sieve_cost(beta, model):
    """log2 cost of one sieve in dimension beta; beta below the fit floor is clamped (see reduction_cost)."""
    return _sieve(beta, model)[0]


def _sieve(beta, model):
    clamped = beta < BETA_FLOOR
    if clamped:
        beta = BETA_FLOOR
    return model.sieve_exponent * beta + model.sieve_affine, clamped


def d4f(beta):
    """Dimensions for free: beta * ln(4/3) / ln(beta / (2 pi e))."""
    return beta * math.log(4 / 3) / math.log(beta / (2 * math.pi * math.e))


def _lse2(a, b):
    m = max(a, b)
    return m + math.log2(2.0 ** (a - m) + 2.0 ** (b - m))


def bkz_cost(d, beta0, model):
    """log2 cost of BKZ-beta0 on a d-dimensional lattice."""
    if beta0 > d:
        raise DomainError(f"block size {beta0} exceeds dimension {d}")
    if beta0 < 2:
        raise DomainError("block size must be >= 2")
    if model.kind == "core_svp":
        return sieve_cost(beta0, model)
    eff = beta0 - math.floor(d4f(beta0)) if beta0 >= 50 else beta0
    tours = model.bkz_tour_factor * max(d - beta0, 1)
    return _lse2(3 * math.log2(d), sieve_cost(eff, model) + math.log2(tours))


def final_sieve_dim(d, beta0, model):
    """Sieve dimension used for the last (short vector producing) call."""
    if model.kind == "core_svp" or beta0 >= d:
        return beta0
    eff = beta0 - math.floor(d4f(beta0))
    extra = math.log2((d - beta0) * model.bkz_tour_factor) / model.sieve_exponent
    return min(d, math.floor(eff + extra))


def n_sieve(beta1, model=None):
    """log2 number of short vectors one sieve call returns."""
    if beta1 < 2:
        raise DomainError("beta1 must be >= 2")
    return beta1 * LOG2_SQRT_4_3 + (model.o_term if model is not None else 0.0)


def root_hermite(beta):
    return ((beta / (2 * math.pi * math.e)) * (math.pi * beta) ** (1 / beta)) ** (1 / (2 * (beta - 1)))


def gh_factor(k):
    """Gaussian-heuristic radius of a unit-volume k-dimensional lattice, sqrt(k / (2 pi e))."""
    return math.sqrt(k / (2 * math.pi * math.e))


def expected_short_length(d, beta0, beta1, volume_log2):
    """
    Expected length of the vectors produced by sieving in the last beta1
    coordinates of a BKZ-beta0 reduced basis following the geometric series
    assumption: sqrt(4/3) * GH(beta1) * delta(beta0)^(d - beta1) * vol^(1/d).
    """
    if beta1 > d:
        raise DomainError(f"beta1={beta1} exceeds d={d}")
    delta = root_hermite(beta0)
    if not delta >= 1:
        raise DomainError(f"degenerate GSA profile: delta({beta0}) = {delta} < 1")
    return math.sqrt(4 / 3) * gh_factor(beta1) * delta ** (d - beta1) * 2.0 ** (volume_log2 / d)


def reduction_cost(d, beta0, model, volume_log2):
    """Costs of one BKZ + final sieve run producing N_sieve short vectors."""
    beta1 = final_sieve_dim(d, beta0, model)
    sv, clamped = _sieve(beta1, model)
    return ReductionCost(
        log2_bkz=bkz_cost(d, beta0, model),
        log2_sieve=sv,
        log2_nsieve=n_sieve(beta1, model),
        expected_length=expected_short_length(d, beta0, beta0, volume_log2),
        beta0=beta0,
        beta1=beta1,
        clamped=clamped,
    )


def sampling_cost(rc, D_log2, model):
    """log2 cost of collecting 2^D_log2 short vectors: max(D / N_sieve, 1) runs."""
    runs = max(D_log2 - rc.log2_nsieve, 0.0)
    per_run = rc.log2_sieve if model.kind == "core_svp" else _lse2(rc.log2_bkz, rc.log2_sieve)
    return runs + per_run
