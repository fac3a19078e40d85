"""Named LWE parameter sets."""
import json
import os
from importlib import resources
from pathlib import Path

from .costmodels import ConfigError
from .dualattack import LweParameters

ENV_DIR = "QDUAL_PRESET_DIR"


def presets_path():
    d = os.environ.get(ENV_DIR)
    if d:
        return Path(d) / "presets.json"
    return resources.files("qdual") / "data" / "presets.json"


def load_presets(path=None):
    src = Path(path) if path is not None else presets_path()
    try:
        raw = json.loads(src.read_text())
    except FileNotFoundError:
        raise ConfigError(f"preset file {src} not found") from None
    out = {}
    for name, rec in raw["schemes"].items():
        try:
            out[name] = LweParameters(n=rec["n"], m=rec["m"], q=rec["q"],
                                      sigma_s=rec["sigma_s"], sigma_e=rec["sigma_e"])
        except KeyError as exc:
            raise ConfigError(f"preset {name} misses field {exc}") from None
    return out


def get_preset(name, presets=None):
    presets = presets if presets is not None else load_presets()
    if name not in presets:
        raise ConfigError(f"unknown scheme {name!r}; known: {', '.join(presets)}")
    return presets[name]


TABLE2_SCHEMES = ("Kyber512", "Kyber768", "Kyber1024", "LightSaber", "Saber", "FireSaber", "TFHE630", "TFHE1024")
