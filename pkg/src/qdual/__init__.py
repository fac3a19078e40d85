"""Dual-attack cost estimation, guessing complexity, and small-scale simulation."""
from .gaussian import DomainError, UnsupportedSizeError
from .costmodels import ConfigError, CostModel, load_models, get_model
from .dualattack import (AttackParameters, CostEstimate, EstimatorConfig, InfeasibleError, LweParameters,
                         optimize)
from .presets import load_presets, get_preset

__version__ = "0.1.0"
