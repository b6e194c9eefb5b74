"""Deterministic floater-vision simulation and readability pipeline."""

from .config import (AdaptationParams, ChainParams, DriftParams, SimConfig)
from .errors import (ConfigError, FloatlabError, OcrEngineError,
                     ResourceError)

__version__ = "0.1.0"

__all__ = [
    "AdaptationParams", "ChainParams", "ConfigError", "DriftParams",
    "FloatlabError", "OcrEngineError", "ResourceError", "SimConfig",
    "__version__",
]
