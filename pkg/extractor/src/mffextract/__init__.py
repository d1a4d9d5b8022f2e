"""Video clips -> multi-feature frame container directories."""

from .errors import DecodeError, ExtractError, InvalidConfig, ModelLoadError
from .extract import (
    DEFAULT_MODELS,
    ExtractionConfig,
    extract,
    extract_clip,
    load_models,
)
from .io import load_clip

__version__ = "0.1.0"

__all__ = [
    "DecodeError", "ExtractError", "InvalidConfig", "ModelLoadError",
    "DEFAULT_MODELS", "ExtractionConfig", "extract", "extract_clip",
    "load_models", "load_clip",
]
