"""Reference detector adapter for the odexai wire protocol."""

from .models import AdapterConfig, DummyModel, UnknownLayerError, build_model
from .odt import capture_bundle, write_odt
from .protocol import serve

__all__ = [
    "AdapterConfig",
    "DummyModel",
    "UnknownLayerError",
    "build_model",
    "capture_bundle",
    "serve",
    "write_odt",
]
