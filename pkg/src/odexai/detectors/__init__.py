"""Detector backends: synthetic oracle, subprocess protocol client, HTTP client,
and white-box capture loading."""

from .base import BackendPool, DetectorBackend, DetectorBackendDescriptor, detect, ensure_pool
from .httpclient import HttpBackend
from .registry import backend_factory, create_backend, load_registry
from .subproc import SubprocessBackend
from .synthetic import CLASS_NAMES, SyntheticBackend, synthetic_detect
from .whitebox import (
    WhiteBoxCapture,
    load_whitebox_capture,
    read_odt,
    write_odt,
    write_whitebox_capture,
)

__all__ = [
    "BackendPool",
    "CLASS_NAMES",
    "DetectorBackend",
    "DetectorBackendDescriptor",
    "HttpBackend",
    "SubprocessBackend",
    "SyntheticBackend",
    "WhiteBoxCapture",
    "backend_factory",
    "create_backend",
    "detect",
    "ensure_pool",
    "load_registry",
    "load_whitebox_capture",
    "read_odt",
    "synthetic_detect",
    "write_odt",
    "write_whitebox_capture",
]
