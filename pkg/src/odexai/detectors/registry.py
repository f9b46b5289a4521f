"""Backend spec strings and the TOML backend registry.

Spec forms: "synthetic", "subprocess:<command line>", "http:<url>".
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from ..errors import OdexaiError
from .base import DetectorBackend
from .httpclient import HttpBackend
from .subproc import SubprocessBackend
from .synthetic import SyntheticBackend

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]


def backend_factory(spec: str) -> Callable[[], DetectorBackend]:
    spec = spec.strip()
    if spec == "synthetic":
        return SyntheticBackend
    if spec.startswith("subprocess:"):
        cmd = spec[len("subprocess:") :]
        return lambda: SubprocessBackend(cmd)
    if spec.startswith(("http://", "https://")):
        return lambda: HttpBackend(spec)
    if spec.startswith("http:"):
        url = spec[len("http:") :]
        return lambda: HttpBackend(url)
    raise OdexaiError(f"unknown backend spec {spec!r}")


def create_backend(spec: str) -> DetectorBackend:
    return backend_factory(spec)()


def load_registry(path) -> dict[str, str]:
    """Read a TOML file with a [backends] table of name -> spec strings."""
    with open(Path(path), "rb") as handle:
        data = tomllib.load(handle)
    table = data.get("backends", {})
    if not isinstance(table, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in table.items()
    ):
        raise OdexaiError(f"{path}: [backends] must map names to spec strings")
    return dict(table)
