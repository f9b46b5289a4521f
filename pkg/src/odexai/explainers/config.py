"""Explainer configuration, targets, results, and artifact persistence.

Saliency artifacts persist as 16-bit grayscale PGM (values scaled by 65535)
plus a JSON sidecar carrying method, config digest, elapsed seconds, image
id, and the target box.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from ..core import BBox, Detection, SaliencyMap


class Method(str, Enum):
    DRISE = "drise"
    DCLOSE = "dclose"
    GCAME = "gcame"


class FusionMode(str, Enum):
    RUNNING_AVERAGE = "running_average"
    MEAN = "mean"


@dataclass(frozen=True)
class TargetSpec:
    """The detection being explained, plus the id of the image it came from."""

    detection: Detection
    image_id: str = ""


@dataclass(frozen=True)
class ExplainerConfig:
    method: Method
    n_masks: int = 2000
    rise_grid: int = 16
    rise_p: float = 0.5
    dclose_levels: tuple[int, ...] = (50, 150, 300, 600)
    gamma_iou: float = 0.5
    gcame_sigma_scale: float = 0.25
    dclose_fusion: FusionMode = FusionMode.RUNNING_AVERAGE
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "dclose_fusion", FusionMode(self.dclose_fusion))
        object.__setattr__(self, "dclose_levels", tuple(int(v) for v in self.dclose_levels))
        if self.n_masks < 1:
            raise ValueError("n_masks must be >= 1")
        if self.rise_grid < 2:
            raise ValueError("rise_grid must be >= 2")
        if not 0.0 < self.rise_p < 1.0:
            raise ValueError("rise_p must lie in (0, 1)")
        if not self.dclose_levels or any(
            b <= a for a, b in zip(self.dclose_levels, self.dclose_levels[1:])
        ):
            raise ValueError("dclose_levels must be non-empty and strictly increasing")
        if not 0.0 < self.gamma_iou <= 1.0:
            raise ValueError("gamma_iou must lie in (0, 1]")
        if not self.gcame_sigma_scale > 0:
            raise ValueError("gcame_sigma_scale must be > 0")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be a non-negative integer")

    def with_method(self, method: Method) -> "ExplainerConfig":
        return replace(self, method=Method(method))

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "n_masks": self.n_masks,
            "rise_grid": self.rise_grid,
            "rise_p": self.rise_p,
            "dclose_levels": list(self.dclose_levels),
            "gamma_iou": self.gamma_iou,
            "gcame_sigma_scale": self.gcame_sigma_scale,
            "dclose_fusion": self.dclose_fusion.value,
            "rng_seed": self.rng_seed,
        }


def config_digest(cfg: ExplainerConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ExplanationResult:
    saliency: SaliencyMap
    elapsed_s: float
    method: Method
    config_digest: str

    def __post_init__(self) -> None:
        if self.elapsed_s < 0:
            raise ValueError("elapsed_s must be >= 0")


# ---------------------------------------------------------------------------
# PGM persistence


def save_pgm16(values01: np.ndarray, path_or_file) -> None:
    arr = np.asarray(values01, dtype=np.float64)
    h, w = arr.shape
    samples = np.round(np.clip(arr, 0.0, 1.0) * 65535.0).astype(">u2")
    payload = f"P5\n{w} {h}\n65535\n".encode("ascii") + samples.tobytes()
    if hasattr(path_or_file, "write"):
        path_or_file.write(payload)
    else:
        Path(path_or_file).write_bytes(payload)


def load_pgm(path) -> np.ndarray:
    """Read a binary PGM file (maxval 255 or 65535) as floats in [0, 1]."""
    return parse_pgm_bytes(Path(path).read_bytes(), source=str(path))


def parse_pgm_bytes(data: bytes, source: str = "<bytes>") -> np.ndarray:
    path = source
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM file")
    # Header: magic, width, height, maxval; '#' comments allowed between tokens.
    tokens: list[int] = []
    pos = 2
    while len(tokens) < 3:
        match = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", data[pos:])
        if match is None:
            raise ValueError(f"{path}: malformed PGM header")
        tokens.append(int(match.group(1)))
        pos += match.end()
    width, height, maxval = tokens
    pos += 1  # single whitespace byte after maxval
    if maxval == 65535:
        samples = np.frombuffer(data, dtype=">u2", count=width * height, offset=pos)
    elif maxval == 255:
        samples = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    else:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    if samples.size != width * height:
        raise ValueError(f"{path}: truncated PGM payload")
    return samples.reshape(height, width).astype(np.float64) / maxval


def save_explanation(
    result: ExplanationResult,
    out_dir,
    image_id: str,
    target_bbox: BBox,
    stem: str = "saliency",
) -> tuple[Path, Path]:
    """Write <stem>.pgm and <stem>.json into out_dir; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pgm_path = out_dir / f"{stem}.pgm"
    sidecar_path = out_dir / f"{stem}.json"
    save_pgm16(result.saliency.values, pgm_path)
    sidecar = {
        "method": result.method.value,
        "config_digest": result.config_digest,
        "elapsed_s": result.elapsed_s,
        "image_id": image_id,
        "target_bbox": list(target_bbox.as_tuple()),
    }
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return pgm_path, sidecar_path


def load_saliency(path) -> SaliencyMap:
    return SaliencyMap(load_pgm(path))
