"""Model runners the adapter can serve.

Every runner exposes: class_names, detect(pixels) -> list of detection
dicts, and capture(pixels, layer, target_index) -> (features, gradients,
stride, center). The dummy runner is fully deterministic and dependency-light
so the protocol can be exercised anywhere; the torchvision runner wraps a
real two-stage detector when torch is installed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


@dataclass
class AdapterConfig:
    model: str = "dummy"
    classes: tuple[str, ...] = ()
    device: str = "cpu"
    layer: str = "backbone"
    weights: str | None = None
    max_batch: int = 8


class UnknownLayerError(Exception):
    pass


class DummyModel:
    """Deterministic saturated-color blob detector with analytic captures.

    Feature maps are stride-8 average pools of the three color channels plus
    a brightness channel. The gradient of a detection's class score is taken
    as the target-box indicator on its own color channel: feature cells that
    show the object influence the score, everything else (including the
    channels the score never reads) gets exactly zero.
    """

    STRIDE = 8
    MIN_PIXELS = 25

    def __init__(self, config: AdapterConfig):
        self.class_names = tuple(config.classes) or ("red", "green", "blue")
        self.layer = config.layer or "backbone"

    def detect(self, pixels: np.ndarray) -> list[dict]:
        detections = []
        for channel in range(min(3, len(self.class_names))):
            others = [c for c in range(3) if c != channel]
            hot = (
                (pixels[:, :, channel] > 0.8)
                & (pixels[:, :, others[0]] < 0.2)
                & (pixels[:, :, others[1]] < 0.2)
            )
            if not hot.any():
                continue
            labeled, count = ndimage.label(hot)
            sizes = np.bincount(labeled.ravel(), minlength=count + 1)
            for comp_id, bounds in enumerate(ndimage.find_objects(labeled), start=1):
                if bounds is None or sizes[comp_id] < self.MIN_PIXELS:
                    continue
                rows, cols = bounds
                area = (rows.stop - rows.start) * (cols.stop - cols.start)
                prob = min(1.0, float(sizes[comp_id]) / area)
                probs = [(1.0 - prob) / max(1, len(self.class_names) - 1)] * len(self.class_names)
                probs[channel] = prob
                detections.append(
                    {
                        "bbox": [float(cols.start), float(rows.start), float(cols.stop), float(rows.stop)],
                        "objectness": min(1.0, float(sizes[comp_id]) / 500.0),
                        "class_probs": probs,
                    }
                )
        return detections

    def _features(self, pixels: np.ndarray) -> np.ndarray:
        h, w = pixels.shape[:2]
        fh, fw = max(1, h // self.STRIDE), max(1, w // self.STRIDE)
        maps = []
        for channel in range(3):
            plane = pixels[: fh * self.STRIDE, : fw * self.STRIDE, channel]
            maps.append(plane.reshape(fh, self.STRIDE, fw, self.STRIDE).mean(axis=(1, 3)))
        maps.append(np.mean(maps, axis=0))
        return np.stack(maps).astype(np.float32)

    def capture(self, pixels: np.ndarray, layer: str, target_index: int):
        if layer not in ("", self.layer):
            raise UnknownLayerError(f"model has no layer {layer!r}; only {self.layer!r}")
        detections = self.detect(pixels)
        if not 0 <= target_index < len(detections):
            raise IndexError(f"target_index {target_index} out of range ({len(detections)} detections)")
        target = detections[target_index]
        features = self._features(pixels)
        x1, y1, x2, y2 = target["bbox"]
        channel = int(np.argmax(target["class_probs"]))
        gradients = np.zeros_like(features)
        fy = slice(int(y1 // self.STRIDE), max(int(y1 // self.STRIDE) + 1, int(np.ceil(y2 / self.STRIDE))))
        fx = slice(int(x1 // self.STRIDE), max(int(x1 // self.STRIDE) + 1, int(np.ceil(x2 / self.STRIDE))))
        gradients[channel, fy, fx] = 1.0 / max(1.0, (fy.stop - fy.start) * (fx.stop - fx.start))
        center = ((x1 + x2) / 2.0, (y1 + y2) / 2.0)
        return features, gradients, float(self.STRIDE), center


class TorchvisionFasterRCNN:
    """Two-stage torchvision detector behind the same runner surface.

    Built lazily so the adapter starts without torch unless requested.
    Capture hooks record the requested module's activations and the gradient
    of the target's class score with respect to them; stride is inferred
    from the input/feature geometry.
    """

    def __init__(self, config: AdapterConfig):
        import torch
        import torchvision

        self._torch = torch
        num_classes = len(config.classes) + 1 if config.classes else 91
        self.model = torchvision.models.detection.fasterrcnn_mobilenet_v3_large_320_fpn(
            weights=None, num_classes=num_classes, weights_backbone=None
        )
        if config.weights:
            self.model.load_state_dict(torch.load(config.weights, map_location=config.device))
        self.model.eval().to(config.device)
        self.device = config.device
        self.class_names = tuple(config.classes) or tuple(f"class{i}" for i in range(1, num_classes))
        self.layer = config.layer or "backbone"

    def _modules(self) -> dict:
        return dict(self.model.named_modules())

    def _forward(self, pixels: np.ndarray):
        torch = self._torch
        tensor = torch.from_numpy(np.transpose(pixels, (2, 0, 1))).float().to(self.device)
        return self.model([tensor])[0]

    def detect(self, pixels: np.ndarray) -> list[dict]:
        torch = self._torch
        with torch.no_grad():
            output = self._forward(pixels)
        detections = []
        n_classes = len(self.class_names)
        for box, label, score in zip(output["boxes"], output["labels"], output["scores"]):
            x1, y1, x2, y2 = (float(v) for v in box)
            if x2 <= x1 or y2 <= y1:
                continue
            index = int(label) - 1  # torchvision reserves 0 for background
            if not 0 <= index < n_classes:
                continue
            confidence = float(score)
            probs = [(1.0 - confidence) / max(1, n_classes - 1)] * n_classes
            probs[index] = confidence
            detections.append(
                {"bbox": [x1, y1, x2, y2], "objectness": confidence, "class_probs": probs}
            )
        return detections

    def capture(self, pixels: np.ndarray, layer: str, target_index: int):
        torch = self._torch
        layer = layer or self.layer
        modules = self._modules()
        if layer not in modules:
            raise UnknownLayerError(f"model has no layer {layer!r}")
        holder: dict = {}

        def hook(_module, _inputs, output):
            out = output
            if isinstance(out, dict):  # FPN returns an OrderedDict of levels
                out = next(iter(out.values()))
            holder["features"] = out
            out.retain_grad()

        handle = modules[layer].register_forward_hook(hook)
        try:
            tensor = torch.from_numpy(np.transpose(pixels, (2, 0, 1))).float().to(self.device)
            output = self.model([tensor])[0]
            scores = output["scores"]
            if not 0 <= target_index < scores.shape[0]:
                raise IndexError(f"target_index {target_index} out of range ({scores.shape[0]} detections)")
            features = holder["features"]
            score = scores[target_index]
            self.model.zero_grad(set_to_none=True)
            score.backward()
            grad = features.grad
            feats = features.detach()[0].cpu().numpy().astype(np.float32)
            grads = (
                np.zeros_like(feats)
                if grad is None
                else grad.detach()[0].cpu().numpy().astype(np.float32)
            )
        finally:
            handle.remove()
        stride = pixels.shape[0] / feats.shape[1]
        box = output["boxes"][target_index].detach().cpu().numpy()
        center = (float((box[0] + box[2]) / 2.0), float((box[1] + box[3]) / 2.0))
        return feats, grads, float(stride), center


def build_model(config: AdapterConfig):
    if config.model == "dummy":
        return DummyModel(config)
    if config.model == "torchvision-frcnn":
        return TorchvisionFasterRCNN(config)
    raise ValueError(f"unknown model {config.model!r} (expected dummy or torchvision-frcnn)")
