"""Dataset ingestion: COCO instance-annotation JSON and VOC per-image XML."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from ..core import BBox, GroundTruthInstance
from ..errors import MissingImageError, ParseError


@dataclass(frozen=True)
class ImageEntry:
    image_id: str
    path: Path
    width: int
    height: int


@dataclass(frozen=True)
class DatasetIndex:
    name: str
    images: tuple[ImageEntry, ...]
    annotations: Mapping[str, tuple[GroundTruthInstance, ...]]
    categories: Mapping[int, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "annotations", MappingProxyType(dict(self.annotations)))
        object.__setattr__(self, "categories", MappingProxyType(dict(self.categories)))
        known = {entry.image_id for entry in self.images}
        for image_id in self.annotations:
            if image_id not in known:
                raise ParseError(f"annotation references unknown image {image_id!r}")

    def image_by_id(self, image_id: str) -> ImageEntry:
        for entry in self.images:
            if entry.image_id == image_id:
                return entry
        raise KeyError(image_id)


def _clamped_bbox(x1: float, y1: float, x2: float, y2: float, width: int, height: int) -> BBox:
    """Clamp to image bounds so index invariants hold; reject degenerate boxes."""
    x1c, y1c = max(0.0, x1), max(0.0, y1)
    x2c, y2c = min(float(width), x2), min(float(height), y2)
    if not (x2c > x1c and y2c > y1c):
        raise ParseError(f"box ({x1}, {y1}, {x2}, {y2}) lies outside the {width}x{height} image")
    return BBox(x1c, y1c, x2c, y2c)


def load_coco(annotation_file, image_dir) -> DatasetIndex:
    """Index a COCO-format instance-annotation file; [x, y, w, h] boxes become corners."""
    annotation_file = Path(annotation_file)
    image_dir = Path(image_dir)
    try:
        data = json.loads(annotation_file.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{annotation_file}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{annotation_file}: top level must be a JSON object")

    try:
        categories = {int(c["id"]): str(c["name"]) for c in data.get("categories", [])}
        entries: dict[str, ImageEntry] = {}
        for image in data["images"]:
            image_id = str(image["id"])
            path = image_dir / image["file_name"]
            if not path.exists():
                raise MissingImageError(f"image file not found: {path}")
            entries[image_id] = ImageEntry(image_id, path, int(image["width"]), int(image["height"]))

        annotations: dict[str, list[GroundTruthInstance]] = {}
        for ann in data["annotations"]:
            image_id = str(ann["image_id"])
            if image_id not in entries:
                raise ParseError(f"annotation {ann.get('id')} references unknown image {image_id}")
            x, y, w, h = (float(v) for v in ann["bbox"])
            entry = entries[image_id]
            bbox = _clamped_bbox(x, y, x + w, y + h, entry.width, entry.height)
            label = int(ann["category_id"])
            if label not in categories:
                raise ParseError(f"annotation {ann.get('id')} has unknown category {label}")
            annotations.setdefault(image_id, []).append(
                GroundTruthInstance(bbox, label, str(ann["id"]))
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{annotation_file}: {exc!r}") from exc

    return DatasetIndex(
        name="coco",
        images=tuple(entries.values()),
        annotations={k: tuple(v) for k, v in annotations.items()},
        categories=categories,
    )


def load_voc(dataset_dir) -> DatasetIndex:
    """Index a VOC-layout directory: Annotations/*.xml plus JPEGImages/ files.

    Corner boxes pass through unchanged; the per-object "difficult" flag is
    preserved as instance metadata. Class indices are assigned by sorted
    class name, deterministically.
    """
    dataset_dir = Path(dataset_dir)
    ann_dir = dataset_dir / "Annotations"
    img_dir = dataset_dir / "JPEGImages"
    if not ann_dir.is_dir():
        raise ParseError(f"{dataset_dir}: no Annotations/ directory")

    parsed: list[tuple[str, Path, int, int, list[tuple[str, BBox, str]]]] = []
    class_names: set[str] = set()
    for xml_path in sorted(ann_dir.glob("*.xml")):
        try:
            root = ET.parse(xml_path).getroot()
            filename = root.findtext("filename")
            if filename is None:
                raise ParseError(f"{xml_path}: missing <filename>")
            width = int(root.findtext("size/width"))  # type: ignore[arg-type]
            height = int(root.findtext("size/height"))  # type: ignore[arg-type]
            objects: list[tuple[str, BBox, str]] = []
            for obj in root.findall("object"):
                name = obj.findtext("name")
                if name is None:
                    raise ParseError(f"{xml_path}: object missing <name>")
                box = obj.find("bndbox")
                xmin = float(box.findtext("xmin"))  # type: ignore[union-attr,arg-type]
                ymin = float(box.findtext("ymin"))  # type: ignore[union-attr,arg-type]
                xmax = float(box.findtext("xmax"))  # type: ignore[union-attr,arg-type]
                ymax = float(box.findtext("ymax"))  # type: ignore[union-attr,arg-type]
                difficult = obj.findtext("difficult", default="0").strip()
                objects.append((name, _clamped_bbox(xmin, ymin, xmax, ymax, width, height), difficult))
                class_names.add(name)
        except (ET.ParseError, TypeError, ValueError) as exc:
            raise ParseError(f"{xml_path}: {exc}") from exc
        image_path = img_dir / filename
        if not image_path.exists():
            raise MissingImageError(f"image file not found: {image_path}")
        parsed.append((xml_path.stem, image_path, width, height, objects))

    label_of = {name: idx for idx, name in enumerate(sorted(class_names))}
    images = []
    annotations: dict[str, tuple[GroundTruthInstance, ...]] = {}
    for image_id, path, width, height, objects in parsed:
        images.append(ImageEntry(image_id, path, width, height))
        annotations[image_id] = tuple(
            GroundTruthInstance(
                bbox, label_of[name], f"{image_id}:{i}", meta={"difficult": difficult}
            )
            for i, (name, bbox, difficult) in enumerate(objects)
        )
    return DatasetIndex(
        name="voc",
        images=tuple(images),
        annotations=annotations,
        categories={idx: name for name, idx in label_of.items()},
    )
