import numpy as np
import pytest

from odexai.core import BBox, Detection, ImageBuffer
from odexai.detectors import SyntheticBackend


def blob_image(width=96, height=96, box=(20, 24, 60, 64), channel=0, fill=1.0):
    """Solid pure-color rectangle on black; bounds known by construction."""
    pixels = np.zeros((height, width, 3))
    x1, y1, x2, y2 = box
    pixels[y1:y2, x1:x2, channel] = fill
    return ImageBuffer(pixels)


def make_detection(box, objectness=1.0, probs=(1.0, 0.0, 0.0)):
    return Detection(BBox(*box), objectness, np.array(probs, dtype=np.float64))


@pytest.fixture(scope="session")
def synthetic_backend():
    return SyntheticBackend()


@pytest.fixture
def red_blob():
    return blob_image()
