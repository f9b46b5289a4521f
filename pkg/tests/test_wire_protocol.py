import sys
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from odexai.detectors import SubprocessBackend, detect
from odexai.detectors import wire
from odexai.errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    ProtocolViolationError,
)
from conftest import blob_image

SCRIPT = Path(__file__).parent / "fake_backends" / "scripted.py"


def scripted_cmd(mode: str, *extra: str) -> list[str]:
    return [sys.executable, str(SCRIPT), "--mode", mode, *extra]


# ---------------------------------------------------------------------------
# frame round trips

wire_detections = st.builds(
    lambda x, y, w, h, obj, probs: {
        "bbox": [x, y, x + w, y + h],
        "objectness": obj,
        "class_probs": probs,
    },
    st.floats(0, 50),
    st.floats(0, 50),
    st.floats(0.5, 50),
    st.floats(0.5, 50),
    st.floats(0, 1),
    st.lists(st.floats(0, 1), min_size=1, max_size=5),
)


@given(st.lists(wire_detections, max_size=4), st.integers(0, 2**32), st.floats(0, 1e4))
def test_detect_response_round_trip(detection_frames, request_id, timing_ms):
    frame = {"id": request_id, "detections": detection_frames, "timing_ms": timing_ms}
    echoed_id, detections, echoed_timing = wire.parse_detect_response(frame)
    rebuilt = wire.detect_response(echoed_id, detections, echoed_timing)
    assert rebuilt == frame


@given(st.integers(0, 2**32), st.text(max_size=20))
def test_frame_codec_round_trip(request_id, text):
    frame = wire.detect_request(request_id, text)
    assert wire.decode_frame(wire.encode_frame(frame)) == frame


def test_handshake_round_trip():
    from odexai.detectors import SyntheticBackend

    descriptor = SyntheticBackend().descriptor()
    assert wire.parse_handshake(wire.handshake_frame(descriptor)) == descriptor


@pytest.mark.parametrize(
    "frame",
    [
        {"odexai_proto": 2, "name": "x", "classes": ["a"], "max_batch": 1, "supports_whitebox": False},
        {"odexai_proto": 1, "name": "x", "classes": [], "max_batch": 1, "supports_whitebox": False},
        {"odexai_proto": 1, "name": "x", "classes": ["a"], "max_batch": 0, "supports_whitebox": False},
        {"odexai_proto": 1, "name": "x", "classes": ["a"], "max_batch": 1},
        {"odexai_proto": 1, "name": 7, "classes": ["a"], "max_batch": 1, "supports_whitebox": False},
    ],
)
def test_bad_handshakes_rejected(frame):
    with pytest.raises(ProtocolViolationError):
        wire.parse_handshake(frame)


def test_malformed_json_rejected():
    with pytest.raises(ProtocolViolationError):
        wire.decode_frame("not a frame")
    with pytest.raises(ProtocolViolationError):
        wire.decode_frame('["array", "not", "object"]')


# ---------------------------------------------------------------------------
# subprocess client against the scripted backend


class TestSubprocessBackend:
    def test_handshake_and_detect(self):
        backend = SubprocessBackend(scripted_cmd("ok"))
        try:
            descriptor = backend.descriptor()
            assert descriptor.name == "scripted"
            assert descriptor.class_names == ("red", "green", "blue")
            assert descriptor.max_batch == 4
            results = detect(backend, [blob_image(width=32, height=32, box=(2, 3, 12, 13))] * 6)
            assert len(results) == 6
            for detections in results:
                assert len(detections) == 1
                assert detections[0].bbox.as_tuple() == (2.0, 3.0, 12.0, 13.0)
                assert detections[0].objectness == 0.9
        finally:
            backend.close()

    def test_capture_round_trip(self, tmp_path):
        backend = SubprocessBackend(scripted_cmd("ok", "--capture-dir", str(tmp_path)))
        try:
            capture = backend.capture(blob_image(width=32, height=32), "backbone", 0)
            assert capture.feature_maps.shape == (2, 4, 4)
            assert capture.stride == 8.0
            assert capture.target_center == (16.0, 16.0)
            assert capture.layer_id == "backbone"
        finally:
            backend.close()

    def test_malformed_frame_raises_protocol_violation(self):
        backend = SubprocessBackend(scripted_cmd("malformed"))
        try:
            with pytest.raises(ProtocolViolationError):
                backend.detect_batch([blob_image(width=16, height=16)])
        finally:
            backend.close()

    def test_error_frame_raises_protocol_violation(self):
        backend = SubprocessBackend(scripted_cmd("error-frame"))
        try:
            with pytest.raises(ProtocolViolationError):
                backend.detect_batch([blob_image(width=16, height=16)])
        finally:
            backend.close()

    def test_hang_raises_timeout(self):
        backend = SubprocessBackend(scripted_cmd("hang"), timeout_s=1.0)
        try:
            with pytest.raises(BackendTimeoutError):
                backend.detect_batch([blob_image(width=16, height=16)])
        finally:
            backend.close()

    def test_dead_process_raises_unavailable(self):
        with pytest.raises(BackendUnavailableError):
            SubprocessBackend(scripted_cmd("die"))

    def test_bad_handshake_raises_protocol_violation(self):
        with pytest.raises(ProtocolViolationError):
            SubprocessBackend(scripted_cmd("bad-handshake"))

    def test_missing_binary_raises_unavailable(self):
        with pytest.raises(BackendUnavailableError):
            SubprocessBackend(["/nonexistent/denture-backend"])

    def test_use_after_close_raises_unavailable(self):
        backend = SubprocessBackend(scripted_cmd("ok"))
        backend.close()
        with pytest.raises(BackendUnavailableError):
            backend.detect_batch([blob_image(width=16, height=16)])
