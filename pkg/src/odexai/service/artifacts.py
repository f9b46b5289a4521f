"""Content-addressed artifact store: bytes live under the sha256 of themselves."""

from __future__ import annotations

import hashlib
import os
import re
import tempfile
from pathlib import Path

from ..errors import ArtifactNotFoundError

_REF = re.compile(r"^[0-9a-f]{64}$")


class ArtifactStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, ref: str) -> Path:
        if not _REF.match(ref):
            raise ArtifactNotFoundError(f"malformed artifact ref {ref!r}")
        return self.root / ref[:2] / ref

    def put(self, data: bytes) -> str:
        """Store bytes, returning their ref; idempotent by content hash."""
        ref = hashlib.sha256(data).hexdigest()
        path = self._path(ref)
        if path.exists():
            return ref
        path.parent.mkdir(parents=True, exist_ok=True)
        # Write-to-temp-then-rename keeps readers from ever seeing partial bytes.
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return ref

    def get(self, ref: str) -> bytes:
        path = self._path(ref)
        if not path.exists():
            raise ArtifactNotFoundError(f"no artifact {ref}")
        return path.read_bytes()

    def has(self, ref: str) -> bool:
        try:
            return self._path(ref).exists()
        except ArtifactNotFoundError:
            return False
