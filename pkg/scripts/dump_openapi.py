#!/usr/bin/env python3
"""Regenerate docs/openapi.json from the live app definition."""

import json
import tempfile
from pathlib import Path

from odexai.service import create_app


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        schema = create_app(tmp).openapi()
    out = Path(__file__).resolve().parents[1] / "docs" / "openapi.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
