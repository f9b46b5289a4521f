"""CLI: run the adapter as a protocol-speaking child process."""

import argparse

from .models import AdapterConfig
from .protocol import serve


def main() -> None:
    parser = argparse.ArgumentParser(prog="odexai-adapter")
    parser.add_argument("--model", default="dummy", choices=["dummy", "torchvision-frcnn"])
    parser.add_argument("--classes", default="", help="Comma-separated class names.")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--layer", default="backbone", help="Target layer for white-box captures.")
    parser.add_argument("--weights", default=None, help="Optional checkpoint path.")
    parser.add_argument("--max-batch", type=int, default=8)
    parser.add_argument("--capture-dir", default=None)
    args = parser.parse_args()

    config = AdapterConfig(
        model=args.model,
        classes=tuple(c.strip() for c in args.classes.split(",") if c.strip()),
        device=args.device,
        layer=args.layer,
        weights=args.weights,
        max_batch=args.max_batch,
    )
    serve(config, capture_dir=args.capture_dir)


if __name__ == "__main__":
    main()
