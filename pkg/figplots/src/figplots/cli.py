"""Command-line entry point: figplots plot <preset> --in <dir> --out <file.png>."""

import argparse
import sys

from . import __version__
from .render import FigureSpec, InputError, PRESETS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplots",
        description="Render figure analogs from fermibounce experiment outputs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot")
    p.add_argument("preset", choices=PRESETS)
    p.add_argument("--in", dest="input_dir", required=True,
                   help="directory holding the experiment CSV/JSON outputs")
    p.add_argument("--out", dest="output", required=True,
                   help="output image path (.png)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = render(FigureSpec(preset_name=args.preset,
                                 input_dir=args.input_dir,
                                 output=args.output))
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
