"""``simulate --config path.json --out dir/``."""
from __future__ import annotations

import argparse
import sys
import traceback
import warnings
from pathlib import Path

from .config import load_config
from .errors import FloquetLindbladError
from .report import report_render
from .runner import run, write_outputs


MODULES = {
    "linalg": "matrix-core",
    "floquet": "floquet-decomposition",
    "wcl": "wcl-generator",
    "lifting": "howland-lifting",
    "model": "evolution-engine",
    "evolution": "evolution-engine",
}


def failing_module(exc: BaseException) -> str:
    """Component owning the innermost package frame of the traceback."""
    here = Path(__file__).resolve().parent
    name = "sim-cli"
    for frame in traceback.extract_tb(exc.__traceback__):
        path = Path(frame.filename).resolve()
        if path.parent == here and path.stem in MODULES:
            name = MODULES[path.stem]
    return name


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Periodic Lindblad dynamics: factorized, Howland and RK4 propagation with structural checks.",
    )
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output directory (defaults to output_dir in the config, else ./out)")
    p.add_argument("--check-only", action="store_true", help="write only report.json and report.txt")
    p.add_argument("--verbose", action="store_true", help="print the check table and numerical warnings")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except FloquetLindbladError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.output_dir or "out"
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            result = run(cfg)
    except FloquetLindbladError as exc:
        print(f"{failing_module(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    write_outputs(result, out, check_only=args.check_only)
    if args.verbose:
        print(report_render(result.report), end="")
    failures = result.report.failures()
    for c in failures:
        print(f"FAILED {c.module}/{c.name}: measured {c.measured}, tolerance {c.tolerance}", file=sys.stderr)
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
