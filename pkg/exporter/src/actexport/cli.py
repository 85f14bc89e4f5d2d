"""Command-line interface for activation export.

Synopsis::

    actexport export --model <name-or-checkpoint> --images <dir> \\
        --role {sem,texture} [--cps-table <file>] --out <dir> \\
        [--weights pretrained|none|<state-dict>] [--batch-size N] \\
        [--resize N] [--crop N]

Exit codes: 0 success, 2 usage error, 3 configuration/validation error,
4 filesystem error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib.metadata import version
from pathlib import Path

from .export import ExportConfigError, ExportJob, run_export
from .manifest import ManifestError
from .models import ModelConfigError
from .preprocess import PreprocessSpec
from .txa import TxaWriteError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actexport",
        description="Export CNN stage activations as .txa files with a dataset manifest.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {version('actexport')}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    export = sub.add_parser(
        "export", help="run one backbone over an image tree and export activations"
    )
    export.add_argument(
        "--model",
        required=True,
        help="built-in backbone name (resnet50, tiny) or path to a checkpoint",
    )
    export.add_argument(
        "--images",
        required=True,
        type=Path,
        help="directory with one subdirectory of images per class",
    )
    export.add_argument(
        "--role",
        required=True,
        choices=("sem", "texture"),
        help="manifest role for the exported classes",
    )
    export.add_argument(
        "--cps-table",
        type=Path,
        default=None,
        help="two-column CSV 'class_id,score'; required for role sem",
    )
    export.add_argument(
        "--out", required=True, type=Path, help="output dataset directory"
    )
    export.add_argument(
        "--weights",
        default="none",
        help="'pretrained', 'none' (default; deterministic fresh init), "
        "or a state-dict path for a named --model",
    )
    export.add_argument(
        "--batch-size", type=int, default=8, help="images per forward pass (default 8)"
    )
    export.add_argument(
        "--resize", type=int, default=384, help="square resize edge (default 384)"
    )
    export.add_argument(
        "--crop", type=int, default=352, help="center-crop edge (default 352)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        job = ExportJob(
            model=args.model,
            images=args.images,
            role=args.role,
            out=args.out,
            weights=args.weights,
            cps_table=args.cps_table,
            batch_size=args.batch_size,
            preprocess=PreprocessSpec(resize=args.resize, crop=args.crop),
        )
        report = run_export(job)
    except (
        ExportConfigError,
        ManifestError,
        ModelConfigError,
        TxaWriteError,
        ValueError,
    ) as exc:
        print(f"actexport: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"actexport: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    print(
        f"exported {report.sample_count} samples across "
        f"{len(report.classes)} {args.role} classes to {args.out}"
    )
    if report.skipped:
        print(f"skipped {len(report.skipped)} unreadable images", file=sys.stderr)
    print(f"manifest: {report.manifest_path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
