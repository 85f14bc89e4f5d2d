"""Command-line interface.

Subcommands: ``features`` (extract + cache), ``retrieve`` (nearest-texture
montage), ``correlate`` (texture-vs-CPS ranking), ``batchsim`` (class
similarity matrix), ``synth`` (generate a synthetic dataset).

Run settings come from an optional JSON config file (keys matching the
long option names below) with every value overridable by a command-line
flag. Relative paths inside a config file are resolved against the file's
own directory.

Exit codes: 0 success, 2 usage, 3 validation/format/configuration,
4 I/O, 5 degenerate input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, correlate, pipeline, synth
from .errors import (
    ConfigError,
    CorruptionError,
    DegenerateInputError,
    FormatError,
    SchemaError,
    UsageError,
    ValidationError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_DEGENERATE = 5

_CONFIG_KEYS = (
    "manifest",
    "activations",
    "output",
    "stage",
    "k",
    "weights",
    "sign",
    "seed",
)
_PATH_KEYS = ("manifest", "activations", "output")


def _load_config_file(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(doc) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(
            f"{path}: unknown config keys {unknown}; expected {sorted(_CONFIG_KEYS)}"
        )
    for key in _PATH_KEYS:
        if key in doc:
            doc[key] = (path.parent / Path(doc[key])).resolve()
    return doc


def _parse_weights(value) -> tuple:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            raise UsageError(
                f"--weights must be comma-separated numbers, got {value!r}"
            ) from None
    return tuple(float(v) for v in value)


def build_config(args) -> pipeline.RunConfig:
    """Merge defaults, config file, and command-line flags into a RunConfig."""
    settings = {}
    if args.config is not None:
        settings.update(_load_config_file(Path(args.config)))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    for key in _PATH_KEYS:
        if key not in settings:
            raise UsageError(f"missing required setting --{key}")
    if "weights" in settings:
        settings["weights"] = _parse_weights(settings["weights"])
    config = pipeline.RunConfig(
        manifest=Path(settings["manifest"]),
        activations=Path(settings["activations"]),
        output=Path(settings["output"]),
        stage=int(settings.get("stage", pipeline.DEFAULT_STAGE)),
        k=int(settings.get("k", pipeline.DEFAULT_K)),
        weights=tuple(settings.get("weights", pipeline.DEFAULT_WEIGHTS)),
        sign_convention=str(settings.get("sign", "similarity")),
        seed=int(settings.get("seed", 0)),
    )
    return pipeline.validate_config(config)


def _add_run_arguments(parser) -> None:
    parser.add_argument("--config", type=Path, help="JSON file with run settings")
    parser.add_argument("--manifest", type=Path, help="dataset manifest path")
    parser.add_argument("--activations", type=Path, help="activation .txa root")
    parser.add_argument("--output", type=Path, help="run output directory")
    parser.add_argument("--stage", type=int, help="feature stage 1-5 (default 5)")
    parser.add_argument("--k", type=int, help="neighbor count (default 9)")
    parser.add_argument(
        "--weights", help="5 comma-separated map combination weights (sum 1)"
    )
    parser.add_argument(
        "--sign",
        choices=list(correlate.SIGN_CONVENTIONS),
        help="correlation sign convention (default similarity)",
    )
    parser.add_argument("--seed", type=int, help="run seed recorded in outputs")


def _cmd_features(args) -> int:
    config = build_config(args)
    index = pipeline.compute_features(config)
    print(
        f"cached {len(index['samples'])} feature vectors "
        f"(stage {config.stage}) under {config.output}"
    )
    return EXIT_OK


def _cmd_retrieve(args) -> int:
    config = build_config(args)
    montage = pipeline.run_retrieve(config, args.query)
    print(
        f"query {args.query} ({montage['query']['mode']} mode), "
        f"top {len(montage['neighbors'])} texture neighbors:"
    )
    for n in montage["neighbors"]:
        print(
            f"  {n['rank']:>2}. {n['sample_id']}  class={n['class_id']}  "
            f"distance={n['distance']:.4f}"
        )
    return EXIT_OK


def _cmd_correlate(args) -> int:
    config = build_config(args)
    report = pipeline.run_correlate(config)
    sys.stdout.write(correlate.format_ranking_table(report))
    print(f"full report under {config.output}")
    return EXIT_OK


def _cmd_batchsim(args) -> int:
    config = build_config(args)
    matrix = pipeline.run_batchsim(config)
    print(
        f"wrote {len(matrix.class_ids)}x{len(matrix.class_ids)} class "
        f"similarity matrix under {config.output}"
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.classes < 2:
        raise UsageError("--classes must be >= 2")
    spec = synth.planted_material_spec(
        class_count=args.classes,
        samples_per_class=args.samples,
        seed=args.seed,
        image_size=(args.size, args.size),
        noise_amplitude=args.noise,
    )
    dataset = synth.synth_dataset(spec, texture_samples_per_class=args.texture_samples)
    synth.write_dataset(dataset, args.out, write_images=not args.no_images)
    print(
        f"wrote {dataset.manifest.sample_count()} samples "
        f"({len(dataset.manifest.sem_classes)} material classes, "
        f"{len(dataset.manifest.texture_classes)} texture classes) to {args.out}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texlens",
        description=(
            "Explain CNN predictions by mapping salient deep features onto "
            "an interpretable texture vocabulary."
        ),
    )
    parser.add_argument("--version", action="version", version=f"texlens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="extract and cache per-sample features")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("retrieve", help="nearest textures to a sample or class")
    _add_run_arguments(p)
    p.add_argument("query", help="sample id or SEM class id")
    p.set_defaults(func=_cmd_retrieve)

    p = sub.add_parser("correlate", help="texture-vs-CPS correlation ranking")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("batchsim", help="class-to-class similarity matrix")
    _add_run_arguments(p)
    p.set_defaults(func=_cmd_batchsim)

    p = sub.add_parser("synth", help="generate a synthetic planted dataset")
    p.add_argument("--out", type=Path, required=True, help="dataset directory")
    p.add_argument("--classes", type=int, default=8, help="material class count")
    p.add_argument("--samples", type=int, default=40, help="samples per material class")
    p.add_argument(
        "--texture-samples", type=int, default=20, help="samples per texture class"
    )
    p.add_argument("--size", type=int, default=64, help="square image extent (>= 32)")
    p.add_argument("--noise", type=float, default=0.05, help="CPS noise amplitude")
    p.add_argument("--seed", type=int, default=0, help="generation seed")
    p.add_argument(
        "--no-images", action="store_true", help="skip writing graymap images"
    )
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"texlens: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        ConfigError,
        CorruptionError,
        FormatError,
        SchemaError,
        ValidationError,
    ) as exc:
        print(f"texlens: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateInputError as exc:
        print(f"texlens: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"texlens: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
