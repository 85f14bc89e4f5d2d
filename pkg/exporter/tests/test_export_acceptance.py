"""Exporter acceptance gate.

Two criteria, continuing the engine's numbering (its gate covers 1-8):

  9.  Shape contract: a single 352x352 image run through the ResNet-50
      backbone yields five stage tensors of shapes 64x88x88, 256x88x88,
      512x44x44, 1024x22x22, 2048x11x11, all loadable by the analysis
      engine without validation errors, and repeating the export produces
      bit-identical files.

  10. Corpus-scale export: 47 texture class folders of 120 images each
      yield a 47-class manifest with 5,640 samples, and the exported
      dataset is consumable end-to-end by the engine's `features` and
      `correlate` commands.

Each test prints one `criterion N: PASS|FAIL` line, echoed in the summary.
"""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

import numpy as np
from PIL import Image
from texlens import exchange

from actexport.cli import main as actexport_main
from actexport.export import ExportJob, run_export

RESNET50_STAGE_SHAPES = [
    (64, 88, 88),
    (256, 88, 88),
    (512, 44, 44),
    (1024, 22, 22),
    (2048, 11, 11),
]

# The 47 describable-texture category names used for the corpus-scale run.
TEXTURE_CLASS_NAMES = [
    "banded", "blotchy", "braided", "bubbly", "bumpy", "chequered",
    "cobwebbed", "cracked", "crosshatched", "crystalline", "dotted",
    "fibrous", "flecked", "freckled", "frilly", "gauzy", "grid", "grooved",
    "honeycombed", "interlaced", "knitted", "lacelike", "lined", "marbled",
    "matted", "meshed", "paisley", "perforated", "pitted", "pleated",
    "polka-dotted", "porous", "potholed", "scaly", "smeared", "spiralled",
    "sprinkled", "stained", "stratified", "striped", "studded", "swirly",
    "veined", "waffled", "woven", "wrinkled", "zigzagged",
]


def verdict(log, num: int, ok: bool, detail: str) -> None:
    log(f"criterion {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def write_pgm(path: Path, array: np.ndarray) -> None:
    h, w = array.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + array.astype(np.uint8).tobytes())


def test_criterion_9_resnet50_shape_contract_and_determinism(
    tmp_path, acceptance_log
):
    images = tmp_path / "images"
    images.mkdir()
    (images / "probe").mkdir()
    rng = np.random.default_rng(42)
    Image.fromarray(
        rng.integers(0, 256, size=(352, 352), dtype=np.uint8), mode="L"
    ).save(images / "probe" / "sample.png")

    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        run_export(
            ExportJob(
                model="resnet50",
                weights="none",
                images=images,
                role="texture",
                out=out,
                batch_size=1,
            )
        )
        outputs.append(out)

    acts = exchange.load_activation_set(
        outputs[0] / "activations", "probe_sample", "probe"
    )
    shapes = [tuple(s.shape) for s in acts.stages]
    shape_ok = shapes == RESNET50_STAGE_SHAPES

    names = sorted(p.name for p in (outputs[0] / "activations").iterdir())
    identical = sorted(
        p.name for p in (outputs[1] / "activations").iterdir()
    ) == names and all(
        (outputs[0] / "activations" / n).read_bytes()
        == (outputs[1] / "activations" / n).read_bytes()
        for n in names
    )
    identical = identical and (
        (outputs[0] / "manifest.json").read_bytes()
        == (outputs[1] / "manifest.json").read_bytes()
    )

    verdict(
        acceptance_log,
        9,
        shape_ok and identical,
        f"stage shapes {shapes[0]}..{shapes[-1]} engine-loadable; "
        f"re-export bit-identical across {len(names)} tensors + manifest",
    )


def test_criterion_10_corpus_scale_export_feeds_the_engine(
    tmp_path_factory, acceptance_log
):
    base = tmp_path_factory.mktemp("corpus")
    texture_root = base / "textures"
    rng = np.random.default_rng(1234)
    for class_id in TEXTURE_CLASS_NAMES:
        class_dir = texture_root / class_id
        class_dir.mkdir(parents=True)
        block = rng.integers(0, 256, size=(120, 64, 64), dtype=np.uint8)
        for i in range(120):
            write_pgm(class_dir / f"{class_id}_{i:04d}.pgm", block[i])

    out = base / "data"
    code = actexport_main(
        [
            "export",
            "--model", "tiny",
            "--images", str(texture_root),
            "--role", "texture",
            "--out", str(out),
            "--resize", "64",
            "--crop", "56",
            "--batch-size", "64",
        ]
    )
    assert code == 0

    doc = json.loads((out / "manifest.json").read_text())
    texture_count = len(doc["texture_classes"])
    sample_count = sum(len(c["samples"]) for c in doc["texture_classes"])
    manifest_ok = texture_count == 47 and sample_count == 5640

    # Semantic-side companion export: `correlate` needs scored classes, so
    # add four of them (distinct noise amplitude, distinct scores).
    sem_root = base / "sem"
    for idx in range(4):
        class_dir = sem_root / f"m{idx:02d}"
        class_dir.mkdir(parents=True)
        for i in range(6):
            noise = rng.integers(0, 40 + 50 * idx, size=(64, 64))
            write_pgm(class_dir / f"img_{i}.pgm", noise)
    cps_table = base / "cps.csv"
    cps_table.write_text(
        "class_id,cps\n" + "".join(f"m{i:02d},{10.0 * (i + 1)}\n" for i in range(4))
    )
    code = actexport_main(
        [
            "export",
            "--model", "tiny",
            "--images", str(sem_root),
            "--role", "sem",
            "--cps-table", str(cps_table),
            "--out", str(out),
            "--resize", "64",
            "--crop", "56",
            "--batch-size", "64",
        ]
    )
    assert code == 0

    run_dir = base / "run"
    features = subprocess.run(
        [
            "texlens", "features",
            "--manifest", str(out / "manifest.json"),
            "--activations", str(out / "activations"),
            "--out", str(run_dir),
        ],
        capture_output=True,
        text=True,
    )
    features_ok = features.returncode == 0 and "5664 feature vectors" in features.stdout

    correlate = subprocess.run(
        [
            "texlens", "correlate",
            "--manifest", str(out / "manifest.json"),
            "--activations", str(out / "activations"),
            "--out", str(run_dir),
        ],
        capture_output=True,
        text=True,
    )
    rows = []
    if (run_dir / "correlation.csv").exists():
        rows = (run_dir / "correlation.csv").read_text().strip().splitlines()
    correlate_ok = (
        correlate.returncode == 0
        and len(rows) == 48  # header + one row per texture class
        and (run_dir / "ranking.txt").exists()
        and (run_dir / "correlation.svg").exists()
    )

    verdict(
        acceptance_log,
        10,
        manifest_ok and features_ok and correlate_ok,
        f"manifest has {texture_count} texture classes / {sample_count} samples; "
        f"features exit {features.returncode}, correlate exit "
        f"{correlate.returncode} with {max(len(rows) - 1, 0)} ranked textures",
    )
