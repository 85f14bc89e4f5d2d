"""Export orchestration: images in, .txa activations plus manifest out.

The images directory is expected to hold one subdirectory per class (the
DTD layout), each containing the class's image files::

    images/
      banded/   banded_0002.jpg  banded_0004.jpg ...
      blotchy/  blotchy_0003.jpg ...

Every readable image becomes one sample: its five stage activations are
written as ``<sample_id>.z1.txa`` .. ``<sample_id>.z5.txa`` under
``<out>/activations/`` and the sample is listed in ``<out>/manifest.json``
under its class.  Sample ids are ``<class>_<file stem>``.  Unreadable
images are skipped with a warning and left out of the manifest; everything
else about a run is deterministic, so repeating an export produces
byte-identical files.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .manifest import (
    ManifestError,
    add_classes,
    existing_class_ids,
    load_or_init,
    read_cps_table,
    write_manifest,
)
from .models import resolve_model_ref
from .preprocess import PreprocessSpec, load_image_tensor
from .txa import write_tensor

log = logging.getLogger("actexport")


class ExportConfigError(ValueError):
    """Raised when an export job is inconsistent before any work is done."""


@dataclass(frozen=True)
class ExportJob:
    """One export invocation: which model, which images, which role."""

    model: str
    images: Path
    role: str
    out: Path
    weights: str = "none"
    cps_table: Path | None = None
    batch_size: int = 8
    preprocess: PreprocessSpec = field(default_factory=PreprocessSpec)

    def __post_init__(self) -> None:
        if self.role not in ("sem", "texture"):
            raise ExportConfigError(f"role must be 'sem' or 'texture', got {self.role!r}")
        if self.role == "sem" and self.cps_table is None:
            raise ExportConfigError("role 'sem' requires --cps-table")
        if self.role == "texture" and self.cps_table is not None:
            raise ExportConfigError("role 'texture' does not take --cps-table")
        if self.batch_size < 1:
            raise ExportConfigError("batch size must be >= 1")


@dataclass
class ExportReport:
    """What an export run produced."""

    classes: list[str]
    sample_count: int
    skipped: list[str]
    manifest_path: Path


def _scan_classes(images: Path) -> dict[str, list[Path]]:
    if not images.is_dir():
        raise ExportConfigError(f"images directory {images} does not exist")
    classes: dict[str, list[Path]] = {}
    for entry in sorted(images.iterdir()):
        if not entry.is_dir():
            continue
        files = sorted(p for p in entry.iterdir() if p.is_file())
        if files:
            classes[entry.name] = files
    if not classes:
        raise ExportConfigError(
            f"images directory {images} contains no class subdirectories with files"
        )
    return classes


def run_export(job: ExportJob) -> ExportReport:
    """Execute *job*; returns a report of what was written.

    Raises ``ExportConfigError``/``ManifestError``/``ModelConfigError`` for
    inconsistent configuration and lets filesystem errors propagate.
    """
    cps = read_cps_table(job.cps_table) if job.role == "sem" else None
    class_files = _scan_classes(job.images)
    if cps is not None:
        missing = sorted(set(class_files) - set(cps))
        if missing:
            raise ManifestError(
                f"class-score table lacks entries for classes: {missing}"
            )

    manifest_path = job.out / "manifest.json"
    doc = load_or_init(manifest_path)
    already = existing_class_ids(doc)
    clash = sorted(set(class_files) & already)
    if clash:
        raise ManifestError(
            f"classes already present in {manifest_path}: {clash}; "
            "each class may be exported only once"
        )

    extractor = resolve_model_ref(job.model, job.weights)
    activations_dir = job.out / "activations"
    activations_dir.mkdir(parents=True, exist_ok=True)

    seen_ids: set[str] = set()
    exported: dict[str, list[str]] = {}
    skipped: list[str] = []
    total = 0
    for class_id, files in class_files.items():
        sample_ids: list[str] = []
        batch_tensors: list[torch.Tensor] = []
        batch_ids: list[str] = []

        def flush() -> None:
            nonlocal total
            if not batch_ids:
                return
            stages = extractor.extract(torch.stack(batch_tensors))
            for row, sid in enumerate(batch_ids):
                for stage_idx, stage in enumerate(stages, start=1):
                    write_tensor(
                        activations_dir / f"{sid}.z{stage_idx}.txa",
                        stage[row].numpy(),
                    )
                total += 1
            batch_tensors.clear()
            batch_ids.clear()

        for path in files:
            sid = f"{class_id}_{path.stem}"
            if sid in seen_ids:
                raise ExportConfigError(
                    f"duplicate sample id {sid!r} (files {path.name} collide "
                    "after extension stripping)"
                )
            try:
                tensor = load_image_tensor(path, job.preprocess)
            except OSError as exc:
                log.warning("skipping unreadable image %s: %s", path, exc)
                skipped.append(str(path))
                continue
            seen_ids.add(sid)
            sample_ids.append(sid)
            batch_tensors.append(tensor)
            batch_ids.append(sid)
            if len(batch_ids) >= job.batch_size:
                flush()
        flush()
        if sample_ids:
            exported[class_id] = sample_ids
        else:
            log.warning("class %s had no readable images; excluded", class_id)

    if not exported:
        raise ExportConfigError("no readable images found; nothing to export")

    add_classes(doc, job.role, exported, cps)
    provenance = {
        "model": extractor.name,
        "role": job.role,
        "weights": job.weights if job.weights in ("pretrained", "none") else "checkpoint",
        **job.preprocess.describe(),
    }
    doc.setdefault("exports", []).append(provenance)
    job.out.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest_path, doc)
    return ExportReport(
        classes=sorted(exported),
        sample_count=total,
        skipped=skipped,
        manifest_path=manifest_path,
    )
