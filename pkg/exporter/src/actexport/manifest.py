"""Dataset manifest emitter and class-score sidecar parser.

The manifest is a JSON document describing which samples belong to which
class and which role each class plays:

    {
      "sem_classes": [
        {"cps": 61.2, "id": "m00", "samples": ["m00_img1", ...]},
        ...
      ],
      "texture_classes": [
        {"id": "banded", "samples": ["banded_0001", ...]},
        ...
      ]
    }

Semantic classes carry a per-class score (``cps``); texture classes do not.
The document is written canonically (sorted keys, two-space indent, sorted
class and sample ids, trailing newline) so repeated exports are
byte-identical.  Exports into an existing output directory merge with the
manifest already on disk, which lets texture-role and semantic-role exports
share one dataset; re-adding an existing class id is an error.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


class ManifestError(ValueError):
    """Raised for malformed manifests or class-score tables."""


def read_cps_table(path: str | Path) -> dict[str, float]:
    """Parse a two-column CSV of ``class_id,score`` rows.

    Blank lines and ``#`` comments are ignored; a leading ``class_id,cps``
    header row is allowed.  Scores must be finite; class ids must be unique.
    """
    path = Path(path)
    table: dict[str, float] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ManifestError(
                f"{path}:{lineno}: expected 'class_id,score', got {raw!r}"
            )
        class_id, score_text = parts
        if lineno == 1 and class_id.lower() == "class_id":
            continue
        if not class_id:
            raise ManifestError(f"{path}:{lineno}: empty class id")
        try:
            score = float(score_text)
        except ValueError:
            raise ManifestError(
                f"{path}:{lineno}: score {score_text!r} is not a number"
            ) from None
        if not math.isfinite(score):
            raise ManifestError(f"{path}:{lineno}: score must be finite")
        if class_id in table:
            raise ManifestError(f"{path}:{lineno}: duplicate class id {class_id!r}")
        table[class_id] = score
    if not table:
        raise ManifestError(f"{path}: class-score table is empty")
    return table


def _empty_doc() -> dict:
    return {"sem_classes": [], "texture_classes": []}


def load_or_init(path: str | Path) -> dict:
    """Load an existing manifest for merging, or start a fresh document."""
    path = Path(path)
    if not path.exists():
        return _empty_doc()
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest root must be an object")
    doc.setdefault("sem_classes", [])
    doc.setdefault("texture_classes", [])
    for key in ("sem_classes", "texture_classes"):
        if not isinstance(doc[key], list):
            raise ManifestError(f"{path}: {key!r} must be a list")
    return doc


def existing_class_ids(doc: dict) -> set[str]:
    ids: set[str] = set()
    for key in ("sem_classes", "texture_classes"):
        for entry in doc.get(key, []):
            if isinstance(entry, dict) and "id" in entry:
                ids.add(str(entry["id"]))
    return ids


def add_classes(
    doc: dict,
    role: str,
    classes: dict[str, list[str]],
    cps: dict[str, float] | None = None,
) -> None:
    """Merge *classes* (class id -> sample ids) into *doc* under *role*.

    ``role`` is ``"sem"`` (requires a score for every class) or
    ``"texture"``.  Class ids already present in the document are rejected
    so two exports cannot silently collide.
    """
    if role not in ("sem", "texture"):
        raise ManifestError(f"unknown role {role!r}")
    taken = existing_class_ids(doc)
    for class_id in sorted(classes):
        samples = classes[class_id]
        if class_id in taken:
            raise ManifestError(
                f"class {class_id!r} already present in manifest; "
                "each class may be exported only once"
            )
        if not samples:
            raise ManifestError(f"class {class_id!r} has no samples")
        entry: dict = {"id": class_id, "samples": sorted(samples)}
        if role == "sem":
            if cps is None or class_id not in cps:
                raise ManifestError(
                    f"semantic class {class_id!r} has no score in the class-score table"
                )
            entry["cps"] = float(cps[class_id])
        doc["sem_classes" if role == "sem" else "texture_classes"].append(entry)
        taken.add(class_id)


def write_manifest(path: str | Path, doc: dict) -> None:
    """Write *doc* canonically: sorted classes, sorted keys, trailing newline."""
    path = Path(path)
    for key in ("sem_classes", "texture_classes"):
        doc[key] = sorted(doc[key], key=lambda entry: entry["id"])
        for entry in doc[key]:
            entry["samples"] = sorted(entry["samples"])
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    tmp = path.with_name(path.name + ".part")
    tmp.write_text(text)
    tmp.replace(path)
