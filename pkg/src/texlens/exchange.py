"""Tensor and manifest exchange formats.

Everything downstream consumes data through the two formats defined here,
so they are deliberately boring and bit-exact:

``.txa`` tensor file layout (all integers little-endian unsigned 32-bit)::

    bytes 0..3    magic  b"TXA1"
    bytes 4..7    format version (currently 1)
    bytes 8..11   dimension count, 1..4
    then          one extent per dimension, each >= 1
    then          payload: row-major IEEE-754 float32, little-endian

Values must be finite; NaN/Inf are rejected on load. Writing the same array
twice produces identical bytes.

Manifest: a JSON document with top-level keys ``sem_classes`` (list of
``{"id", "cps", "samples"}``) and ``texture_classes`` (list of
``{"id", "samples"}``). Sample entries reference activation files relative
to the activation root as ``<sample_id>.z<stage>.txa``. Unknown top-level
keys (e.g. exporter provenance) are preserved but not interpreted. Classes
and samples are sorted on load so downstream computations never depend on
input order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import (
    CorruptionError,
    FormatError,
    SchemaError,
    ValidationError,
)

MAGIC = b"TXA1"
FORMAT_VERSION = 1
MAX_DIMS = 4
TENSOR_SUFFIX = ".txa"

# Extents and their product must fit in unsigned 32-bit range; anything
# larger is treated as a damaged header rather than attempted.
_MAX_ELEMENTS = 2**32 - 1


def _as_float32(values, context: str = "tensor") -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim < 1 or arr.ndim > MAX_DIMS:
        raise ValidationError(
            f"{context}: shape must have 1-{MAX_DIMS} dimensions, got {arr.ndim}"
        )
    if any(extent < 1 for extent in arr.shape):
        raise ValidationError(f"{context}: every extent must be >= 1, got {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype="<f4")
    _check_finite(arr, context)
    return arr


def _check_finite(arr: np.ndarray, context: str) -> None:
    flat = arr.reshape(-1)
    finite = np.isfinite(flat)
    if not finite.all():
        idx = int(np.flatnonzero(~finite)[0])
        raise ValidationError(
            f"{context}: non-finite value {flat[idx]!r} at flat index {idx}"
        )


def write_tensor(values, sink: BinaryIO) -> None:
    """Serialize an array to ``sink`` in the .txa layout.

    ``values`` is converted to float32; pass float32 data when bit-exact
    round-trips matter. Output is byte-for-byte deterministic.
    """
    arr = _as_float32(values)
    sink.write(MAGIC)
    sink.write(struct.pack("<II", FORMAT_VERSION, arr.ndim))
    sink.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    sink.write(arr.tobytes())


def read_tensor(source: BinaryIO) -> np.ndarray:
    """Read one tensor from ``source``, validating header and payload.

    Returns a fresh float32 array. Raises FormatError for an alien or
    malformed header, CorruptionError for truncation/overflow, and
    ValidationError for non-finite payload values.
    """
    magic = source.read(len(MAGIC))
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    head = source.read(8)
    if len(head) != 8:
        raise CorruptionError("truncated header after magic")
    version, ndim = struct.unpack("<II", head)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    if not 1 <= ndim <= MAX_DIMS:
        raise FormatError(f"dimension count must be 1-{MAX_DIMS}, got {ndim}")
    raw_extents = source.read(4 * ndim)
    if len(raw_extents) != 4 * ndim:
        raise CorruptionError("truncated header: missing extents")
    shape = struct.unpack(f"<{ndim}I", raw_extents)
    if any(extent < 1 for extent in shape):
        raise FormatError(f"every extent must be >= 1, got {shape}")
    count = 1
    for extent in shape:
        count *= extent
    if count > _MAX_ELEMENTS:
        raise CorruptionError(f"extent product overflow: {shape}")
    payload = source.read(4 * count)
    if len(payload) != 4 * count:
        raise CorruptionError(
            f"truncated payload: expected {4 * count} bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape).copy()
    _check_finite(arr, "payload")
    return arr


def save_tensor(values, path) -> None:
    """write_tensor to a file, adding path context to any failure."""
    path = Path(path)
    try:
        with open(path, "wb") as sink:
            write_tensor(values, sink)
    except OSError as exc:
        raise OSError(f"failed to write tensor {path}: {exc}") from exc


def load_tensor(path) -> np.ndarray:
    """read_tensor from a file, adding path context to any failure."""
    path = Path(path)
    try:
        with open(path, "rb") as source:
            return read_tensor(source)
    except (FormatError, CorruptionError, ValidationError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc
    except OSError as exc:
        raise OSError(f"failed to read tensor {path}: {exc}") from exc


def activation_path(root, sample_id: str, stage: int) -> Path:
    """Path of one stage activation file under the activation root."""
    return Path(root) / f"{sample_id}.z{stage}{TENSOR_SUFFIX}"


STAGE_COUNT = 5


@dataclass(frozen=True)
class ActivationSet:
    """The five stage activations of one sample, shallowest first.

    Each stage is a channels x height x width float array; spatial extents
    must be non-increasing from stage 1 to stage 5.
    """

    sample_id: str
    class_id: str
    stages: tuple

    def __post_init__(self):
        if len(self.stages) != STAGE_COUNT:
            raise ValidationError(
                f"sample {self.sample_id}: expected {STAGE_COUNT} stages, "
                f"got {len(self.stages)}"
            )
        prev = None
        for i, stage in enumerate(self.stages, start=1):
            if stage.ndim != 3:
                raise ValidationError(
                    f"sample {self.sample_id}: stage {i} must be 3-D "
                    f"(channels x height x width), got shape {stage.shape}"
                )
            spatial = stage.shape[1:]
            if prev is not None and (spatial[0] > prev[0] or spatial[1] > prev[1]):
                raise ValidationError(
                    f"sample {self.sample_id}: stage {i} spatial extents "
                    f"{spatial} exceed stage {i - 1} extents {prev}"
                )
            prev = spatial

    def stage(self, number: int) -> np.ndarray:
        """Stage activation by 1-based stage number."""
        return self.stages[number - 1]


def load_activation_set(root, sample_id: str, class_id: str) -> ActivationSet:
    """Load the five stage files of one sample from the activation root."""
    stages = []
    for stage in range(1, STAGE_COUNT + 1):
        path = activation_path(root, sample_id, stage)
        if not path.exists():
            raise FileNotFoundError(
                f"sample {sample_id}: missing activation file {path}"
            )
        stages.append(load_tensor(path))
    return ActivationSet(sample_id=sample_id, class_id=class_id, stages=tuple(stages))


@dataclass(frozen=True)
class SemClass:
    class_id: str
    cps: float
    sample_ids: tuple


@dataclass(frozen=True)
class TextureClass:
    class_id: str
    sample_ids: tuple


@dataclass(frozen=True)
class DatasetManifest:
    """Validated, canonically ordered dataset declaration.

    ``sem_classes`` carry one critical peak stress (CPS) value each and play
    the target-domain role; ``texture_classes`` are the interpretable
    comparison vocabulary.
    """

    sem_classes: tuple
    texture_classes: tuple
    extra: dict = field(default_factory=dict)

    def all_samples(self):
        """Yield (sample_id, class_id, role) over every declared sample."""
        for cls in self.sem_classes:
            for sid in cls.sample_ids:
                yield sid, cls.class_id, "sem"
        for cls in self.texture_classes:
            for sid in cls.sample_ids:
                yield sid, cls.class_id, "texture"

    def sample_count(self) -> int:
        return sum(len(c.sample_ids) for c in self.sem_classes) + sum(
            len(c.sample_ids) for c in self.texture_classes
        )


_MANIFEST_ROLE_KEYS = ("sem_classes", "texture_classes")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def build_manifest(sem_classes, texture_classes, extra=None) -> DatasetManifest:
    """Validate and canonicalize class declarations into a manifest.

    ``sem_classes``: iterable of (class_id, cps, sample_ids);
    ``texture_classes``: iterable of (class_id, sample_ids).
    """
    seen_classes = set()
    seen_samples = set()

    def check_class(class_id, sample_ids):
        _require(isinstance(class_id, str) and class_id, "class id must be a non-empty string")
        _require(class_id not in seen_classes, f"duplicate class id {class_id!r}")
        seen_classes.add(class_id)
        _require(len(sample_ids) > 0, f"class {class_id!r} declares no samples")
        for sid in sample_ids:
            _require(isinstance(sid, str) and sid, f"class {class_id!r}: sample id must be a non-empty string")
            _require(sid not in seen_samples, f"duplicate sample id {sid!r}")
            seen_samples.add(sid)

    sems = []
    for class_id, cps, sample_ids in sem_classes:
        check_class(class_id, sample_ids)
        _require(
            isinstance(cps, (int, float)) and not isinstance(cps, bool),
            f"SEM class {class_id!r}: cps must be a real number",
        )
        cps = float(cps)
        _require(np.isfinite(cps), f"SEM class {class_id!r}: cps must be finite")
        sems.append(SemClass(class_id, cps, tuple(sorted(sample_ids))))
    texs = []
    for class_id, sample_ids in texture_classes:
        check_class(class_id, sample_ids)
        texs.append(TextureClass(class_id, tuple(sorted(sample_ids))))

    sems.sort(key=lambda c: c.class_id)
    texs.sort(key=lambda c: c.class_id)
    return DatasetManifest(
        sem_classes=tuple(sems),
        texture_classes=tuple(texs),
        extra=dict(extra or {}),
    )


def load_manifest(path) -> DatasetManifest:
    """Load and validate a manifest document."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    except OSError as exc:
        raise OSError(f"failed to read manifest {path}: {exc}") from exc

    _require(isinstance(doc, dict), f"{path}: top level must be an object")

    def entries(key):
        value = doc.get(key, [])
        _require(isinstance(value, list), f"{key} must be a list")
        for entry in value:
            _require(isinstance(entry, dict), f"{key} entries must be objects")
            _require("id" in entry, f"{key} entry missing 'id'")
            _require(
                "samples" in entry and isinstance(entry["samples"], list),
                f"{key} entry {entry.get('id')!r} missing 'samples' list",
            )
        return value

    try:
        sems = []
        for entry in entries("sem_classes"):
            _require(
                "cps" in entry,
                f"SEM class {entry['id']!r} missing required 'cps' value",
            )
            sems.append((entry["id"], entry["cps"], entry["samples"]))
        texs = [(e["id"], e["samples"]) for e in entries("texture_classes")]
        extra = {k: v for k, v in doc.items() if k not in _MANIFEST_ROLE_KEYS}
        return build_manifest(sems, texs, extra)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def write_manifest(manifest: DatasetManifest, path) -> None:
    """Write a manifest as canonical JSON (stable key order and layout)."""
    doc = dict(manifest.extra)
    doc["sem_classes"] = [
        {"id": c.class_id, "cps": c.cps, "samples": list(c.sample_ids)}
        for c in manifest.sem_classes
    ]
    doc["texture_classes"] = [
        {"id": c.class_id, "samples": list(c.sample_ids)}
        for c in manifest.texture_classes
    ]
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed to write manifest {path}: {exc}") from exc
