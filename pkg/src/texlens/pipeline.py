"""Run orchestration: cached feature extraction and report generation.

A run is driven by a RunConfig and owns one output directory (guarded by an
advisory lock, so two runs can never interleave writes into the same tree).
Feature extraction is cached per sample and skipped on reruns when the
cached outputs are newer than every activation file and were produced under
the same stage/weights; all other commands are cheap, deterministic
recomputations from those cached features, so rerunning any command over
unchanged inputs reproduces its outputs byte for byte.

Output layout under the run directory::

    features/<sid>.z<stage>.feat.txa    feature vector at the salient location
    features/<sid>.z<stage>.meta.json   location, class, role, weights
    features/index.z<stage>.json        whole-run feature index
    saliency/<sid>.combined.txa|.pgm    combined multi-stage saliency map
    relevance.csv, correlation.csv, ranking.txt, correlation.svg
    profiles.csv, similarity.csv, similarity.svg
    retrieve/<query>.montage.json
"""

from __future__ import annotations

import csv
import fcntl
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import correlate, exchange, figures, metric, saliency
from .errors import ConfigError, UsageError
from .pgm import write_pgm

DEFAULT_STAGE = 5
DEFAULT_K = 9
DEFAULT_WEIGHTS = (0.2, 0.2, 0.2, 0.2, 0.2)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: paths, stage/k selection, conventions."""

    manifest: Path
    activations: Path
    output: Path
    stage: int = DEFAULT_STAGE
    k: int = DEFAULT_K
    weights: tuple = DEFAULT_WEIGHTS
    sign_convention: str = "similarity"
    seed: int = 0


def validate_config(config: RunConfig) -> RunConfig:
    """Check paths and parameter ranges, returning the config unchanged."""
    manifest = Path(config.manifest)
    activations = Path(config.activations)
    if not manifest.is_file():
        raise ConfigError(f"manifest not found: {manifest}")
    if not activations.is_dir():
        raise ConfigError(f"activation root not found: {activations}")
    if not 1 <= config.stage <= exchange.STAGE_COUNT:
        raise ConfigError(
            f"stage must be 1-{exchange.STAGE_COUNT}, got {config.stage}"
        )
    if config.k < 1:
        raise ConfigError(f"k must be >= 1, got {config.k}")
    weights = np.asarray(config.weights, dtype=np.float64)
    if weights.shape != (exchange.STAGE_COUNT,):
        raise ConfigError(
            f"need {exchange.STAGE_COUNT} combination weights, got {list(config.weights)!r}"
        )
    if (weights < 0).any() or abs(weights.sum() - 1.0) > saliency.WEIGHT_SUM_TOLERANCE:
        raise ConfigError(
            f"combination weights must be non-negative and sum to 1, got {list(config.weights)!r}"
        )
    if config.sign_convention not in correlate.SIGN_CONVENTIONS:
        raise ConfigError(
            f"sign_convention must be one of {correlate.SIGN_CONVENTIONS}, "
            f"got {config.sign_convention!r}"
        )
    return config


@contextmanager
def output_lock(output_dir):
    """Advisory exclusive lock on a run's output directory."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    handle = open(output_dir / ".lock", "w")
    try:
        fcntl.flock(handle, fcntl.LOCK_EX | fcntl.LOCK_NB)
    except OSError:
        handle.close()
        raise ConfigError(
            f"output directory {output_dir} is in use by another run"
        ) from None
    try:
        yield
    finally:
        fcntl.flock(handle, fcntl.LOCK_UN)
        handle.close()


def _features_dir(config) -> Path:
    return Path(config.output) / "features"


def _saliency_dir(config) -> Path:
    return Path(config.output) / "saliency"


def feature_path(config, sample_id: str) -> Path:
    return _features_dir(config) / f"{sample_id}.z{config.stage}.feat.txa"


def meta_path(config, sample_id: str) -> Path:
    return _features_dir(config) / f"{sample_id}.z{config.stage}.meta.json"


def combined_map_path(config, sample_id: str) -> Path:
    return _saliency_dir(config) / f"{sample_id}.combined.txa"


def combined_pgm_path(config, sample_id: str) -> Path:
    return _saliency_dir(config) / f"{sample_id}.combined.pgm"


def index_path(config) -> Path:
    return _features_dir(config) / f"index.z{config.stage}.json"


def _write_json(doc, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cache_fresh(config, sample_id: str, input_paths) -> bool:
    outputs = [
        feature_path(config, sample_id),
        meta_path(config, sample_id),
        combined_map_path(config, sample_id),
        combined_pgm_path(config, sample_id),
    ]
    if not all(p.exists() for p in outputs):
        return False
    newest_input = max(p.stat().st_mtime_ns for p in input_paths)
    if min(p.stat().st_mtime_ns for p in outputs) < newest_input:
        return False
    try:
        with open(meta_path(config, sample_id), "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return False
    return meta.get("weights") == list(config.weights)


def _compute_one(config, sample_id: str, class_id: str, role: str) -> dict:
    acts = exchange.load_activation_set(config.activations, sample_id, class_id)
    feature = saliency.extract_feature(acts, config.stage)
    maps = [
        saliency.normalize_map(saliency.smoe_statistic(acts.stage(s)))
        for s in range(1, exchange.STAGE_COUNT + 1)
    ]
    combined = saliency.combine_maps(maps, maps[0].shape, config.weights)
    exchange.save_tensor(feature.values, feature_path(config, sample_id))
    exchange.save_tensor(combined, combined_map_path(config, sample_id))
    write_pgm(combined, combined_pgm_path(config, sample_id))
    extent = acts.stage(config.stage).shape[1:]
    meta = {
        "sample_id": sample_id,
        "class_id": class_id,
        "role": role,
        "stage": config.stage,
        "row": feature.row,
        "col": feature.col,
        "extent": [int(extent[0]), int(extent[1])],
        "weights": list(config.weights),
    }
    _write_json(meta, meta_path(config, sample_id))
    return meta


def compute_features(config: RunConfig) -> dict:
    """Extract and cache per-sample features and combined saliency maps.

    Returns the feature index (also written to the output tree). Samples
    whose cached outputs are newer than all five activation files and match
    the current stage/weights are skipped untouched.
    """
    validate_config(config)
    manifest = exchange.load_manifest(config.manifest)
    with output_lock(config.output):
        _features_dir(config).mkdir(parents=True, exist_ok=True)
        _saliency_dir(config).mkdir(parents=True, exist_ok=True)
        samples = {}
        for sample_id, class_id, role in manifest.all_samples():
            input_paths = [
                exchange.activation_path(config.activations, sample_id, s)
                for s in range(1, exchange.STAGE_COUNT + 1)
            ]
            missing = [p for p in input_paths if not p.exists()]
            if missing:
                raise FileNotFoundError(
                    f"sample {sample_id}: missing activation file {missing[0]}"
                )
            if _cache_fresh(config, sample_id, input_paths):
                with open(meta_path(config, sample_id), "r", encoding="utf-8") as fh:
                    meta = json.load(fh)
            else:
                meta = _compute_one(config, sample_id, class_id, role)
            samples[sample_id] = {
                k: meta[k] for k in ("class_id", "role", "row", "col", "extent")
            }
        index = {
            "stage": config.stage,
            "weights": list(config.weights),
            "samples": samples,
        }
        _write_json(index, index_path(config))
    return index


def load_feature_index(config: RunConfig) -> dict:
    path = index_path(config)
    if not path.exists():
        raise UsageError(
            f"no cached features for stage {config.stage} under {config.output}; "
            f"run the features command first"
        )
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_vectors(config, index) -> dict:
    """sample_id -> float64 feature vector, for every indexed sample."""
    vectors = {}
    for sample_id in index["samples"]:
        vectors[sample_id] = np.asarray(
            exchange.load_tensor(feature_path(config, sample_id)), dtype=np.float64
        )
    return vectors


def _group_by_class(index, vectors, role: str) -> list:
    """[(class_id, (n, d) matrix)] for one role, canonical order both ways."""
    groups = {}
    for sample_id in sorted(index["samples"]):
        info = index["samples"][sample_id]
        if info["role"] != role:
            continue
        groups.setdefault(info["class_id"], []).append(vectors[sample_id])
    return [(cid, np.asarray(groups[cid])) for cid in sorted(groups)]


def _salient_entry(info) -> dict:
    row, col = info["row"], info["col"]
    eh, ew = info["extent"]
    return {
        "row": row,
        "col": col,
        "extent": [eh, ew],
        # fractional image-space box of the feature cell, for overlays
        "box": [row / eh, col / ew, (row + 1) / eh, (col + 1) / ew],
    }


def _image_ref(config, sample_id: str):
    path = Path(config.manifest).parent / "images" / f"{sample_id}.pgm"
    return str(path) if path.exists() else None


def run_retrieve(config: RunConfig, query: str) -> dict:
    """Nearest interpretable textures to a sample or to a whole class.

    Sample mode (query is any indexed sample id) ranks texture samples by
    feature distance; class mode (query is a SEM class id) ranks them by
    class-averaged distance. Returns — and writes — a montage manifest that
    references image paths and salient boxes for overlay rendering.
    """
    validate_config(config)
    index = load_feature_index(config)
    vectors = _load_vectors(config, index)
    texture_entries = [
        (sid, info["class_id"], vectors[sid])
        for sid, info in sorted(index["samples"].items())
        if info["role"] == "texture"
    ]
    if not texture_entries:
        raise UsageError("no texture samples in the feature index")
    tex_index = metric.build_index(texture_entries, stage=config.stage)

    samples = index["samples"]
    sem_class_ids = {i["class_id"] for i in samples.values() if i["role"] == "sem"}
    if query in samples:
        mode = "sample"
        distances = metric.knn(vectors[query], tex_index, config.k)
        query_entry = {
            "id": query,
            "mode": mode,
            "class_id": samples[query]["class_id"],
            "role": samples[query]["role"],
            "salient": _salient_entry(samples[query]),
            "image": _image_ref(config, query),
        }
    elif query in sem_class_ids:
        mode = "class"
        class_matrix = np.asarray(
            [vectors[sid] for sid in sorted(samples) if samples[sid]["class_id"] == query]
        )
        if config.k > len(tex_index):
            raise UsageError(
                f"k must be in 1..{len(tex_index)}, got {config.k}"
            )
        mean_d = metric.class_mean_distances(class_matrix, tex_index.vectors)
        order = np.argsort(mean_d, kind="stable")[: config.k]
        distances = [
            metric.Neighbor(
                tex_index.sample_ids[i], tex_index.class_ids[i], float(mean_d[i])
            )
            for i in order
        ]
        query_entry = {"id": query, "mode": mode, "class_id": query, "role": "sem"}
    else:
        raise UsageError(f"unknown query {query!r}: not a sample id or SEM class id")

    montage = {
        "stage": config.stage,
        "k": config.k,
        "query": query_entry,
        "neighbors": [
            {
                "rank": rank,
                "sample_id": n.sample_id,
                "class_id": n.class_id,
                "distance": n.distance,
                "salient": _salient_entry(samples[n.sample_id]),
                "image": _image_ref(config, n.sample_id),
            }
            for rank, n in enumerate(distances, start=1)
        ],
    }
    with output_lock(config.output):
        out_dir = Path(config.output) / "retrieve"
        out_dir.mkdir(parents=True, exist_ok=True)
        safe = query.replace("/", "_")
        _write_json(montage, out_dir / f"{safe}.montage.json")
    return montage


def _relevance_and_cps(config, index, vectors):
    manifest = exchange.load_manifest(config.manifest)
    sem_groups = _group_by_class(index, vectors, "sem")
    tex_groups = _group_by_class(index, vectors, "texture")
    rel = metric.relevance_matrix(sem_groups, tex_groups)
    cps_by_class = {c.class_id: c.cps for c in manifest.sem_classes}
    missing = [cid for cid in rel.sem_ids if cid not in cps_by_class]
    if missing:
        raise UsageError(
            f"classes {missing} have cached features but no CPS in the manifest"
        )
    cps = correlate.CpsVector(
        class_ids=rel.sem_ids,
        values=np.array([cps_by_class[cid] for cid in rel.sem_ids]),
    )
    return rel, cps


def _read_correlation_csv(path: Path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return [(r[0], float(r[1])) for r in rows[1:]]


def _read_similarity_csv(path: Path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    ids = rows[0][1:]
    matrix = [[float(v) for v in r[1:]] for r in rows[1:]]
    return ids, matrix


def run_correlate(config: RunConfig):
    """Produce the texture-vs-CPS correlation report, tables, and chart."""
    validate_config(config)
    index = load_feature_index(config)
    vectors = _load_vectors(config, index)
    rel, cps = _relevance_and_cps(config, index, vectors)
    report = correlate.texture_cps_correlations(rel, cps, config.sign_convention)
    with output_lock(config.output):
        out = Path(config.output)
        with open(out / "relevance.csv", "w", encoding="utf-8", newline="") as fh:
            metric.write_relevance_csv(rel, fh)
        with open(out / "correlation.csv", "w", encoding="utf-8", newline="") as fh:
            correlate.write_correlation_csv(report, fh)
        with open(out / "ranking.txt", "w", encoding="utf-8") as fh:
            fh.write(correlate.format_ranking_table(report))
        # chart is rendered from the exported file, so the two always agree
        ranked = _read_correlation_csv(out / "correlation.csv")
        chart = figures.bar_chart_svg(
            [r[0] for r in ranked],
            [r[1] for r in ranked],
            title=f"Texture correlation with CPS ({report.sign_convention})",
        )
        (out / "correlation.svg").write_text(chart, encoding="utf-8")
    return report


def run_batchsim(config: RunConfig):
    """Produce per-class texture profiles and the class-similarity heatmap.

    Classes are ordered by increasing CPS in the profile rows, the matrix,
    and the heatmap axes.
    """
    validate_config(config)
    index = load_feature_index(config)
    vectors = _load_vectors(config, index)
    rel, cps = _relevance_and_cps(config, index, vectors)
    profiles = correlate.batch_texture_profiles(rel, cps, config.sign_convention)
    order = np.argsort(cps.values, kind="stable")
    ordered = correlate.BatchProfiles(
        class_ids=tuple(profiles.class_ids[i] for i in order),
        texture_ids=profiles.texture_ids,
        values=profiles.values[order],
        sign_convention=profiles.sign_convention,
    )
    matrix = correlate.batch_similarity(ordered)
    with output_lock(config.output):
        out = Path(config.output)
        with open(out / "profiles.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["class_id", *ordered.texture_ids])
            for cid, row in zip(ordered.class_ids, ordered.values):
                writer.writerow([cid, *[repr(float(v)) for v in row]])
        with open(out / "similarity.csv", "w", encoding="utf-8", newline="") as fh:
            correlate.write_similarity_csv(matrix, fh)
        ids, values = _read_similarity_csv(out / "similarity.csv")
        heat = figures.heatmap_svg(
            ids, values, title="Batch similarity, ordered by increasing CPS"
        )
        (out / "similarity.svg").write_text(heat, encoding="utf-8")
    return matrix
