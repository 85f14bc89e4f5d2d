"""Procedural texture and material fixtures with planted CPS relationships.

Generates everything an end-to-end run needs without a neural network or
external data: a vocabulary of parametric grayscale textures, "material"
classes whose images composite those textures, and CPS values linearly
linked to the planted mixture weights. A pipeline that works must recover
the planted link: textures given positive link coefficients must correlate
positively with CPS, negative ones negatively.

Material images are patchwork composites: the canvas is cut into square
tiles and each tile carries one texture at full amplitude, with tiles
allocated to kinds in exact proportion to the class's mixture weights
(largest-remainder rounding, seeded placement). Compositing by tiling
rather than pixel blending keeps every texture's signature undiluted, the
way a physical material carries regions of distinct surface character.

Determinism: every sample's randomness comes from a 64-bit stream keyed by
(global seed, sample id[, component]), so parallel and serial generation
agree and reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoder import standin_encoder
from .errors import ConfigError, UsageError
from .exchange import DatasetManifest, activation_path, build_manifest, save_tensor, write_manifest
from .pgm import write_pgm
from .saliency import bilinear_resize

TEXTURE_KINDS = ("blotchy", "checkered", "constant", "dotted", "noise", "striped")

MIN_TEXTURE_EXTENT = 32


def derive_seed(seed: int, *tokens) -> int:
    """Stable 64-bit stream key from a global seed and string tokens."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed).to_bytes(8, "little"))
    for token in tokens:
        h.update(b"\x00")
        h.update(str(token).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class TextureSpec:
    """Parameters of one procedural texture image.

    ``density`` controls coverage for dotted/blotchy/noise kinds;
    ``frequency`` is the pattern period in pixels (band period, checker
    pair width, blotch grain); ``level`` is the gray value of ``constant``.
    Identical specs (seed included) produce identical images.
    """

    kind: str
    size: tuple = (64, 64)
    density: float = 0.15
    frequency: float = 8.0
    level: float = 0.5
    seed: int = 0


def _grid(h: int, w: int):
    return np.mgrid[0:h, 0:w].astype(np.float64)


def _tex_constant(spec, h, w, rng):
    return np.full((h, w), float(np.clip(spec.level, 0.0, 1.0)))


def _tex_noise(spec, h, w, rng):
    # per-pixel uniform noise of half-range `density` around `level`
    amp = float(np.clip(spec.density, 0.0, 1.0))
    lo = np.clip(spec.level - amp, 0.0, 1.0)
    hi = np.clip(spec.level + amp, 0.0, 1.0)
    return rng.uniform(lo, hi, size=(h, w))


def _tex_dotted(spec, h, w, rng):
    # disks of alternating polarity on a mid background, so the image mean
    # stays near `level` no matter the dot coverage
    img = np.full((h, w), float(np.clip(spec.level, 0.0, 1.0)))
    radius = max(1.0, spec.frequency / 4.0)
    count = int(round(spec.density * h * w / (np.pi * radius * radius)))
    centers_r = rng.uniform(0.0, h, size=count)
    centers_c = rng.uniform(0.0, w, size=count)
    for k, (r, c) in enumerate(zip(centers_r, centers_c)):
        r0, r1 = max(0, int(r - radius) - 1), min(h, int(r + radius) + 2)
        c0, c1 = max(0, int(c - radius) - 1), min(w, int(c + radius) + 2)
        win_r = np.arange(r0, r1, dtype=np.float64)[:, None]
        win_c = np.arange(c0, c1, dtype=np.float64)[None, :]
        d = np.sqrt((win_r - r) ** 2 + (win_c - c) ** 2)
        # disk with a 1-pixel soft rim so dot edges are not stair-stepped
        rim = np.clip(d - radius + 1.0, 0.0, 1.0)
        window = img[r0:r1, c0:c1]
        target = float(k % 2)
        img[r0:r1, c0:c1] = target + (window - target) * rim
    return img


def _two_tone(binary: np.ndarray, level: float, amp: float) -> np.ndarray:
    return np.clip(level + (binary * 2.0 - 1.0) * amp, 0.0, 1.0)


def _tex_striped(spec, h, w, rng):
    # smooth vertical grating: single-orientation, single-wavelength bands
    _, xx = _grid(h, w)
    phase = rng.uniform(0.0, spec.frequency)
    wave = np.sin(2.0 * np.pi * (xx + phase) / spec.frequency)
    return np.clip(spec.level + spec.density * wave, 0.0, 1.0)


def _tex_checkered(spec, h, w, rng):
    # smooth plaid: two crossed gratings form a grid of bright and dark
    # cells, concentrating energy at one wavelength in two orientations
    yy, xx = _grid(h, w)
    phase_r = rng.uniform(0.0, spec.frequency)
    phase_c = rng.uniform(0.0, spec.frequency)
    plaid = 0.5 * (
        np.sin(2.0 * np.pi * (xx + phase_c) / spec.frequency)
        + np.sin(2.0 * np.pi * (yy + phase_r) / spec.frequency)
    )
    return np.clip(spec.level + 2.0 * spec.density * plaid, 0.0, 1.0)


def _tex_blotchy(spec, h, w, rng):
    # two-tone irregular blobs: smooth coarse noise thresholded at its median
    step = max(2, int(round(spec.frequency)))
    coarse = rng.standard_normal((h // step + 2, w // step + 2))
    img = bilinear_resize(coarse, (h, w))
    blobs = (img > np.median(img)).astype(np.float64)
    return _two_tone(blobs, spec.level, spec.density)


_GENERATORS = {
    "blotchy": _tex_blotchy,
    "checkered": _tex_checkered,
    "constant": _tex_constant,
    "dotted": _tex_dotted,
    "noise": _tex_noise,
    "striped": _tex_striped,
}


def gen_texture(spec: TextureSpec) -> np.ndarray:
    """Render one texture as a 2-D float image with values in [0, 1]."""
    if spec.kind not in _GENERATORS:
        raise UsageError(
            f"unknown texture kind {spec.kind!r}, expected one of {TEXTURE_KINDS}"
        )
    h, w = int(spec.size[0]), int(spec.size[1])
    if h < MIN_TEXTURE_EXTENT or w < MIN_TEXTURE_EXTENT:
        raise UsageError(
            f"texture size must be at least "
            f"{MIN_TEXTURE_EXTENT}x{MIN_TEXTURE_EXTENT}, got {h}x{w}"
        )
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return _GENERATORS[spec.kind](spec, h, w, rng)


@dataclass(frozen=True)
class MaterialSpec:
    """Recipe for a planted-link material dataset.

    Row i of ``mixtures`` gives class i's texture proportions over
    ``texture_kinds`` (non-negative, summing to 1); each image is a
    patchwork of ``patch_extent``-square tiles allocated in those
    proportions. Class CPS values are ``cps_base + cps_link . mixtures[i]``
    plus seeded Gaussian noise of the given amplitude.
    """

    class_count: int
    samples_per_class: int
    texture_kinds: tuple
    mixtures: np.ndarray
    cps_link: np.ndarray
    noise_amplitude: float = 0.0
    cps_base: float = 100.0
    image_size: tuple = (64, 64)
    patch_extent: int = 16
    texture_params: dict = field(default_factory=dict)
    seed: int = 0


def _check_material_spec(spec: MaterialSpec) -> tuple:
    if spec.class_count < 2:
        raise ConfigError(f"need at least 2 classes, got {spec.class_count}")
    if spec.samples_per_class < 1:
        raise ConfigError("samples_per_class must be >= 1")
    for kind in spec.texture_kinds:
        if kind not in _GENERATORS:
            raise ConfigError(f"unknown texture kind {kind!r} in material recipe")
    mixtures = np.asarray(spec.mixtures, dtype=np.float64)
    link = np.asarray(spec.cps_link, dtype=np.float64)
    t = len(spec.texture_kinds)
    if mixtures.shape != (spec.class_count, t):
        raise ConfigError(
            f"mixtures must be {spec.class_count}x{t}, got {mixtures.shape}"
        )
    if link.shape != (t,):
        raise ConfigError(
            f"cps_link must have one coefficient per texture kind, got shape {link.shape}"
        )
    if (mixtures < 0).any():
        raise ConfigError("mixture weights must be non-negative")
    sums = mixtures.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise ConfigError(f"each class's mixture weights must sum to 1, got {sums}")
    if not (np.all(np.isfinite(mixtures)) and np.all(np.isfinite(link))):
        raise ConfigError("mixtures and cps_link must be finite")
    if spec.patch_extent < 1:
        raise ConfigError(f"patch_extent must be >= 1, got {spec.patch_extent}")
    h, w = spec.image_size
    if h % spec.patch_extent or w % spec.patch_extent:
        raise ConfigError(
            f"image size {h}x{w} must be a multiple of patch_extent "
            f"{spec.patch_extent}"
        )
    return mixtures, link


def material_class_id(index: int) -> str:
    return f"m{index:02d}"


def _planted_cps(spec: MaterialSpec, mixtures, link) -> list:
    values = []
    for i in range(spec.class_count):
        rng = np.random.Generator(
            np.random.PCG64(derive_seed(spec.seed, "cps", material_class_id(i)))
        )
        values.append(
            spec.cps_base
            + float(link @ mixtures[i])
            + spec.noise_amplitude * rng.standard_normal()
        )
    if np.ptp(values) == 0.0:
        raise ConfigError(
            "degenerate link: every class received the same CPS value"
        )
    return values


def _patch_counts(weights: np.ndarray, patch_count: int) -> np.ndarray:
    """Apportion patches to kinds in exact proportion (largest remainder)."""
    scaled = weights * patch_count
    counts = np.floor(scaled).astype(np.int64)
    for k in np.argsort(counts - scaled, kind="stable")[: patch_count - counts.sum()]:
        counts[k] += 1
    return counts


def _compose_sample(spec: MaterialSpec, sample_id: str, weights: np.ndarray) -> np.ndarray:
    h, w = spec.image_size
    patch = spec.patch_extent
    grid_w = w // patch
    counts = _patch_counts(weights, (h // patch) * grid_w)
    assignment = np.repeat(np.arange(len(counts)), counts)
    rng = np.random.Generator(
        np.random.PCG64(derive_seed(spec.seed, sample_id, "patches"))
    )
    rng.shuffle(assignment)

    layers = {}
    for k in np.unique(assignment):
        kind = spec.texture_kinds[k]
        layers[k] = gen_texture(
            TextureSpec(
                kind=kind,
                size=spec.image_size,
                seed=derive_seed(spec.seed, sample_id, kind),
                **spec.texture_params.get(kind, {}),
            )
        )
    image = np.empty((h, w))
    for p, k in enumerate(assignment):
        r, c = divmod(p, grid_w)
        window = (slice(r * patch, (r + 1) * patch), slice(c * patch, (c + 1) * patch))
        image[window] = layers[k][window]
    return image


def gen_material_dataset(spec: MaterialSpec):
    """Generate material images and their manifest.

    Returns (class_images, manifest): class_images maps class_id to a list
    of (sample_id, image); the manifest declares the classes with their
    planted CPS values (and no texture classes).
    """
    mixtures, link = _check_material_spec(spec)
    cps_values = _planted_cps(spec, mixtures, link)

    class_images = {}
    sem_entries = []
    for i in range(spec.class_count):
        cid = material_class_id(i)
        samples = []
        for j in range(spec.samples_per_class):
            sid = f"{cid}s{j:03d}"
            samples.append((sid, _compose_sample(spec, sid, mixtures[i])))
        class_images[cid] = samples
        sem_entries.append((cid, cps_values[i], [sid for sid, _ in samples]))

    manifest = build_manifest(sem_entries, [])
    return class_images, manifest


def gen_texture_dataset(kinds, samples_per_class: int, size=(64, 64), seed: int = 0,
                        texture_params=None):
    """Pure single-texture classes: one class per kind, seeded per sample."""
    if samples_per_class < 1:
        raise ConfigError("samples_per_class must be >= 1")
    params = texture_params or {}
    class_images = {}
    for kind in kinds:
        samples = []
        for j in range(samples_per_class):
            sid = f"{kind}t{j:03d}"
            spec = TextureSpec(
                kind=kind, size=size, seed=derive_seed(seed, sid),
                **params.get(kind, {}),
            )
            samples.append((sid, gen_texture(spec)))
        class_images[kind] = samples
    return class_images


@dataclass(frozen=True)
class SynthDataset:
    """A complete in-memory dataset: manifest plus every sample image."""

    manifest: DatasetManifest
    images: dict  # sample_id -> 2-D float image


def synth_dataset(spec: MaterialSpec, texture_samples_per_class: int = 20) -> SynthDataset:
    """Material classes plus their pure-texture vocabulary in one manifest."""
    class_images, material_manifest = gen_material_dataset(spec)
    texture_images = gen_texture_dataset(
        spec.texture_kinds,
        texture_samples_per_class,
        size=spec.image_size,
        seed=spec.seed,
        texture_params=spec.texture_params,
    )
    manifest = build_manifest(
        [(c.class_id, c.cps, c.sample_ids) for c in material_manifest.sem_classes],
        [(kind, [sid for sid, _ in samples]) for kind, samples in texture_images.items()],
    )
    images = {}
    for samples in class_images.values():
        images.update(samples)
    for samples in texture_images.values():
        images.update(samples)
    return SynthDataset(manifest=manifest, images=images)


#: Texture parameters used by the canonical planted design. The two band
#: patterns live at separated wavelengths (4 px grating, 8 px plaid) so each
#: owns its own spectral channels, and the four amplitudes are chosen so all
#: planted kinds carry comparable total feature energy — no kind can dominate
#: the distance geometry by sheer magnitude.
PLANTED_TEXTURE_PARAMS = {
    "striped": {"frequency": 4.0, "density": 0.18},
    "checkered": {"frequency": 8.0, "density": 0.20},
    "dotted": {"frequency": 8.0, "density": 0.48},
    "noise": {"density": 0.26},
}


def planted_material_spec(
    class_count: int = 8,
    samples_per_class: int = 40,
    seed: int = 0,
    image_size=(64, 64),
    noise_amplitude: float = 0.05,
) -> MaterialSpec:
    """The canonical planted design used by the end-to-end recovery tests.

    Two positively linked textures (striped, checkered), two negatively
    linked (dotted, noise); blotchy and constant appear in the texture
    vocabulary but in no material, so their correlations are unconstrained.
    Class i tiles positives with weight growing in i and negatives with
    weight shrinking in i, so CPS increases exactly when the planted
    positives displace the planted negatives.
    """
    kinds = ("striped", "checkered", "dotted", "noise", "blotchy", "constant")
    mixtures = np.empty((class_count, len(kinds)))
    for i in range(class_count):
        t = i / (class_count - 1)
        mixtures[i] = (0.5 * t, 0.5 * t, 0.5 * (1 - t), 0.5 * (1 - t), 0.0, 0.0)
    link = np.array([25.0, 25.0, -25.0, -25.0, 0.0, 0.0])
    return MaterialSpec(
        class_count=class_count,
        samples_per_class=samples_per_class,
        texture_kinds=kinds,
        mixtures=mixtures,
        cps_link=link,
        noise_amplitude=noise_amplitude,
        image_size=image_size,
        patch_extent=8,
        seed=seed,
        texture_params=PLANTED_TEXTURE_PARAMS,
    )


def write_dataset(dataset: SynthDataset, root, write_images: bool = True) -> None:
    """Materialize a dataset: manifest, activations, and (optionally) images.

    Layout under ``root``: ``manifest.json``, ``activations/<sid>.z<s>.txa``
    for all five stages, and ``images/<sid>.pgm``. The activation files come
    from the stand-in encoder, so the tree is indistinguishable from a real
    exporter's output to everything downstream.
    """
    root = Path(root)
    act_root = root / "activations"
    act_root.mkdir(parents=True, exist_ok=True)
    image_root = root / "images"
    if write_images:
        image_root.mkdir(parents=True, exist_ok=True)
    for sid, cid, _role in dataset.manifest.all_samples():
        image = dataset.images[sid]
        acts = standin_encoder(image, sample_id=sid, class_id=cid)
        for stage_num in range(1, len(acts.stages) + 1):
            save_tensor(acts.stage(stage_num), activation_path(act_root, sid, stage_num))
        if write_images:
            write_pgm(image, image_root / f"{sid}.pgm")
    write_manifest(dataset.manifest, root / "manifest.json")
