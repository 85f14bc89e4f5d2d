"""Backbone construction and stage-activation capture.

An export run taps five extraction points of a convolutional backbone — the
stem's pooled output plus the four residual-stage outputs — via forward
hooks, yielding one (channels, height, width) tensor per stage with spatial
extents that never grow from one stage to the next.

Two backbones are built in:

``resnet50``
    The torchvision ResNet-50.  Extraction points are the ``maxpool``
    output and the outputs of ``layer1`` .. ``layer4``; at the default
    352 x 352 input this yields stages of 64x88x88, 256x88x88, 512x44x44,
    1024x22x22 and 2048x11x11.

``tiny``
    A miniature stand-in with the same five extraction points and the same
    stride schedule but far fewer channels (8/16/32/64/128).  It exists so
    pipelines can be exercised quickly and without downloading weights.

Weights come from ``--weights``: ``pretrained`` (torchvision's published
checkpoint, needs network access), ``none`` (fresh initialization from a
fixed seed, so repeated runs are identical), or a path to a checkpoint
file.  Models always run in eval mode with gradients disabled.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn

STAGE_COUNT = 5
DEFAULT_INIT_SEED = 7310




class ModelConfigError(ValueError):
    """Raised when the requested backbone/weights cannot be assembled."""


class TinyBackbone(nn.Module):
    """Five-stage miniature CNN mirroring the ResNet stride schedule."""

    def __init__(self) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(3, 8, kernel_size=7, stride=2, padding=3, bias=False)
        self.relu = nn.ReLU(inplace=True)
        self.maxpool = nn.MaxPool2d(kernel_size=3, stride=2, padding=1)
        self.layer1 = nn.Sequential(
            nn.Conv2d(8, 16, kernel_size=3, stride=1, padding=1, bias=False),
            nn.ReLU(inplace=True),
        )
        self.layer2 = nn.Sequential(
            nn.Conv2d(16, 32, kernel_size=3, stride=2, padding=1, bias=False),
            nn.ReLU(inplace=True),
        )
        self.layer3 = nn.Sequential(
            nn.Conv2d(32, 64, kernel_size=3, stride=2, padding=1, bias=False),
            nn.ReLU(inplace=True),
        )
        self.layer4 = nn.Sequential(
            nn.Conv2d(64, 128, kernel_size=3, stride=2, padding=1, bias=False),
            nn.ReLU(inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.maxpool(self.relu(self.conv1(x)))
        x = self.layer1(x)
        x = self.layer2(x)
        x = self.layer3(x)
        return self.layer4(x)


_EXTRACTION_POINTS = ("maxpool", "layer1", "layer2", "layer3", "layer4")


class StageExtractor:
    """Runs a backbone and captures the five stage activations per batch."""

    def __init__(self, name: str, module: nn.Module) -> None:
        self.name = name
        self.module = module
        missing = [p for p in _EXTRACTION_POINTS if not hasattr(module, p)]
        if missing:
            raise ModelConfigError(
                f"model {name!r} lacks extraction points {missing}; "
                f"expected modules named {list(_EXTRACTION_POINTS)}"
            )
        self._captured: list[torch.Tensor] = []
        for point in _EXTRACTION_POINTS:
            getattr(module, point).register_forward_hook(self._capture)
        module.eval()
        for param in module.parameters():
            param.requires_grad_(False)

    def _capture(self, _module, _inputs, output) -> None:
        self._captured.append(output.detach())

    @torch.no_grad()
    def extract(self, batch: torch.Tensor) -> list[torch.Tensor]:
        """Return the five (batch, channels, h, w) stage tensors for *batch*."""
        self._captured = []
        self.module(batch)
        captured = self._captured
        self._captured = []
        if len(captured) != STAGE_COUNT:
            raise ModelConfigError(
                f"model {self.name!r} fired {len(captured)} extraction points, "
                f"expected {STAGE_COUNT}"
            )
        for idx in range(1, STAGE_COUNT):
            prev, cur = captured[idx - 1].shape[-2:], captured[idx].shape[-2:]
            if cur[0] > prev[0] or cur[1] > prev[1]:
                raise ModelConfigError(
                    f"model {self.name!r}: stage {idx + 1} extent {tuple(cur)} "
                    f"exceeds stage {idx} extent {tuple(prev)}"
                )
        return captured


def _load_checkpoint(module: nn.Module, path: Path, name: str) -> None:
    try:
        state = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise ModelConfigError(f"checkpoint {path} does not exist") from None
    except Exception as exc:
        raise ModelConfigError(f"checkpoint {path} could not be read: {exc}") from None
    if isinstance(state, dict) and "state_dict" in state:
        state = state["state_dict"]
    try:
        module.load_state_dict(state)
    except RuntimeError as exc:
        raise ModelConfigError(
            f"checkpoint {path} does not match model {name!r}: {exc}"
        ) from None


def build_extractor(
    name: str, weights: str = "none", init_seed: int = DEFAULT_INIT_SEED
) -> StageExtractor:
    """Assemble a named backbone with the requested weights.

    ``weights`` is ``"pretrained"``, ``"none"`` (deterministic fresh
    initialization), or a path to a bare state-dict checkpoint.  Unknown
    model names, missing checkpoints and architecture mismatches raise
    ``ModelConfigError``.
    """
    if name == "resnet50":
        from torchvision import models as tv_models

        if weights == "pretrained":
            try:
                module = tv_models.resnet50(
                    weights=tv_models.ResNet50_Weights.DEFAULT
                )
            except Exception as exc:
                raise ModelConfigError(
                    f"pretrained weights for {name!r} unavailable "
                    f"(download failed?): {exc}"
                ) from None
        else:
            # Seed before construction: the module's own initialization
            # draws from the global generator, so a fixed seed makes
            # `--weights none` reproducible across invocations.
            torch.manual_seed(init_seed)
            module = tv_models.resnet50(weights=None)
            if weights != "none":
                _load_checkpoint(module, Path(weights), name)
    elif name == "tiny":
        if weights == "pretrained":
            raise ModelConfigError(
                "model 'tiny' has no pretrained weights; use 'none' or a checkpoint"
            )
        torch.manual_seed(init_seed)
        module = TinyBackbone()
        if weights != "none":
            _load_checkpoint(module, Path(weights), name)
    else:
        raise ModelConfigError(
            f"unknown model {name!r}; available models: resnet50, tiny"
        )
    return StageExtractor(name, module)


def resolve_model_ref(ref: str, weights: str = "none") -> StageExtractor:
    """Build an extractor from a model reference.

    *ref* is either a built-in name (``resnet50``, ``tiny``) or a path to a
    self-describing checkpoint ``{"arch": <name>, "state_dict": ...}`` saved
    with :func:`save_checkpoint`.  With a checkpoint ref, ``weights`` must
    stay at its default since the checkpoint already carries the weights.
    """
    if ref in ("resnet50", "tiny"):
        return build_extractor(ref, weights)
    path = Path(ref)
    if not path.exists():
        raise ModelConfigError(
            f"model {ref!r} is neither a built-in name (resnet50, tiny) "
            "nor an existing checkpoint file"
        )
    if weights != "none":
        raise ModelConfigError(
            "--weights cannot be combined with a checkpoint --model; "
            "the checkpoint already provides the weights"
        )
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise ModelConfigError(f"checkpoint {path} could not be read: {exc}") from None
    if not isinstance(payload, dict) or "arch" not in payload or "state_dict" not in payload:
        raise ModelConfigError(
            f"checkpoint {path} must contain 'arch' and 'state_dict' entries"
        )
    arch = payload["arch"]
    if arch == "resnet50":
        from torchvision import models as tv_models

        module: nn.Module = tv_models.resnet50(weights=None)
    elif arch == "tiny":
        module = TinyBackbone()
    else:
        raise ModelConfigError(
            f"checkpoint {path} names unknown architecture {arch!r}"
        )
    try:
        module.load_state_dict(payload["state_dict"])
    except RuntimeError as exc:
        raise ModelConfigError(
            f"checkpoint {path} does not match architecture {arch!r}: {exc}"
        ) from None
    return StageExtractor(arch, module)


def save_checkpoint(extractor: StageExtractor, path: str | Path) -> None:
    """Persist an extractor as a self-describing checkpoint."""
    torch.save(
        {"arch": extractor.name, "state_dict": extractor.module.state_dict()},
        Path(path),
    )
