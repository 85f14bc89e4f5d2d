"""actexport: run CNN backbones over image trees and export stage activations.

The package turns a directory of class-labelled images into the dataset
layout the texture-explanation engine consumes: five ``.txa`` activation
tensors per sample (stem pool plus four stage outputs) and a merged
``manifest.json`` describing semantic classes (with per-class scores) and
texture classes.
"""

from .export import ExportConfigError, ExportJob, ExportReport, run_export
from .manifest import ManifestError, read_cps_table
from .models import (
    ModelConfigError,
    StageExtractor,
    build_extractor,
    resolve_model_ref,
    save_checkpoint,
)
from .preprocess import PreprocessSpec, load_image_tensor
from .txa import TxaWriteError, encode_tensor, write_tensor

__all__ = [
    "ExportConfigError",
    "ExportJob",
    "ExportReport",
    "ManifestError",
    "ModelConfigError",
    "PreprocessSpec",
    "StageExtractor",
    "TxaWriteError",
    "build_extractor",
    "encode_tensor",
    "load_image_tensor",
    "read_cps_table",
    "resolve_model_ref",
    "run_export",
    "save_checkpoint",
    "write_tensor",
]

__version__ = "1.0.0"
