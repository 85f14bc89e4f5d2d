"""texlens: explain CNN predictions on abstract imagery by mapping
saliency-selected deep features onto an interpretable texture vocabulary.

The engine consumes exported network activations (``.txa`` tensors plus a
dataset manifest), finds each sample's most salient location across five
network stages, extracts the deep-feature vector there, and then answers
two questions: which interpretable texture samples/classes lie nearest in
feature space, and which texture classes correlate — positively or
negatively — with the per-class target value (CPS).
"""

from .correlate import (
    BatchProfiles,
    BatchSimilarityMatrix,
    CorrelationReport,
    CpsVector,
    TextureScore,
    batch_similarity,
    batch_texture_profiles,
    cosine,
    texture_cps_correlations,
    znorm,
)
from .encoder import standin_encoder
from .errors import (
    ConfigError,
    CorruptionError,
    DegenerateInputError,
    FormatError,
    SchemaError,
    TexlensError,
    UsageError,
    ValidationError,
)
from .exchange import (
    ActivationSet,
    DatasetManifest,
    build_manifest,
    load_activation_set,
    load_manifest,
    load_tensor,
    read_tensor,
    save_tensor,
    write_manifest,
    write_tensor,
)
from .metric import (
    Neighbor,
    NeighborIndex,
    RelevanceMatrix,
    build_index,
    class_mean_distance,
    distance,
    knn,
    relevance_matrix,
    texture_relevance,
)
from .pipeline import RunConfig, compute_features, run_batchsim, run_correlate, run_retrieve
from .saliency import (
    FeatureVector,
    combine_maps,
    extract_feature,
    normalize_map,
    salient_location,
    smoe_statistic,
)
from .synth import (
    MaterialSpec,
    TextureSpec,
    gen_material_dataset,
    gen_texture,
    gen_texture_dataset,
    planted_material_spec,
    synth_dataset,
    write_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationSet",
    "BatchProfiles",
    "BatchSimilarityMatrix",
    "ConfigError",
    "CorrelationReport",
    "CorruptionError",
    "CpsVector",
    "DatasetManifest",
    "DegenerateInputError",
    "FeatureVector",
    "FormatError",
    "MaterialSpec",
    "Neighbor",
    "NeighborIndex",
    "RelevanceMatrix",
    "RunConfig",
    "SchemaError",
    "TexlensError",
    "TextureScore",
    "TextureSpec",
    "UsageError",
    "ValidationError",
    "batch_similarity",
    "batch_texture_profiles",
    "build_index",
    "build_manifest",
    "class_mean_distance",
    "combine_maps",
    "compute_features",
    "cosine",
    "distance",
    "extract_feature",
    "gen_material_dataset",
    "gen_texture",
    "gen_texture_dataset",
    "knn",
    "load_activation_set",
    "load_manifest",
    "load_tensor",
    "normalize_map",
    "planted_material_spec",
    "read_tensor",
    "relevance_matrix",
    "run_batchsim",
    "run_correlate",
    "run_retrieve",
    "salient_location",
    "save_tensor",
    "smoe_statistic",
    "standin_encoder",
    "synth_dataset",
    "texture_cps_correlations",
    "texture_relevance",
    "write_dataset",
    "write_manifest",
    "write_tensor",
    "znorm",
]
