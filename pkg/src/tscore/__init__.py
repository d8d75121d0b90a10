"""Label-free evaluation and checkpoint selection for domain-adaptation runs."""

from .tensorio import (
    EpochPaths,
    EpochRecord,
    IngestionError,
    ManifestError,
    Run,
    RunManifest,
    TensorFormatError,
    TensorValueError,
    ValidationError,
    load_run,
    read_tensor,
    validate_record,
    write_manifest,
    write_run,
    write_tensor,
)
from .metrics import (
    HopkinsConfig,
    MetricReport,
    UniformityWarning,
    angle_matrix,
    entropy,
    hopkins_statistic,
    ideal_angle,
    mutual_information,
    transfer_score,
    uniformity,
)
from .selection import (
    ScoreSeries,
    SelectionConfig,
    SelectionResult,
    saturation_level,
    select_checkpoint,
)
from .baselines import (
    MmdConfig,
    ProbeConfig,
    a_distance_from_error,
    c_entropy,
    mmd,
    pearson,
    proxy_a_distance,
)
from .synth import (
    DomainSpec,
    LabeledDomain,
    ToyTrainConfig,
    generate_domain_pair,
    loss_and_gradients,
    train_toy_model,
)

__version__ = "0.1.0"

__all__ = [
    "EpochPaths",
    "EpochRecord",
    "IngestionError",
    "ManifestError",
    "Run",
    "RunManifest",
    "TensorFormatError",
    "TensorValueError",
    "ValidationError",
    "load_run",
    "read_tensor",
    "validate_record",
    "write_manifest",
    "write_run",
    "write_tensor",
    "HopkinsConfig",
    "MetricReport",
    "UniformityWarning",
    "angle_matrix",
    "entropy",
    "hopkins_statistic",
    "ideal_angle",
    "mutual_information",
    "transfer_score",
    "uniformity",
    "ScoreSeries",
    "SelectionConfig",
    "SelectionResult",
    "saturation_level",
    "select_checkpoint",
    "MmdConfig",
    "ProbeConfig",
    "a_distance_from_error",
    "c_entropy",
    "mmd",
    "pearson",
    "proxy_a_distance",
    "DomainSpec",
    "LabeledDomain",
    "ToyTrainConfig",
    "generate_domain_pair",
    "loss_and_gradients",
    "train_toy_model",
    "__version__",
]
