"""Low-rank transform learning for subspace clustering and classification."""
from .classify import (
                   ClassifierModel,
                   classify_point,
                   evaluate_accuracy,
                   train_classifier,
)
from .cluster import ClustererSpec, ClusteringResult, lrsc, misclassification_rate, rssc
from .data import (
                   LabeledDataset,
                   SyntheticSpec,
                   generate_synthetic,
                   load_matrix,
                   rms_deviation,
                   save_matrix,
                   split_dataset,
                   three_lines,
                   two_lines,
)
from .decomp import omp, rpca
from .errors import (
                   DegenerateGeometryError,
                   DimensionError,
                   LRTError,
                   MatrixFormatError,
                   NumericalError,
                   ParameterError,
                   SingularityError,
)
from .learn import (
                   LearnConfig,
                   TransformModel,
                   learn,
                   learn_global,
                   learn_online,
                   learn_per_class,
                   per_class_nuclear_norms,
)
from .linalg import (
                   nuclear_norm,
                   nuclear_subdifferential,
                   smallest_principal_angle,
                   spectral_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierModel",
    "ClustererSpec",
    "ClusteringResult",
    "DegenerateGeometryError",
    "DimensionError",
    "LRTError",
    "LabeledDataset",
    "LearnConfig",
    "MatrixFormatError",
    "NumericalError",
    "ParameterError",
    "SingularityError",
    "SyntheticSpec",
    "TransformModel",
    "classify_point",
    "evaluate_accuracy",
    "generate_synthetic",
    "learn",
    "learn_global",
    "learn_online",
    "learn_per_class",
    "load_matrix",
    "lrsc",
    "misclassification_rate",
    "nuclear_norm",
    "nuclear_subdifferential",
    "omp",
    "per_class_nuclear_norms",
    "rms_deviation",
    "rpca",
    "rssc",
    "save_matrix",
    "smallest_principal_angle",
    "spectral_norm",
    "split_dataset",
    "three_lines",
    "train_classifier",
    "two_lines",
]
