"""Class activation vector computation: Grad-CAM for CNNs, mask optimization for the LSTM."""

from .gradcam import (
    METHOD_GRADCAM,
    METHOD_MASK,
    ClassActivationVector,
    FeatureMapSet,
    explain_gradcam,
    gradcam_alphas,
    gradcam_vector,
    normalize_unit,
    resize_bilinear,
)
from .mask import (
    MaskConfig,
    MaskDivergedError,
    MaskTrace,
    apply_mask,
    dataset_mean_input,
    mask_objective,
    mask_objective_gradient,
    optimize_mask,
    optimize_mask_batch,
)
from .record import FORMAT_TAG, ExplanationRecord, read_record, write_record

__all__ = [
    "METHOD_GRADCAM",
    "METHOD_MASK",
    "ClassActivationVector",
    "FeatureMapSet",
    "explain_gradcam",
    "gradcam_alphas",
    "gradcam_vector",
    "normalize_unit",
    "resize_bilinear",
    "MaskConfig",
    "MaskDivergedError",
    "MaskTrace",
    "apply_mask",
    "dataset_mean_input",
    "mask_objective",
    "mask_objective_gradient",
    "optimize_mask",
    "optimize_mask_batch",
    "FORMAT_TAG",
    "ExplanationRecord",
    "read_record",
    "write_record",
]
