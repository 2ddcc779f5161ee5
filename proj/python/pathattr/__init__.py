"""Path-method feature attributions for differentiable models.

Integrated gradients, guided (adaptive-path) integrated gradients with
optional anchoring, vanilla gradients, a model-free edge detector, and
SmoothGrad averaging — plus the evaluation protocols used to compare them:
closed-path error experiments, ROC/AUC localization, and path diagnostics.
"""

from ._core import (
    Attribution,
    AucResult,
    ClosedPathReport,
    DirectionalProfile,
    Model,
    PathDiagnostics,
    PathTrace,
    auc_roc,
    builtin_model,
    bump_family,
    bumpy_mlp,
    closed_path_experiment,
    directional_profile,
    edge_detector,
    guided_ig,
    integrated_gradients,
    load_model,
    path_diagnostics,
    read_image_features,
    read_mask,
    resolve_baselines,
    smoothgrad,
    vanilla_gradients,
)

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "AucResult",
    "ClosedPathReport",
    "DirectionalProfile",
    "Model",
    "PathDiagnostics",
    "PathTrace",
    "auc_roc",
    "builtin_model",
    "bump_family",
    "bumpy_mlp",
    "closed_path_experiment",
    "directional_profile",
    "edge_detector",
    "guided_ig",
    "integrated_gradients",
    "load_model",
    "path_diagnostics",
    "read_image_features",
    "read_mask",
    "resolve_baselines",
    "smoothgrad",
    "vanilla_gradients",
    "__version__",
]
