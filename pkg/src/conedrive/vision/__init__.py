"""Visual cone classification: LAB conversion, colour and triangle
baselines, the small convolutional classifier and its evaluation harness."""

from conedrive.vision.colorspace import LabImage, lab_to_rgb, rgb_to_lab
from conedrive.vision.baselines import (
    ColourConfig,
    TriangleConfig,
    TriangleResult,
    colour_score,
    triangle_score,
)
from conedrive.vision.cnn import (
    ClassifierConfig,
    CropSample,
    ModelWeights,
    cnn_forward,
    cnn_train,
    load_weights,
    save_weights,
)
from conedrive.vision.metrics import (
    ConfusionCounts,
    EvalReport,
    PrefilteredCnn,
    RocCurve,
    evaluate,
    roc_and_operating_point,
)

__all__ = [
    "LabImage",
    "lab_to_rgb",
    "rgb_to_lab",
    "ColourConfig",
    "TriangleConfig",
    "TriangleResult",
    "colour_score",
    "triangle_score",
    "ClassifierConfig",
    "CropSample",
    "ModelWeights",
    "cnn_forward",
    "cnn_train",
    "load_weights",
    "save_weights",
    "ConfusionCounts",
    "EvalReport",
    "PrefilteredCnn",
    "RocCurve",
    "evaluate",
    "roc_and_operating_point",
]
