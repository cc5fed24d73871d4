"""ROC analysis, confusion metrics and the classifier comparison harness."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from conedrive.vision.baselines import ColourConfig, TriangleConfig, colour_score, triangle_score
from conedrive.vision.cnn import LABEL_CONE, CropSample, ModelWeights, cnn_forward
from conedrive.vision.colorspace import rgb_to_lab


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else 0.0

    @property
    def fpr(self) -> float:
        neg = self.fp + self.tn
        return self.fp / neg if neg else 0.0


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float, float], ...]  # (threshold, fpr, tpr), sorted by threshold
    operating_threshold: float

    def auc(self) -> float:
        pts = sorted((fpr, tpr) for _, fpr, tpr in self.points)
        fprs = np.array([p[0] for p in pts])
        tprs = np.array([p[1] for p in pts])
        return float(np.trapezoid(tprs, fprs))


def roc_and_operating_point(
    scores: list[tuple[float, bool]], max_fpr: float = 0.05
) -> RocCurve:
    """Threshold sweep over every distinct score (classification: score >= t).

    The operating threshold maximizes TPR subject to FPR <= max_fpr, with
    ties broken toward lower FPR and then toward the higher threshold.
    """
    labels = np.array([bool(lab) for _, lab in scores])
    values = np.array([float(s) for s, _ in scores])
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both positive and negative samples")

    thresholds = np.concatenate([np.unique(values), [np.inf]])
    points = []
    for t in thresholds:
        predicted = values >= t
        tp = int((predicted & labels).sum())
        fp = int((predicted & ~labels).sum())
        points.append((float(t), fp / n_neg, tp / n_pos))

    best = None
    for t, fpr, tpr in points:
        if fpr <= max_fpr:
            key = (tpr, -fpr, t)
            if best is None or key > best[0]:
                best = (key, t)
    return RocCurve(points=tuple(points), operating_threshold=float(best[1]))


@dataclass
class EvalReport:
    counts: ConfusionCounts
    mean_ms: float

    @property
    def accuracy(self) -> float:
        return self.counts.accuracy

    @property
    def tpr(self) -> float:
        return self.counts.tpr

    @property
    def fpr(self) -> float:
        return self.counts.fpr

    def to_json(self) -> dict:
        return {
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp, "tn": self.counts.tn, "fn": self.counts.fn},
            "accuracy": self.accuracy,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "mean_ms": self.mean_ms,
        }


def evaluate(classifier, corpus: list[CropSample], threshold: float = 0.5) -> EvalReport:
    """Score every crop, count the confusion matrix and time the classifier."""
    if not corpus:
        raise ValueError("empty corpus")
    tp = fp = tn = fn = 0
    elapsed = 0.0
    for sample in corpus:
        t0 = time.perf_counter()
        score = classifier(sample.image)
        elapsed += time.perf_counter() - t0
        positive = score >= threshold
        actual = sample.label == LABEL_CONE
        if positive and actual:
            tp += 1
        elif positive and not actual:
            fp += 1
        elif not positive and actual:
            fn += 1
        else:
            tn += 1
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    return EvalReport(counts=counts, mean_ms=1000.0 * elapsed / len(corpus))


class CnnClassifier:
    """CNN scorer over RGB crops, counting forward invocations."""

    def __init__(self, weights: ModelWeights):
        self.weights = weights
        self.calls = 0

    def __call__(self, crop_rgb: np.ndarray) -> float:
        self.calls += 1
        return cnn_forward(self.weights, rgb_to_lab(crop_rgb))


class PrefilteredCnn:
    """Colour/triangle gate in front of the CNN.

    Crops failing both cheap checks score 0 without touching the network;
    everything else is passed through unchanged.
    """

    def __init__(
        self,
        weights: ModelWeights,
        colour_cfg: ColourConfig = ColourConfig(),
        triangle_cfg: TriangleConfig = TriangleConfig(),
    ):
        self.weights = weights
        self.colour_cfg = colour_cfg
        self.triangle_cfg = triangle_cfg
        self.cnn_calls = 0

    def __call__(self, crop_rgb: np.ndarray) -> float:
        if colour_score(crop_rgb, self.colour_cfg) < self.colour_cfg.threshold:
            if not triangle_score(crop_rgb, self.triangle_cfg).match:
                return 0.0
        self.cnn_calls += 1
        return cnn_forward(self.weights, rgb_to_lab(crop_rgb))
