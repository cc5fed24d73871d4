import dataclasses

import numpy as np
import pytest

from conedrive.mission.corpus import load_corpus, make_corpus
from conedrive.scenario import reference_slalom
from conedrive.vision.cnn import (
    LABEL_CONE,
    ClassifierConfig,
    cnn_train,
    crop_to_input,
    scores_batch,
)
from conedrive.vision.metrics import roc_and_operating_point


def operating_threshold(weights, samples, max_fpr=0.05) -> float:
    """ROC operating point of a trained model over labelled crops."""
    inputs = np.stack([crop_to_input(s.image) for s in samples])
    scores = scores_batch(weights, inputs)
    scored = [(float(s), sample.label == LABEL_CONE) for s, sample in zip(scores, samples)]
    return roc_and_operating_point(scored, max_fpr=max_fpr).operating_threshold


def with_threshold(scenario, threshold: float):
    classifier = dataclasses.replace(scenario.classifier, threshold=threshold)
    return dataclasses.replace(scenario, classifier=classifier)


@pytest.fixture(scope="session")
def corpora(tmp_path_factory):
    """Small train/test corpora shared by the vision and pipeline tests."""
    root = tmp_path_factory.mktemp("corpora")
    make_corpus(root / "train", 600, seed=101)
    make_corpus(root / "test", 150, seed=902, light_range=(0.5, 1.35))
    return {
        "train_dir": root / "train",
        "test_dir": root / "test",
        "train": load_corpus(root / "train"),
        "test": load_corpus(root / "test"),
    }


def split_corpus(samples, fraction=0.8, seed=0):
    """Seeded label-mixing split into (fit, validation) parts."""
    order = np.random.default_rng(seed).permutation(len(samples))
    cut = int(fraction * len(samples))
    return [samples[i] for i in order[:cut]], [samples[i] for i in order[cut:]]


@pytest.fixture(scope="session")
def quick_weights(corpora):
    """A lightly trained CNN good enough for closed-loop tests; trained on
    80% of the session corpus so the rest can pick the operating point."""
    fit, _ = split_corpus(corpora["train"])
    cfg = ClassifierConfig(iterations=1200, rng_seed=7)
    weights, losses = cnn_train(cfg, fit)
    assert losses[-1] < losses[0]
    return weights


@pytest.fixture(scope="session")
def quick_threshold(corpora, quick_weights):
    _, validation = split_corpus(corpora["train"])
    return operating_threshold(quick_weights, validation, max_fpr=0.05)


@pytest.fixture()
def reference():
    return reference_slalom()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
