"""Acceptance suite: every release criterion as one test, with a PASS line.

The classifier criteria train the default network for real, so this module
is the slow part of the suite (several minutes). Everything is seeded and
deterministic on one machine.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from conedrive.geometry import Pose2D
from conedrive.mission.corpus import load_corpus, make_corpus
from conedrive.mission.pipeline import MODE_MANUAL, Mission
from conedrive.mission.runner import run_mission
from conedrive.planner import order_and_sides
from conedrive.scenario import (
    MissionConfig,
    REFERENCE_LIDAR,
    Scenario,
    make_cone,
    reference_slalom,
)
from conedrive.sim.lidar import expected_hits, scan
from conedrive.vision.cnn import (
    LABEL_CONE,
    ClassifierConfig,
    cnn_train,
    crop_to_input,
    init_weights,
    loss_and_grads,
    scores_batch,
)
from conedrive.vision.baselines import colour_score, triangle_score
from conedrive.vision.metrics import (
    CnnClassifier,
    PrefilteredCnn,
    evaluate,
    roc_and_operating_point,
)
from tests.conftest import operating_threshold, split_corpus, with_threshold


def ok(message: str) -> None:
    print(f"\n[PASS] {message}")


@pytest.fixture(scope="module")
def acceptance_corpora(tmp_path_factory):
    """4,000-crop training corpus plus a 700-crop held-out corpus generated
    with a different seed and light range."""
    root = tmp_path_factory.mktemp("acceptance")
    t0 = time.perf_counter()
    make_corpus(root / "train", 2000, seed=11, light_range=(0.6, 1.25))
    make_corpus(root / "test", 350, seed=47, light_range=(0.5, 1.35))
    gen_seconds = time.perf_counter() - t0
    return {
        "train": load_corpus(root / "train"),
        "test": load_corpus(root / "test"),
        "gen_seconds": gen_seconds,
    }


@pytest.fixture(scope="module")
def trained(acceptance_corpora):
    """The default classifier trained per the published schedule."""
    config = ClassifierConfig()  # 2000 iterations, batch 64, lr 0.001
    assert (config.iterations, config.batch_size, config.learning_rate) == (2000, 64, 1e-3)
    fit, validation = split_corpus(acceptance_corpora["train"], fraction=0.9, seed=3)
    t0 = time.perf_counter()
    weights, losses = cnn_train(config, fit)
    train_seconds = time.perf_counter() - t0
    threshold = operating_threshold(weights, validation, max_fpr=0.05)
    return {
        "weights": weights,
        "threshold": threshold,
        "train_seconds": train_seconds,
        "losses": losses,
    }


def corpus_rates(weights, samples, threshold):
    inputs = np.stack([crop_to_input(s.image) for s in samples])
    scores = scores_batch(weights, inputs)
    labels = np.array([s.label == LABEL_CONE for s in samples])
    predicted = scores >= threshold
    acc = float((predicted == labels).mean())
    fpr = float((predicted & ~labels).sum() / max((~labels).sum(), 1))
    tpr = float((predicted & labels).sum() / max(labels.sum(), 1))
    return acc, tpr, fpr


class TestClassifierAccuracy:
    def test_synthetic_corpus_classifier(self, acceptance_corpora, trained):
        """Default CNN on the synthetic corpus: accuracy >= 95%, FPR <= 5%
        on held-out crops from a different seed and light range."""
        acc, tpr, fpr = corpus_rates(
            trained["weights"], acceptance_corpora["test"], trained["threshold"]
        )
        runtime = acceptance_corpora["gen_seconds"] + trained["train_seconds"]
        assert acc >= 0.95, f"accuracy {acc:.3f}"
        assert fpr <= 0.05, f"FPR {fpr:.3f}"
        assert runtime <= 15 * 60, f"runtime {runtime:.0f}s"
        ok(
            f"classifier: accuracy {acc:.1%}, TPR {tpr:.1%}, FPR {fpr:.1%} "
            f"(threshold {trained['threshold']:.3f}, corpus+train {runtime:.0f}s <= 15min)"
        )


class TestRegularizationEffect:
    def test_l1_improves_held_out_accuracy(self, tmp_path):
        """Overparameterized config on a small noisy train corpus: held-out
        accuracy at lambda in {1e-4, 1e-3} beats lambda=0 by >= 2 points.

        The configuration below is the strongest overfitting regime found
        for this renderer (tiny noisy train set, flipped labels, cone-like
        negatives, heavy held-out noise). The lambda=1e-3 run improves
        held-out accuracy consistently, but the 2-point margin for both
        lambdas has not been reachable on synthetic crops; see the decisions
        ledger for the calibration record. The criterion is asserted as
        written rather than weakened.
        """
        make_corpus(tmp_path / "train", 100, seed=21, light_range=(0.7, 1.15), noise=60.0, hard=True, label_noise=0.1)
        make_corpus(tmp_path / "test", 250, seed=77, light_range=(0.55, 1.3), noise=60.0, hard=True)
        train = load_corpus(tmp_path / "train")
        test = load_corpus(tmp_path / "test")
        xs = np.stack([crop_to_input(s.image) for s in test])
        ys = np.array([s.label == LABEL_CONE for s in test])

        def held_out_accuracy(lam: float) -> float:
            cfg = ClassifierConfig(
                conv_layers=((16, 5, 1), (32, 3, 1)),
                fc_widths=(128,),
                l1_lambda=lam,
                iterations=2000,
                learning_rate=0.01,
                batch_size=32,
                rng_seed=13,
            )
            weights, _ = cnn_train(cfg, train)
            return float(((scores_batch(weights, xs) >= 0.5) == ys).mean())

        base = held_out_accuracy(0.0)
        acc4 = held_out_accuracy(1e-4)
        acc3 = held_out_accuracy(1e-3)
        summary = (
            f"held-out accuracy {base:.1%} (l=0), {acc4:.1%} (l=1e-4, "
            f"{100 * (acc4 - base):+.1f} pts), {acc3:.1%} (l=1e-3, {100 * (acc3 - base):+.1f} pts)"
        )
        assert acc4 - base >= 0.02 and acc3 - base >= 0.02, f"regularization gap < 2 points: {summary}"
        ok(f"regularization: {summary}")


class TestGradientOracle:
    def test_analytic_gradient_vs_central_differences(self):
        """Training gradient matches finite differences at 200 random
        coordinates to better than 1e-3 relative error."""
        config = ClassifierConfig()  # the real default architecture
        weights = init_weights(config, np.random.default_rng(42))
        data_rng = np.random.default_rng(1)
        x = data_rng.normal(0.0, 0.5, (4, 32, 32, 3))
        y = np.array([0, 1, 1, 0])
        _, grads = loss_and_grads(weights, x, y)

        coord_rng = np.random.default_rng(99)
        checked = 0
        worst = 0.0
        while checked < 200:
            li = int(coord_rng.integers(0, len(weights.arrays)))
            arr = weights.arrays[li]
            fi = int(coord_rng.integers(0, arr.size))
            orig = arr.flat[fi]
            if li % 2 == 0 and abs(orig) <= 1e-4:  # avoid the L1 kink
                continue
            h = 1e-6 * max(1.0, abs(orig))
            arr.flat[fi] = orig + h
            lp, _ = loss_and_grads(weights, x, y)
            arr.flat[fi] = orig - h
            lm, _ = loss_and_grads(weights, x, y)
            arr.flat[fi] = orig
            numeric = (lp - lm) / (2.0 * h)
            analytic = grads[li].flat[fi]
            rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
            worst = max(worst, rel)
            checked += 1
        assert worst < 1e-3
        ok(f"gradient oracle: 200 coordinates, max relative error {worst:.2e} < 1e-3")


class TestRocOracle:
    def test_exhaustive_threshold_enumeration(self):
        rng = np.random.default_rng(7)
        scored = [
            (float(np.clip(rng.normal(0.65 if label else 0.35, 0.2), 0, 1)), bool(label))
            for label in (rng.random(1000) < 0.5)
        ]
        curve = roc_and_operating_point(scored, max_fpr=0.05)

        # independent brute-force sweep
        values = sorted({s for s, _ in scored}) + [float("inf")]
        pos = [s for s, l in scored if l]
        neg = [s for s, l in scored if not l]
        points = []
        for t in values:
            points.append(
                (t, sum(1 for s in neg if s >= t) / len(neg), sum(1 for s in pos if s >= t) / len(pos))
            )
        best = None
        for t, fpr, tpr in points:
            if fpr <= 0.05:
                key = (tpr, -fpr, t)
                if best is None or key > best[0]:
                    best = (key, t)
        assert list(curve.points) == points
        assert curve.operating_threshold == best[1]
        ok(f"ROC oracle: 1000 samples, {len(points)} thresholds, exact match; op threshold {curve.operating_threshold:.4f}")


def lone_cone_scenario(distance):
    return Scenario(objects=(make_cone(distance, 0.0),), lidar=REFERENCE_LIDAR)


class TestLidarRange:
    def test_cone_at_38m_detected_45m_not(self):
        mission = Mission(lone_cone_scenario(38.0))
        mission.mode = MODE_MANUAL
        seen = 0
        for _ in range(10):
            mission.tick(0.1)
            seen = max(seen, mission.candidates_seen)
        assert seen >= 1, "no candidate for the cone at 38 m"

        far = Mission(lone_cone_scenario(45.0))
        far.mode = MODE_MANUAL
        for _ in range(10):
            far.tick(0.1)
        assert far.candidates_seen == 0, "candidate beyond the 38 m forward limit"
        ok(f"range claim: cone at 38 m yields candidates within 10 ticks ({seen}), at 45 m none")


class TestHitCountOracle:
    def test_expected_hits_matches_scan_exactly(self):
        rng = np.random.default_rng(1234)
        pose = Pose2D(0, 0, 0)
        for _ in range(50):
            d = float(rng.uniform(1.0, 40.0))
            cone = make_cone(d, 0.0)
            sc = Scenario(objects=(cone,), lidar=REFERENCE_LIDAR)
            n_scan = int((scan(sc, pose).hit_object == 0).sum())
            n_exp = expected_hits(cone, d, REFERENCE_LIDAR)
            assert n_exp == n_scan, f"distance {d:.3f}: {n_exp} != {n_scan}"
        counts = [
            expected_hits(make_cone(float(d), 0), float(d), REFERENCE_LIDAR)
            for d in np.linspace(1.0, 40.0, 200)
        ]
        assert all(a >= b for a, b in zip(counts, counts[1:]))
        ok(f"hit-count oracle: 50 random distances exact; counts {counts[0]} -> {counts[-1]} non-increasing")


class TestEndToEndSlalom:
    def test_reference_slalom(self, trained):
        scenario = with_threshold(reference_slalom(), trained["threshold"])
        t0 = time.perf_counter()
        result = run_mission(scenario, weights=trained["weights"], timeout=60.0)
        wall = time.perf_counter() - t0
        m = result.metrics

        assert result.completed, "did not reach the goal"
        assert m["matched_cones"] == 6, f"matched {m['matched_cones']}/6"
        assert m["false_cones"] == 0, f"{m['false_cones']} false cones"
        assert m["position_error_max"] <= 0.3
        assert m["min_clearance"] >= 1.0
        assert wall <= 60.0

        # path alternates sides around the mapped cones
        mission = result.mission
        ordered = order_and_sides(
            mission.cone_map.positions(), scenario.vehicle.start, scenario.planner
        )
        chain = [(scenario.vehicle.start.x, scenario.vehicle.start.y)] + [c for c, _ in ordered]
        for i, (cone, side) in enumerate(ordered):
            prev = np.array(chain[i])
            chord = np.array(cone) - prev
            normal = np.array([-chord[1], chord[0]]) / np.linalg.norm(chord)
            nearest = min(
                mission.path.points, key=lambda p: (p[0] - cone[0]) ** 2 + (p[1] - cone[1]) ** 2
            )
            assert math.copysign(1.0, float(np.dot(np.array(nearest) - np.array(cone), normal))) == side
        ok(
            f"end-to-end slalom: 6/6 cones (max err {m['position_error_max']:.2f} m), "
            f"0 false, clearance {m['min_clearance']:.2f} m, alternating sides, "
            f"{m['sim_time']:.0f} s sim in {wall:.0f} s wall"
        )


class TestDeadReckoningDegradation:
    def _final_error(self, encoder_noise, trained):
        scenario = with_threshold(reference_slalom(), trained["threshold"])
        scenario = dataclasses.replace(
            scenario,
            mission=MissionConfig(pose_source="dead_reckon", encoder_noise=encoder_noise, timeout=60.0),
        )
        result = run_mission(scenario, weights=trained["weights"], timeout=60.0)
        mission = result.mission
        return math.hypot(
            mission.truth.pose.x - mission.estimate.pose.x,
            mission.truth.pose.y - mission.estimate.pose.y,
        )

    def test_noise_strictly_degrades_estimate(self, trained):
        clean = self._final_error(0.0, trained)
        noisy = self._final_error(0.02, trained)
        assert clean < 1e-6, f"noise-free dead reckoning diverged: {clean}"
        assert noisy > clean
        ok(f"dead reckoning: noise-free final error {clean:.2e} m < 1e-6; 2% encoder noise -> {noisy:.3f} m")


class TestTimingOrdering:
    def test_colour_lt_triangle_lt_prefiltered_lt_cnn(self, acceptance_corpora, trained):
        corpus = acceptance_corpora["test"][:500]
        assert len(corpus) == 500
        weights = trained["weights"]

        colour = evaluate(lambda img: colour_score(img), corpus).mean_ms
        triangle = evaluate(lambda img: 1.0 if triangle_score(img).match else 0.0, corpus).mean_ms
        prefiltered = evaluate(PrefilteredCnn(weights), corpus).mean_ms
        cnn = evaluate(CnnClassifier(weights), corpus).mean_ms

        assert colour < triangle < prefiltered < cnn, (
            f"colour {colour:.3f}, triangle {triangle:.3f}, prefiltered {prefiltered:.3f}, cnn {cnn:.3f}"
        )
        ok(
            f"timing: colour {colour:.3f} < triangle {triangle:.3f} < "
            f"prefiltered {prefiltered:.3f} < cnn {cnn:.3f} ms/image"
        )


class TestDeterminism:
    def test_byte_identical_run_logs(self, trained):
        scenario = with_threshold(reference_slalom(), trained["threshold"])
        a = run_mission(scenario, weights=trained["weights"], timeout=60.0)
        b = run_mission(scenario, weights=trained["weights"], timeout=60.0)
        blob_a = "\n".join(a.log_lines).encode()
        blob_b = "\n".join(b.log_lines).encode()
        assert blob_a == blob_b
        ok(f"determinism: two headless runs, {len(a.log_lines)} log lines byte-identical")
