"""Headless fixed-step mission runs, run logs and the metrics report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from conedrive.mission.pipeline import MODE_AUTONOMOUS, Mission
from conedrive.scenario import Scenario
from conedrive.vision.cnn import ModelWeights

EXIT_OK = 0
EXIT_BAD_SCENARIO = 2
EXIT_TIMEOUT = 3


@dataclass
class RunResult:
    mission: Mission
    log_lines: list[str]
    metrics: dict

    @property
    def completed(self) -> bool:
        return self.mission.completed

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.completed else EXIT_TIMEOUT


def run_mission(
    scenario: Scenario,
    weights: ModelWeights | None = None,
    mode: str = MODE_AUTONOMOUS,
    timeout: float | None = None,
) -> RunResult:
    """Run a scenario to goal or timeout at the configured tick rate."""
    mission = Mission(scenario, weights=weights)
    mission.mode = mode
    dt = 1.0 / scenario.mission.tick_rate
    limit = timeout if timeout is not None else scenario.mission.timeout

    log_lines = []
    while mission.t < limit and not mission.completed:
        mission.tick(dt)
        entry = {
            "t": round(mission.t, 6),
            "x": mission.truth.pose.x,
            "y": mission.truth.pose.y,
            "theta": mission.truth.pose.theta,
            "steer": mission._last_steer,
            "v": mission._last_speed,
        }
        log_lines.append(json.dumps(entry, sort_keys=True))

    return RunResult(mission=mission, log_lines=log_lines, metrics=build_metrics(mission))


def build_metrics(mission: Mission) -> dict:
    """Mission-level report: mapping quality, detection ranges, clearance."""
    scenario = mission.scenario
    true_cones = [obj.position for obj in scenario.objects if obj.kind == "cone"]
    mapped = mission.cone_map.cones

    position_errors = []
    matched_truth = set()
    false_cones = 0
    for cone in mapped:
        errs = [
            (math.hypot(cone.x - tx, cone.y - ty), i) for i, (tx, ty) in enumerate(true_cones)
        ]
        if errs:
            err, idx = min(errs)
        else:
            err, idx = math.inf, -1
        if err <= 1.0:
            position_errors.append(err)
            matched_truth.add(idx)
        else:
            false_cones += 1

    min_clearance = math.inf
    for px, py in mission.driven:
        for tx, ty in true_cones:
            min_clearance = min(min_clearance, math.hypot(px - tx, py - ty))

    detection_ranges = [e["range"] for e in mission.detection_events]
    return {
        "completed": mission.completed,
        "sim_time": mission.t,
        "true_cones": len(true_cones),
        "mapped_cones": len(mapped),
        "matched_cones": len(matched_truth),
        "false_cones": false_cones,
        "position_error_max": max(position_errors) if position_errors else None,
        "position_error_mean": (sum(position_errors) / len(position_errors)) if position_errors else None,
        "min_clearance": None if math.isinf(min_clearance) else min_clearance,
        "detection_range_max": max(detection_ranges) if detection_ranges else None,
        "detection_range_min": min(detection_ranges) if detection_ranges else None,
        "classifier_calls": mission.classifier_calls,
        "candidates_seen": mission.candidates_seen,
        "path_version": mission.path.version,
        "error": mission.error,
    }


def write_run_log(result: RunResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in result.log_lines:
            fh.write(line + "\n")


def write_metrics(result: RunResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
