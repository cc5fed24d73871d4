"""Command-line entry points: run, corpus, train, eval, roc."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from conedrive.mission.corpus import load_corpus, make_corpus
from conedrive.mission.pipeline import MODE_AUTONOMOUS, MODE_MANUAL, Mission
from conedrive.mission.runner import (
    EXIT_BAD_SCENARIO,
    run_mission,
    write_metrics,
    write_run_log,
)
from conedrive.scenario import Scenario, ScenarioError, load_scenario
from conedrive.vision.cnn import (
    ClassifierConfig,
    cnn_train,
    load_weights,
    save_weights,
)
from conedrive.vision.metrics import (
    CnnClassifier,
    PrefilteredCnn,
    evaluate,
    roc_and_operating_point,
)
from conedrive.vision.baselines import colour_score, triangle_score
from conedrive.vision.cnn import LABEL_CONE, crop_to_input
from conedrive.vision.cnn import scores_batch

import numpy as np


def _load_scenario_or_exit(path: str) -> Scenario:
    try:
        return load_scenario(path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(EXIT_BAD_SCENARIO)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load_scenario_or_exit(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, rng_seed=args.seed)
    weights = load_weights(args.weights) if args.weights else None
    if weights is None and scenario.classifier.weights_path:
        weights = load_weights(scenario.classifier.weights_path)

    if args.serve is not None:
        import uvicorn

        from conedrive.mission.server import MissionRuntime, create_app

        mission = Mission(scenario, weights=weights)
        mission.mode = args.mode
        runtime = MissionRuntime(mission, realtime=True)
        console = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        app = create_app(runtime, console_dir=console if console.is_dir() else None)
        uvicorn.run(app, host="127.0.0.1", port=args.serve, log_level="warning")
        return 0

    result = run_mission(scenario, weights=weights, mode=args.mode, timeout=args.timeout)
    if args.log_out:
        write_run_log(result, args.log_out)
    if args.metrics_out:
        write_metrics(result, args.metrics_out)
    m = result.metrics
    print(
        f"completed={m['completed']} sim_time={m['sim_time']:.1f}s "
        f"mapped={m['mapped_cones']}/{m['true_cones']} false={m['false_cones']}"
    )
    return result.exit_code


def _cmd_corpus(args: argparse.Namespace) -> int:
    scenario = _load_scenario_or_exit(args.scenario) if args.scenario else None
    out = make_corpus(
        args.out,
        args.n,
        args.seed,
        base_scenario=scenario,
        light_range=(args.light_lo, args.light_hi),
        noise=args.noise,
    )
    print(f"wrote {2 * args.n} crops to {out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg_dict = json.load(fh)
        cfg_dict["conv_layers"] = tuple(tuple(c) for c in cfg_dict.get("conv_layers", ((8, 5, 1), (16, 3, 1))))
        cfg_dict["fc_widths"] = tuple(cfg_dict.get("fc_widths", (64,)))
        config = ClassifierConfig(**cfg_dict)
    else:
        config = ClassifierConfig()
    weights, losses = cnn_train(config, corpus)
    save_weights(weights, args.weights_out)
    print(f"trained {config.iterations} iterations, final loss {losses[-1]:.4f} -> {args.weights_out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_weights(args.weights)
    report = {
        "colour": evaluate(lambda img: colour_score(img), corpus, threshold=0.10).to_json(),
        "triangle": evaluate(lambda img: 1.0 if triangle_score(img).match else 0.0, corpus).to_json(),
        "cnn": evaluate(CnnClassifier(weights), corpus, threshold=args.threshold).to_json(),
        "prefiltered_cnn": evaluate(PrefilteredCnn(weights), corpus, threshold=args.threshold).to_json(),
    }
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, rep in report.items():
        print(
            f"{name:16s} acc={rep['accuracy']:.3f} tpr={rep['tpr']:.3f} "
            f"fpr={rep['fpr']:.3f} mean_ms={rep['mean_ms']:.3f}"
        )
    return 0


def _cmd_roc(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    weights = load_weights(args.weights)
    inputs = np.stack([crop_to_input(s.image) for s in corpus])
    scores = scores_batch(weights, inputs)
    scored = [(float(s), sample.label == LABEL_CONE) for s, sample in zip(scores, corpus)]
    curve = roc_and_operating_point(scored, max_fpr=args.max_fpr)
    doc = {
        "operating_threshold": curve.operating_threshold,
        "auc": curve.auc(),
        "points": [[t if t != float("inf") else None, fpr, tpr] for t, fpr, tpr in curve.points],
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(f"AUC={doc['auc']:.4f} operating_threshold={doc['operating_threshold']:.4f} (max FPR {args.max_fpr})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conedrive", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario headless or with the live server")
    run.add_argument("--scenario", required=True)
    run.add_argument("--headless", action="store_true", help="no server; run to goal/timeout")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--mode", choices=[MODE_MANUAL, MODE_AUTONOMOUS], default=MODE_AUTONOMOUS)
    run.add_argument("--metrics-out", default=None)
    run.add_argument("--log-out", default=None)
    run.add_argument("--weights", default=None)
    run.add_argument("--timeout", type=float, default=None, help="sim-time limit in seconds")
    run.add_argument("--serve", type=int, default=None, metavar="PORT")
    run.set_defaults(func=_cmd_run)

    corpus = sub.add_parser("corpus", help="generate a labelled crop corpus")
    corpus.add_argument("--out", required=True)
    corpus.add_argument("--n", type=int, required=True, help="crops per class")
    corpus.add_argument("--seed", type=int, required=True)
    corpus.add_argument("--scenario", default=None)
    corpus.add_argument("--light-lo", type=float, default=0.6)
    corpus.add_argument("--light-hi", type=float, default=1.25)
    corpus.add_argument("--noise", type=float, default=8.0)
    corpus.set_defaults(func=_cmd_corpus)

    train = sub.add_parser("train", help="train the classifier on a corpus")
    train.add_argument("--corpus", required=True)
    train.add_argument("--config", default=None, help="JSON ClassifierConfig overrides")
    train.add_argument("--weights-out", required=True)
    train.set_defaults(func=_cmd_train)

    ev = sub.add_parser("eval", help="evaluate all classifiers on a corpus")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--weights", required=True)
    ev.add_argument("--report", required=True)
    ev.add_argument("--threshold", type=float, default=0.5)
    ev.set_defaults(func=_cmd_eval)

    roc = sub.add_parser("roc", help="ROC curve and operating point for trained weights")
    roc.add_argument("--corpus", required=True)
    roc.add_argument("--weights", required=True)
    roc.add_argument("--max-fpr", type=float, default=0.05)
    roc.add_argument("--out", default=None)
    roc.set_defaults(func=_cmd_roc)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
