"""Command-line entry point: simulate, featurize, train, evaluate, predict."""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .features import feature_matrix, write_feature_csv
from .metrics import evaluate, score_flights
from .modelfile import ModelFormatError, load_model, save_model
from .pipeline import MODEL_KINDS, detector_kind, make_detector
from .recording import RecordingError, load_dataset_manifest, parse_flight_csv
from .simulator import generate_dataset, load_config

log = logging.getLogger("gnss_rfi")


class CommandError(Exception):
    pass


def cmd_simulate(args) -> int:
    if args.config is not None and not Path(args.config).is_file():
        raise CommandError(f"config file not found: {args.config}")
    try:
        config = load_config(args.config, seed=args.seed, n_flights=args.n_flights,
                             jam_prevalence=args.prevalence)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    dataset = generate_dataset(config, args.out)
    lengths = [r.n_epochs for r in dataset]
    jammed = int(dataset.labels.sum())
    print(f"flights={len(dataset)} jammed={jammed} prevalence={dataset.prevalence:.4f} "
          f"mean_T={np.mean(lengths):.1f}")
    print(f"manifest: {dataset.manifest_path}")
    return 0


def cmd_featurize(args) -> int:
    dataset = load_dataset_manifest(args.manifest)
    X = feature_matrix(dataset)
    write_feature_csv(args.out, dataset.flight_ids, dataset.labels, X)
    print(f"wrote {X.shape[0]} x {X.shape[1]} feature matrix to {args.out}")
    return 0


def _hyper(args) -> dict:
    hyper = {
        "n_trees": args.n_trees,
        "learning_rate": args.learning_rate,
        "max_leaves": args.max_leaves,
        "min_samples_leaf": args.min_samples_leaf,
        "max_iter": args.max_iters,
        "tol": args.tol,
        "threshold": args.threshold,
        "seed": args.seed,
    }
    if args.l2 is not None:
        hyper["l2"] = args.l2
        hyper["l2_leaf"] = args.l2
    if args.normal_only:
        hyper["normal_only"] = True
    return {k: v for k, v in hyper.items() if v is not None}


def cmd_train(args) -> int:
    dataset = load_dataset_manifest(args.manifest)
    model = make_detector(args.model_kind, **_hyper(args))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model.fit(list(dataset), dataset.labels)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.model_kind == "gbdt" and model[-1].degenerate_:
        print("warning: single-class training set; model has no trees", file=sys.stderr)
    digest = save_model(model, args.out)
    meta = _training_meta(model)
    print(f"kind={args.model_kind} flights={len(dataset)} prevalence={dataset.prevalence:.4f} "
          f"{meta} checksum={digest[:16]}")
    return 0


def _training_meta(model) -> str:
    kind = detector_kind(model)
    if kind == "range":
        return f"known_channels={int(model.known_.sum())}"
    clf = model[-1]
    if kind == "linear":
        return f"iterations={clf.n_iter_} grad_norm={clf.grad_norm_:.3g}"
    loss = clf.train_loss_[-1] if clf.train_loss_ else float("nan")
    return f"trees={len(clf.trees_)} train_loss={loss:.4g}"


def _apply_threshold(model, threshold):
    if threshold is None:
        return
    if detector_kind(model) == "range":
        raise CommandError("--threshold does not apply to range models")
    if not 0.0 < threshold < 1.0:
        raise CommandError("--threshold must be in (0, 1)")
    model[-1].threshold = threshold


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    _apply_threshold(model, args.threshold)
    dataset = load_dataset_manifest(args.manifest)
    report = evaluate(model, dataset)
    print(report.to_text())
    if args.report:
        report.write(args.report)
    if args.scores:
        scores, preds = score_flights(model, list(dataset))
        lines = ["flight_id,score,label,prediction"]
        lines += [f"{r.flight_id},{s!r},{r.label},{int(p)}"
                  for r, s, p in zip(dataset, scores.tolist(), preds)]
        Path(args.scores).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    _apply_threshold(model, args.threshold)
    rec = parse_flight_csv(args.flight)
    t0 = time.perf_counter()
    scores, preds = score_flights(model, [rec])
    log.debug("scored %s in %.4f s", rec.flight_id, time.perf_counter() - t0)
    print(f"{rec.flight_id},{float(scores[0])!r},{int(preds[0])}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnss-rfi", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic labeled flight dataset")
    p.add_argument("--config", help="key = value simulation config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-flights", type=int)
    p.add_argument("--prevalence", type=float)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("featurize", help="dump the 370-column feature matrix as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="fit a detector and write a model file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model-kind", required=True, choices=MODEL_KINDS)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--n-trees", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--max-leaves", type=int)
    p.add_argument("--min-samples-leaf", type=int)
    p.add_argument("--l2", type=float, help="logistic ridge or leaf-value ridge")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--normal-only", action="store_true",
                   help="range model: envelope from label-0 flights only")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a labeled dataset and report metrics")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", help="key=value report output")
    p.add_argument("--scores", help="per-flight score CSV output")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="score one flight CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--flight", required=True)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, RecordingError, ModelFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
