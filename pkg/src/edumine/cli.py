"""``edumine`` command line: ingest, synth, train, evaluate, predict.

Exit codes: 0 success, 1 runtime or data error, 2 usage or contract error.
Every command writes a ``<output>.manifest.json`` describing how it was run.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .dataset import FeatureTable, load_csv, save_csv
from .errors import ContractError, EdumineError
from .ingest import SessionRule, build_feature_table, read_event_log, write_event_log
from .metrics import (
    ClassificationReport,
    accuracy_table,
    classification_table,
    dumps_report,
    regression_table,
    report_record,
)
from .pipeline import (
    CLASSIFIERS,
    MODEL_LABELS,
    REGRESSORS,
    TrainConfig,
    dumps_snapshot,
    load_model,
    predictions_csv,
    task_of,
    train,
)
from .synth import SynthConfig, generate_dataset, generate_event_log, grades_of

log = logging.getLogger("edumine")

DEFAULT_SEED = 42


class UsageError(EdumineError):
    pass


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("EDUMINE_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"EDUMINE_SEED must be an integer, got {env!r}") from None


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _manifest(out_path, command, config, inputs, outputs, seed=None):
    record = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "tool": "edumine",
        "tool_version": __version__,
    }
    path = Path(str(out_path) + ".manifest.json")
    _write(path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


def _need_file(path):
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")


def _load_grades(path):
    table = load_csv(path)
    if table.ids is None:
        raise UsageError("grades file needs a student_id column")
    return grades_of(table)


def cmd_ingest(args):
    _need_file(args.log)
    parsed = read_event_log(args.log)
    grades = _load_grades(args.grades) if args.grades else None
    rule = SessionRule(args.max_gap)
    rows = build_feature_table(parsed.events, rule, grades)
    ids = [sid for sid, _ in rows]
    table = FeatureTable.from_rows([r for _, r in rows], ids)
    save_csv(table, args.out)
    _manifest(
        args.out,
        "ingest",
        {"max_gap": args.max_gap, "malformed_lines": parsed.malformed_count},
        [args.log] + ([args.grades] if args.grades else []),
        [args.out],
    )
    log.info("wrote %d students to %s", table.n, args.out)
    return 0


def cmd_synth(args):
    seed = _resolve_seed(args)
    cfg = SynthConfig(
        n_students=args.n,
        noise_sd=args.noise_sd,
        bad_fraction=args.bad_fraction,
        seed=seed,
        emit_events=args.events,
        missing_rows=args.missing_rows,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    rule = SessionRule(args.max_gap)
    table, truth = generate_dataset(cfg, rule)
    save_csv(table, out / "students.csv")
    _write(out / "truth.json", json.dumps(truth.to_dict(), sort_keys=True) + "\n")
    outputs += [out / "students.csv", out / "truth.json"]
    if args.events:
        events, expected, _ = generate_event_log(cfg, rule)
        with open(out / "events.log", "w", encoding="utf-8", newline="\n") as fh:
            write_event_log(events, fh)
        save_csv(expected, out / "expected.csv")
        grades = FeatureTable(
            [[float("nan")] * 14 + [v] for v in expected.etest], expected.ids
        )
        save_csv(grades, out / "grades.csv")
        outputs += [out / "events.log", out / "expected.csv", out / "grades.csv"]
    config = {
        "n_students": cfg.n_students,
        "noise_sd": cfg.noise_sd,
        "bad_fraction": cfg.bad_fraction,
        "events": cfg.emit_events,
        "missing_rows": cfg.missing_rows,
        "max_gap": args.max_gap,
    }
    _manifest(out / "synth", "synth", config, [], outputs, seed)
    return 0


def cmd_train(args):
    seed = _resolve_seed(args)
    if args.model is None:
        raise UsageError("--model is required")
    if task_of(args.model) != args.task:
        raise UsageError(f"model {args.model!r} does not fit task {args.task!r}")
    _need_file(args.data)
    cfg = TrainConfig(
        task=args.task,
        model=args.model,
        split=args.split,
        seed=seed,
        select_k=args.select_k,
        smote=args.smote,
        smote_k=args.smote_k,
        stratify=args.stratify,
        n_trees=args.n_trees,
        knn_k=args.knn_k,
    )
    table = load_csv(args.data)
    result = train(table, cfg)
    model_path = Path(args.model_out)
    report_json = Path(str(model_path) + ".report.json")
    report_txt = Path(str(model_path) + ".report.txt")
    _write(model_path, dumps_snapshot(result.snapshot))
    _write(report_json, dumps_report(result.record))
    _write(report_txt, result.text)
    outputs = [model_path, report_json, report_txt]
    if result.correlation is not None:
        corr_path = Path(str(model_path) + ".correlation.csv")
        result.correlation.to_csv(corr_path)
        outputs.append(corr_path)
    _manifest(model_path, "train", result.snapshot["config"], [args.data], outputs, seed)
    sys.stdout.write(result.text)
    return 0


def cmd_evaluate(args):
    _need_file(args.snapshot)
    _need_file(args.data)
    model = load_model(args.snapshot)
    table = load_csv(args.data)
    rep = model.evaluate(table)
    label = MODEL_LABELS[model.name]
    record = report_record(model.name, model.task, model.snapshot["config"].get("seed"), rep,
                           n=int(table.n))
    if isinstance(rep, ClassificationReport):
        text = accuracy_table([(label, rep)]) + "\n" + classification_table([(label, rep)])
    else:
        text = regression_table([(label, rep)])
    out = args.out or str(args.snapshot) + ".eval.json"
    _write(out, dumps_report(record))
    _manifest(out, "evaluate", {}, [args.snapshot, args.data], [out])
    sys.stdout.write(text)
    return 0


def cmd_predict(args):
    _need_file(args.snapshot)
    _need_file(args.data)
    model = load_model(args.snapshot)
    table = load_csv(args.data)
    pred, proba = model.predict(table)
    ids = table.ids if table.ids is not None else [str(i) for i in range(table.n)]
    _write(args.out, predictions_csv(ids, pred, proba, model.task))
    _manifest(args.out, "predict", {}, [args.snapshot, args.data], [args.out])
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="edumine", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"edumine {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="aggregate an event log into a feature CSV")
    s.add_argument("log")
    s.add_argument("out")
    s.add_argument("--max-gap", type=float, default=600.0, help="seconds (default 600)")
    s.add_argument("--grades", help="CSV with student_id and etest columns")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("synth", help="generate a synthetic cohort")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--bad-fraction", type=float, default=0.07)
    s.add_argument("--noise-sd", type=float, default=SynthConfig.noise_sd)
    s.add_argument("--missing-rows", type=int, default=0)
    s.add_argument("--max-gap", type=float, default=600.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--events", action="store_true", help="also write a raw event log")
    s.add_argument("--out", default="synth_out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="fit and evaluate one model")
    s.add_argument("--task", choices=["classify", "regress"], required=True)
    s.add_argument("--model", choices=REGRESSORS + CLASSIFIERS)
    s.add_argument("--split", type=float, default=0.8)
    s.add_argument("--seed", type=int)
    s.add_argument("--select-k", type=int)
    s.add_argument("--smote", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--smote-k", type=int, default=5)
    s.add_argument("--stratify", action="store_true")
    s.add_argument("--n-trees", type=int, default=100)
    s.add_argument("--knn-k", type=int, default=5)
    s.add_argument("data")
    s.add_argument("model_out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score a saved model on a labelled CSV")
    s.add_argument("snapshot")
    s.add_argument("data")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("predict", help="per-student predictions from a saved model")
    s.add_argument("snapshot")
    s.add_argument("data")
    s.add_argument("out")
    s.set_defaults(func=cmd_predict)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ContractError) as exc:
        print(f"edumine: error: {exc}", file=sys.stderr)
        return 2
    except (EdumineError, OSError, ValueError) as exc:
        print(f"edumine: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
