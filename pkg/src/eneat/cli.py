"""Command-line entry point: features, train, evaluate, predict, protocol."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .dataset import TableFormatError, dumps_csv, read_csv
from .ensemble import (
    EnsembleModel,
    ModelFormatError,
    dumps_model,
    evaluate_ensemble,
    load_model,
    predict_batch,
    train_ensemble,
)
from .metrics import format_percent, relative_gain, summary_table
from .protocol import run_protocol, summarize
from .segments import SegmentFileError, featurize, read_segments

log = logging.getLogger("eneat")


class UserError(Exception):
    """Bad input from the command line; reported with exit code 2."""


def atomic_write(path, text: str) -> None:
    """Write to a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble, master_seed=args.seed))
    return cfg


def _open_model(path) -> EnsembleModel:
    with open(path) as fh:
        return load_model(fh)


def _check_dimension(model: EnsembleModel, table, path) -> None:
    if table.feature_dimension != model.input_count:
        raise UserError(f"{path}: {table.feature_dimension} features, "
                        f"model expects {model.input_count}")


def cmd_features(args) -> int:
    cfg = _config(args)
    bands = args.bands.split(",") if args.bands else list(cfg.bands)
    levels = args.levels if args.levels is not None else cfg.levels
    with open(args.segments) as fh:
        segments = read_segments(fh, bands=bands)
    table = featurize(segments, bands=bands, levels=levels)
    atomic_write(args.out, dumps_csv(table))
    log.info("wrote %d rows x %d features to %s", len(table), table.feature_dimension, args.out)
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    train = read_csv(args.train)
    start = time.perf_counter()
    model = train_ensemble(cfg.ensemble, train, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    atomic_write(args.model, dumps_model(model))
    for i, m in enumerate(model.members):
        gens = len(m.report.generations) if m.report else 0
        wall = m.report.elapsed_seconds if m.report else 0.0
        print(f"member {i:2d}  seed={m.seed}  fitness={m.fitness:.6f}  "
              f"generations={gens}  wall={wall:.1f}s")
    print(f"trained {model.n_members} members in {elapsed:.1f}s -> {args.model}")
    return 0


def evaluation_report(names, evaluations, fmt: str = "text") -> str:
    """Per-model scores followed by a summary across the models (one model per round)."""
    sep = "," if fmt == "csv" else "  "
    lines = [sep.join(("model", "ensemble_bacc", "member_mean", "member_std", "member_baccs"))]
    for name, ev in zip(names, evaluations):
        lines.append(sep.join((
            name, f"{ev.balanced_accuracy:.6f}", f"{ev.member_mean:.6f}", f"{ev.member_std:.6f}",
            ";".join(f"{b:.6f}" for b in ev.member_balanced_accuracies),
        )))
    ens = summarize([ev.balanced_accuracy for ev in evaluations])
    mem = summarize([ev.member_mean for ev in evaluations])
    lines.append("")
    lines.append(summary_table([("e-NEAT", ens), ("members (mean)", mem)], fmt).rstrip("\n"))
    if not ens.std_defined:
        lines.append("# std undefined for a single round")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    test = read_csv(args.test)
    evaluations = []
    for path in args.models:
        model = _open_model(path)
        _check_dimension(model, test, args.test)
        evaluations.append(evaluate_ensemble(model, test, np.random.default_rng(args.seed)))
    report = evaluation_report([Path(p).name for p in args.models], evaluations, args.report_format)
    if args.baseline is not None:
        report += _gain_line(evaluations[0].balanced_accuracy if len(evaluations) == 1
                             else summarize([e.balanced_accuracy for e in evaluations]).mean,
                             args.baseline)
    _emit(report, args.out)
    return 0


def cmd_predict(args) -> int:
    model = _open_model(args.model)
    table = read_csv(args.features)
    _check_dimension(model, table, args.features)
    nf = predict_batch(model, table.features, np.random.default_rng(args.seed))
    rows = ["segment_id,label"]
    rows += [f"{sid},{'NF' if p else 'F'}" for sid, p in zip(table.segment_ids.tolist(), nf.tolist())]
    atomic_write(args.out, "\n".join(rows) + "\n")
    return 0


def _gain_line(score: float, baseline: float) -> str:
    # scores may be fractions or percentages; the baseline must use the same scale
    if baseline > 1.0 and score <= 1.0:
        score *= 100.0
    return f"relative_gain_vs_baseline={format_percent(relative_gain(score, baseline))}%\n"


def cmd_protocol(args) -> int:
    cfg = _config(args)
    train = read_csv(args.train)
    test = read_csv(args.test)
    if train.feature_dimension != test.feature_dimension:
        raise UserError("train and test tables differ in feature dimension")
    protocol = cfg.protocol
    if args.seed is not None:
        protocol = replace(protocol, prediction_seed=args.seed)
    result = run_protocol(protocol, cfg.ensemble, train, test, jobs=args.jobs)
    fmt = args.report_format
    report = result.detail_table(fmt) + "\n" + result.summary_table(fmt)
    if not result.std_defined:
        report += "# std undefined for a single round\n"
    if args.baseline is not None:
        report += _gain_line(result.ensemble_summary.mean, args.baseline)
    _emit(report, args.out)
    return 0


def _emit(report: str, out) -> None:
    if out:
        atomic_write(out, report)
    else:
        sys.stdout.write(report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eneat", description="Ensembles of NEAT networks for segment classification.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v progress, -vv per-generation detail")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_help="override ensemble.master_seed"):
        sp.add_argument("--config", help="key=value config file (defaults if omitted)")
        sp.add_argument("--seed", type=int, help=seed_help)

    sp = sub.add_parser("features", help="segment pixel file -> Haralick feature CSV")
    sp.add_argument("segments")
    sp.add_argument("out")
    sp.add_argument("--bands", help="comma-separated band names (default from config)")
    sp.add_argument("--levels", type=int, help="gray levels (default from config)")
    common(sp)
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("train", help="evolve an ensemble and write a model file")
    sp.add_argument("train")
    sp.add_argument("model")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="score one or more models (one per round) on a labeled CSV")
    sp.add_argument("models", nargs="+")
    sp.add_argument("--test", required=True)
    sp.add_argument("--out", help="report path (stdout if omitted)")
    sp.add_argument("--seed", type=int, default=0, help="tie-breaking seed")
    sp.add_argument("--baseline", type=float, help="baseline score for a relative-gain line")
    sp.add_argument("--report-format", choices=("text", "csv"), default="text")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("predict", help="write segment_id,label predictions")
    sp.add_argument("model")
    sp.add_argument("features")
    sp.add_argument("out")
    sp.add_argument("--seed", type=int, default=0, help="tie-breaking seed")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("protocol", help="multi-round train/evaluate with a summary table")
    sp.add_argument("train")
    sp.add_argument("test")
    sp.add_argument("--out", help="report path (stdout if omitted)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--baseline", type=float, help="baseline score for a relative-gain line")
    sp.add_argument("--report-format", choices=("text", "csv"), default="text")
    common(sp, seed_help="override protocol.prediction_seed")
    sp.set_defaults(func=cmd_protocol)
    return p


USER_ERRORS = (UserError, ConfigError, TableFormatError, SegmentFileError, ModelFormatError,
               FileNotFoundError, IsADirectoryError, PermissionError, KeyError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("eneat: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        for line in str(msg).splitlines() or [type(exc).__name__]:
            print(f"eneat: error: {line}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # validation failures inside the library are input problems too
        print(f"eneat: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.debug("internal error", exc_info=True)
        print(f"eneat: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
