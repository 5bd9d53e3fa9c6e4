#!/usr/bin/env python3
"""
baroslip command line

Subcommands: simulate, train, eval, sweep, latency, compare, detect.
Exit codes: 0 success, 1 usage, 2 data error, 3 training divergence.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

import pandas as pd

from ..core.config_loader import ConfigurationLoader
from ..core.errors import BaroslipError, TrainingDivergenceError
from ..dataset.corpus_store import corpus_summary, load_corpus, save_corpus
from ..dataset.windowing import windows_from_corpus
from ..harness.latency import measure_latency
from ..harness.metrics import evaluate, sensitivity_table
from ..harness.reports import format_percent_table, write_report, write_table
from ..harness.sweep import DEFAULT_SWEEP_SIZES, compare_methods, trial_success_table, window_sweep
from ..harness.train_config import MODEL_KINDS, TrainConfig
from ..harness.trainer import prepare_splits, train
from ..models.model_store import load_model, save_model
from ..simulation.signal_generator import generate_corpus, generate_event_sequences
from ..stream.replay import replay, replay_stream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3


class UsageError(Exception):
    """Bad command line (exit code 1)"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _require_path(path: str, what: str) -> str:
    if path != "-" and not os.path.exists(path):
        raise UsageError(f"{what} '{path}' does not exist")
    return path


def _loader(args) -> ConfigurationLoader:
    return ConfigurationLoader(args.config_dir)


def _train_config(args) -> TrainConfig:
    loader = _loader(args)
    cfg = loader.train_config(_require_path(args.train_config, "Training config")) if getattr(args, "train_config", None) else loader.train_config()
    return cfg.with_overrides(
        epochs=getattr(args, "epochs", None),
        seed=getattr(args, "seed", None),
        T_k=getattr(args, "tk", None),
        model_kind=getattr(args, "model_kind", None),
    )


def _config_from_manifest(model, base: TrainConfig) -> TrainConfig:
    """TrainConfig reproducing the split a model was trained on"""
    manifest = model.training_manifest or {}
    fractions = manifest.get("split", [base.train_fraction, base.val_fraction, base.test_fraction])
    return base.with_overrides(
        seed=manifest.get("seed"),
        T_k=manifest.get("T_k", model.T_k),
        stride=manifest.get("stride"),
        train_fraction=fractions[0],
        val_fraction=fractions[1],
        test_fraction=fractions[2],
    )


# ---------------------------
# Subcommands
# ---------------------------

def cmd_simulate(args) -> int:
    loader = _loader(args)
    cfg = loader.sim_config(_require_path(args.config, "Simulator config")) if args.config else loader.sim_config()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    corpus = generate_corpus(cfg)
    save_corpus(corpus, args.out)
    logger.info("Slip-frame shares:\n" + format_percent_table(corpus_summary(corpus), digits=4))
    if args.events:
        events_dir = os.path.join(args.out, "events")
        save_corpus(generate_event_sequences(cfg, args.events), events_dir)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _train_config(args)
    corpus = load_corpus(_require_path(args.corpus, "Corpus"))
    result = train(corpus, cfg)
    save_model(result.model, args.out)
    stem, _ = os.path.splitext(args.out)
    write_table(result.log, stem + "_epochs.csv")
    if result.splits.test:
        report = evaluate(result.model, result.splits.test)
        logger.info("Test split:\n" + report.summary_text())
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(_require_path(args.model, "Model"))
    corpus = load_corpus(_require_path(args.corpus, "Corpus"))
    if args.split == "all":
        windows = windows_from_corpus(corpus, model.T_k)
    else:
        windows = prepare_splits(corpus, _config_from_manifest(model, _train_config(args))).test
    report = evaluate(model, windows)
    row = dict(model=model.kind, split=args.split, windows=report.support, **report.to_row())
    write_table(pd.DataFrame([row]), args.report, summary_text=report.summary_text(), xlsx=args.xlsx)
    stem, _ = os.path.splitext(args.report)
    grid = sensitivity_table(report)
    write_table(grid, stem + "_conditions.csv", summary_text=format_percent_table(grid), xlsx=args.xlsx)
    print(report.summary_text())
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _train_config(args)
    corpus = load_corpus(_require_path(args.corpus, "Corpus"))
    result = window_sweep(corpus, cfg, sizes=args.sizes)
    write_table(result.table, args.out, summary_text=result.summary_text(), xlsx=args.xlsx)
    print(result.summary_text())
    return EXIT_OK


def cmd_latency(args) -> int:
    model = load_model(_require_path(args.model, "Model"))
    corpus = load_corpus(_require_path(args.corpus, "Corpus"))
    report = measure_latency(model, corpus)
    write_table(pd.DataFrame([report.to_row()]), args.report, summary_text=report.summary_text(), xlsx=args.xlsx)
    print(report.summary_text())
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _train_config(args)
    corpus = load_corpus(_require_path(args.corpus, "Corpus"))
    table = compare_methods(corpus, cfg, seeds=args.seeds)
    write_report(table, "compare", args.seeds[0], args.out, summary_text=table.to_string(index=False), xlsx=args.xlsx)
    print(table.to_string(index=False))
    return EXIT_OK


def cmd_detect(args) -> int:
    model = load_model(_require_path(args.model, "Model"))
    if args.trials:
        if not os.path.isdir(_require_path(args.input, "Input")):
            raise UsageError("--trials needs a corpus directory as --input")
        table = trial_success_table(model, load_corpus(args.input))
        write_table(table, args.trials, summary_text=table.to_string(index=False), xlsx=args.xlsx)
        print(table.to_string(index=False))
        return EXIT_OK

    def respond(event):
        logger.info(f"⚠️ Slip registered at frame {event.detect_index} (t={event.detect_time:.2f}s)")

    if args.input == "-":
        result = replay_stream(sys.stdin, model, paced=args.paced, events_path=args.events, on_slip=respond)
    else:
        result = replay(_require_path(args.input, "Input"), model, paced=args.paced, events_path=args.events, on_slip=respond)
    print(f"{result.frames} frames, {len(result.events)} slip event(s)")
    if result.latency is not None:
        print(result.latency.summary_text())
    return EXIT_OK


# ---------------------------
# Parser
# ---------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="baroslip",
        description="Slip detection from barometric tactile sensor streams",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate --out corpus/
  %(prog)s train --corpus corpus/ --model-kind tcn --out tcn.model --epochs 50
  %(prog)s eval --model tcn.model --corpus corpus/ --report reports/tcn_eval.csv
  %(prog)s detect --model tcn.model --input corpus/seq_00000.csv --events events.csv
  %(prog)s detect --model tcn.model --input corpus/events --trials reports/trials.csv
        """,
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    parser.add_argument("--config-dir", default="config", help="Directory of the JSON config files (default: config)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Generate a synthetic corpus")
    p.add_argument("--config", help="Simulator config JSON (default: <config-dir>/sim_config.json)")
    p.add_argument("--out", required=True, help="Corpus directory to write")
    p.add_argument("--seed", type=int, help="Override the simulator seed")
    p.add_argument("--events", type=int, default=0, help="Also write N tap/lift event sequences to <out>/events")
    p.set_defaults(func=cmd_simulate)

    def training_flags(p, with_kind=True):
        p.add_argument("--train-config", help="Training config JSON (default: <config-dir>/train_config.json)")
        p.add_argument("--epochs", type=int, help="Override the epoch count")
        p.add_argument("--seed", type=int, help="Override the training seed")
        p.add_argument("--tk", type=int, help="Override the window size T_k")
        if with_kind:
            p.add_argument("--model-kind", choices=MODEL_KINDS, help="Model to train (default from config)")

    p = sub.add_parser("train", help="Train a model on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="Model file to write")
    training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a model on the held-out split")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True, help="Report CSV to write")
    p.add_argument("--split", choices=("test", "all"), default="test")
    p.add_argument("--train-config", help=argparse.SUPPRESS)
    p.add_argument("--xlsx", action="store_true", help="Also write an Excel workbook")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="Train one TCN per window size")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="Sweep CSV to write")
    p.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SWEEP_SIZES))
    p.add_argument("--xlsx", action="store_true")
    training_flags(p, with_kind=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("latency", help="Samples-to-detect over the slip onsets of a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--xlsx", action="store_true")
    p.set_defaults(func=cmd_latency)

    p = sub.add_parser("compare", help="PSD threshold vs frequency CNN vs TCN")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="Report directory")
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--xlsx", action="store_true")
    training_flags(p, with_kind=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("detect", help="Stream frames through the slip detector")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="Record CSV file, '-' for stdin, or an event corpus directory with --trials")
    p.add_argument("--events", help="Event log CSV to write")
    p.add_argument("--paced", action="store_true", help="Replay at 100 Hz instead of max speed")
    p.add_argument("--trials", help="Success-rate CSV per trial kind and surface (needs a corpus directory as --input)")
    p.add_argument("--xlsx", action="store_true")
    p.set_defaults(func=cmd_detect)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level)
    logging.getLogger().setLevel(level)

    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"baroslip: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergenceError as e:
        logger.error(f"❌ {e}")
        return EXIT_DIVERGED
    except (BaroslipError, OSError) as e:
        logger.error(f"❌ {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
