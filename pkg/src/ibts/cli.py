"""Command-line front end: ``extract``, ``cv`` and ``synth``.

Exit codes: 0 success, 1 internal error, 2 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from math import comb
from typing import Optional

from . import __version__
from .classify import ForestParams, cross_validate, default_workers
from .errors import IBTSError
from .features import (
    REPRESENTATIONS,
    build_matrix,
    check_epsilon,
    select_labels,
    write_selection_report,
)
from .ingest import ColumnKind, Dataset, load_dataset, save_dataset, write_feature_matrix
from .synth import SynthSpec, generate, parse_rule

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    events: Optional[str] = None
    classes: Optional[str] = None
    synth: Optional[SynthSpec] = None
    representation: str = "combined"
    epsilon: str = "0"
    forest: ForestParams = field(default_factory=ForestParams)
    folds: int = 10
    seed: int = 42
    workers: int = 1
    out: Optional[str] = None
    report: Optional[str] = None
    timing: bool = False

    def source(self) -> str:
        if self.synth is not None:
            s = self.synth
            lo, hi = s.intervals_per_sequence
            return (
                f"synth(rule={s.rule} n={s.sequence_count} alphabet={s.alphabet_size} "
                f"intervals={lo}:{hi} horizon={s.time_horizon} noise={s.label_noise_rate} "
                f"saturated={s.saturated_labels} seed={s.seed})"
            )
        return f"events={self.events} classes={self.classes}"

    def result_items(self) -> dict:
        """Everything that determines the results; worker count excluded."""
        items = {"source": self.source()}
        if self.subcommand == "synth":
            return items
        items["representation"] = self.representation
        items["epsilon"] = self.epsilon
        if self.subcommand == "cv":
            items["folds"] = self.folds
            items["forest"] = self.forest.describe()
        return items

    def describe(self) -> str:
        items = {"command": self.subcommand, **self.result_items()}
        if self.subcommand != "synth":
            items["workers"] = self.workers
            items["timing"] = self.timing
        if self.out:
            items["out"] = self.out
        if self.report:
            items["report"] = self.report
        return " ".join(f"{k}={v}" for k, v in items.items())


def _intervals(text):
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi if sep else lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}") from None


def _epsilon(text):
    try:
        check_epsilon(text)
    except IBTSError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _add_synth_flags(p, required=False):
    g = p.add_argument_group("synthetic data")
    g.add_argument("--rule", required=required, help="presence:L | relation:L1:L2:REL | frequency:L:THETA")
    g.add_argument("--n", type=int, default=200, help="number of sequences (default 200)")
    g.add_argument("--alphabet", type=int, default=6, help="alphabet size (default 6)")
    g.add_argument("--intervals", type=_intervals, default=(3, 8), help="intervals per sequence MIN:MAX (default 3:8)")
    g.add_argument("--horizon", type=int, default=100, help="time horizon (default 100)")
    g.add_argument("--noise", type=float, default=0.0, help="class-label flip probability")
    g.add_argument("--saturated", type=int, default=0, help="labels covering (almost) every whole sequence")


def _add_input_flags(p):
    p.add_argument("--events", help="events CSV (sequence_id,label,begin,finish)")
    p.add_argument("--classes", help="classes CSV (sequence_id,class)")
    _add_synth_flags(p)
    p.add_argument("--representation", choices=REPRESENTATIONS, default="combined")
    p.add_argument("--epsilon", type=_epsilon, default="0", help="support threshold in [0, 0.5) (default 0)")
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ibts", description="Feature extraction and classification of interval-based temporal sequences."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="write the feature matrix and label selection report")
    _add_input_flags(ex)
    ex.add_argument("--out", required=True, help="feature CSV path")
    ex.add_argument("--report", help="selection report CSV path")
    ex.add_argument("--timing", action="store_true")
    ex.add_argument("--workers", type=int, default=None)

    cv = sub.add_parser("cv", help="cross-validate a random forest")
    _add_input_flags(cv)
    cv.add_argument("--folds", type=int, default=10)
    cv.add_argument("--trees", type=int, default=500)
    cv.add_argument("--depth", type=int, default=None, help="maximum tree depth (default unlimited)")
    cv.add_argument("--min-leaf", type=int, default=1)
    cv.add_argument("--workers", type=int, default=None, help="threads (default: available CPUs)")
    cv.add_argument("--out", help="also write the selected feature matrix here")
    cv.add_argument("--report", help="write the CV report as CSV here")
    cv.add_argument("--timing", action="store_true", help="print extraction and CV wall time")

    sy = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_synth_flags(sy, required=True)
    sy.add_argument("--seed", type=int, default=42)
    sy.add_argument("--out", required=True, help="output directory for events.csv and classes.csv")
    return parser


def _synth_spec(args) -> SynthSpec:
    return SynthSpec(
        rule=parse_rule(args.rule),
        sequence_count=args.n,
        alphabet_size=args.alphabet,
        intervals_per_sequence=args.intervals,
        time_horizon=args.horizon,
        label_noise_rate=args.noise,
        saturated_labels=args.saturated,
        seed=args.seed,
    )


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(subcommand=args.command, seed=args.seed, out=args.out)
    if args.command == "synth":
        cfg.synth = _synth_spec(args)
        return cfg
    has_files = args.events is not None or args.classes is not None
    if has_files and args.rule is not None:
        raise InputError("--events/--classes and --rule are mutually exclusive")
    if has_files:
        if args.events is None or args.classes is None:
            raise InputError("--events and --classes must be given together")
        cfg.events, cfg.classes = args.events, args.classes
    elif args.rule is not None:
        cfg.synth = _synth_spec(args)
    else:
        raise InputError("give --events and --classes, or --rule for synthetic data")
    cfg.representation = args.representation
    cfg.epsilon = args.epsilon
    cfg.report = args.report
    cfg.timing = args.timing
    cfg.workers = default_workers() if args.workers is None else args.workers
    if cfg.workers < 1:
        raise InputError("--workers must be >= 1")
    if args.command == "cv":
        cfg.folds = args.folds
        cfg.forest = ForestParams(
            tree_count=args.trees, max_depth=args.depth, min_leaf=args.min_leaf, seed=args.seed
        )
    return cfg


def _load(cfg: RunConfig) -> Dataset:
    if cfg.synth is not None:
        return generate(cfg.synth)
    for path in (cfg.events, cfg.classes):
        if not os.path.isfile(path):
            raise InputError(f"no such file: {path}")
    return load_dataset(cfg.events, cfg.classes)


def _counts(m, labels_before, representation):
    """(total, temporal) feature counts of a matrix and of its unfiltered version."""
    temporal = sum(k is ColumnKind.RELATION for k in m.column_kinds)
    n = len(labels_before)
    full_temporal = comb(n, 2) if representation != "relfreq" else 0
    full_relfreq = n if representation != "temporal" else 0
    return full_relfreq + full_temporal, full_temporal, m.shape[1], temporal


def _extract(cfg, d):
    report = select_labels(d, cfg.epsilon)
    m = build_matrix(d, cfg.representation, labels=report.kept)
    return m, report


def cmd_extract(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    d = _load(cfg)
    t0 = time.perf_counter()
    m, report = _extract(cfg, d)
    elapsed = time.perf_counter() - t0
    with open(cfg.out, "w", encoding="utf-8", newline="") as f:
        write_feature_matrix(m, f)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8", newline="") as f:
            write_selection_report(report, f)
    before, _, after, _ = _counts(m, d.alphabet, cfg.representation)
    out.write(
        f"{len(m)} rows, {after} features ({before} before selection); "
        f"discarded labels: {' '.join(report.discarded) or '-'}\n"
    )
    if cfg.timing:
        err.write(f"timing: extraction {elapsed:.3f}s\n")
    return EXIT_OK


def cmd_cv(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    d = _load(cfg)
    if len(d.class_labels) < 2:
        raise InputError(f"cross-validation needs at least two classes, got {list(d.class_labels)}")
    t0 = time.perf_counter()
    m, report = _extract(cfg, d)
    t1 = time.perf_counter()
    if m.shape[1] == 0:
        raise InputError("no features left after selection; lower --epsilon")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as f:
            write_feature_matrix(m, f)
    cv = cross_validate(
        m, cfg.forest, cfg.folds, cfg.seed, workers=cfg.workers, config=cfg.result_items()
    )
    t2 = time.perf_counter()
    before, before_t, after, after_t = _counts(m, d.alphabet, cfg.representation)
    lines = [
        f"features: {after} after selection ({before} before); temporal: {after_t} ({before_t} before)",
        f"discarded labels: {' '.join(report.discarded) or '-'}",
    ]
    out.write(cv.to_text() + "\n".join(lines) + "\n")
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8", newline="") as f:
            f.write(cv.to_csv())
            f.write(f"# features_before={before}\n# features_after={after}\n")
            f.write(f"# temporal_before={before_t}\n# temporal_after={after_t}\n")
    if cfg.timing:
        err.write(
            f"timing: extraction {t1 - t0:.3f}s cv {t2 - t1:.3f}s total {t2 - t0:.3f}s\n"
        )
    return EXIT_OK


def cmd_synth(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    d = generate(cfg.synth)
    os.makedirs(cfg.out, exist_ok=True)
    events = os.path.join(cfg.out, "events.csv")
    classes = os.path.join(cfg.out, "classes.csv")
    save_dataset(d, events, classes)
    balance = Counter(d.y)
    share = ", ".join(f"{c}: {balance[c]} ({balance[c] / len(d):.1%})" for c in sorted(balance))
    out.write(
        f"wrote {events} and {classes}\n"
        f"n={len(d)} alphabet={len(d.alphabet)} classes: {share} rule={cfg.synth.rule}\n"
    )
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "cv": cmd_cv, "synth": cmd_synth}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        err.write(f"run: {cfg.describe()}\n")
        return COMMANDS[cfg.subcommand](cfg, out, err)
    except (InputError, IBTSError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
