"""Stratified k-fold cross-validation of the random forest."""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..errors import ParameterError
from ..ingest import FeatureMatrix
from .forest import ForestParams, derive_seed, fit_forest


def stratified_folds(m, k: int, seed: int = 42) -> list:
    """Partition row positions into ``k`` folds preserving class proportions.

    ``m`` is a :class:`FeatureMatrix` or a sequence of class labels. Each
    class is shuffled and dealt round-robin; the dealing position carries
    over from one class to the next so fold sizes differ by at most one.
    """
    classes = list(m.classes if isinstance(m, FeatureMatrix) else m)
    n = len(classes)
    if not isinstance(k, int) or k < 2:
        raise ParameterError(f"fold count must be an integer >= 2, got {k!r}")
    if k > n:
        raise ParameterError(f"fold count {k} exceeds the {n} rows")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    folds = [[] for _ in range(k)]
    pos = 0
    for c in sorted(set(classes)):
        rows = [i for i, ci in enumerate(classes) if ci == c]
        for i in rng.permutation(rows):
            folds[pos % k].append(int(i))
            pos += 1
    return [sorted(f) for f in folds]


@dataclass(frozen=True)
class CVReport:
    fold_count: int
    fold_accuracies: tuple
    fold_sizes: tuple
    classes: tuple
    confusion: tuple  # confusion[true][predicted], summed over folds
    degenerate_folds: tuple  # folds whose training part held one class
    config: Mapping = field(default_factory=dict)

    @property
    def mean_accuracy(self) -> float:
        return math.fsum(self.fold_accuracies) / self.fold_count

    @property
    def pooled_accuracy(self) -> float:
        correct = sum(self.confusion[i][i] for i in range(len(self.classes)))
        return correct / sum(map(sum, self.confusion))

    def to_text(self) -> str:
        lines = []
        if self.config:
            lines.append("config: " + " ".join(f"{k}={v}" for k, v in self.config.items()))
        for i, (acc, size) in enumerate(zip(self.fold_accuracies, self.fold_sizes)):
            flag = "  (degenerate: single-class training set)" if i in self.degenerate_folds else ""
            lines.append(f"fold {i + 1:>2}: accuracy {acc:.4f} ({size} rows){flag}")
        lines.append(f"mean accuracy: {self.mean_accuracy:.4f}")
        lines.append("confusion (rows: true, columns: predicted)")
        width = max([len(c) for c in self.classes] + [5])
        lines.append(" " * width + " " + " ".join(f"{c:>{width}}" for c in self.classes))
        for c, row in zip(self.classes, self.confusion):
            lines.append(f"{c:>{width}} " + " ".join(f"{v:>{width}}" for v in row))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.config.items():
            buf.write(f"# {k}={v}\n")
        buf.write("fold,accuracy\n")
        for i, acc in enumerate(self.fold_accuracies):
            buf.write(f"{i + 1},{acc!r}\n")
        buf.write(f"mean,{self.mean_accuracy!r}\n")
        for i in self.degenerate_folds:
            buf.write(f"# degenerate fold {i + 1}\n")
        return buf.getvalue()


def cross_validate(
    m: FeatureMatrix,
    p: ForestParams = ForestParams(),
    k: int = 10,
    seed: Optional[int] = None,
    workers=None,
    backend=None,
    config: Optional[Mapping] = None,
) -> CVReport:
    """Fit on k-1 folds, score the held-out fold, for every fold.

    ``seed`` drives the fold assignment and, through per-fold substreams, the
    forests; it defaults to ``p.seed``.
    """
    seed = p.seed if seed is None else seed
    folds = stratified_folds(m, k, seed)
    classes = tuple(sorted(set(m.classes)))
    code = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    accuracies, sizes, degenerate = [], [], []
    for f, test_rows in enumerate(folds):
        held = set(test_rows)
        train_rows = [i for i in range(len(m)) if i not in held]
        train = m.take(train_rows)
        test = m.take(test_rows)
        present = Counter(train.classes)
        if len(present) < 2:
            # majority fallback; only one class left to predict
            degenerate.append(f)
            majority = min(present, key=lambda c: (-present[c], c))
            predicted = [majority] * len(test)
        else:
            fold_params = ForestParams(
                tree_count=p.tree_count,
                max_depth=p.max_depth,
                min_leaf=p.min_leaf,
                candidate_features=p.candidate_features,
                seed=derive_seed(seed, 1, f),
            )
            model = fit_forest(train, fold_params, workers=workers, backend=backend)
            predicted = model.predict_labels(test)
        correct = 0
        for t, pr in zip(test.classes, predicted):
            confusion[code[t], code[pr]] += 1
            correct += t == pr
        accuracies.append(correct / len(test))
        sizes.append(len(test))
    return CVReport(
        fold_count=k,
        fold_accuracies=tuple(accuracies),
        fold_sizes=tuple(sizes),
        classes=classes,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        degenerate_folds=tuple(degenerate),
        config=dict(config or {}),
    )
