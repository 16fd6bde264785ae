"""Random forest of CART trees grown on bootstrap samples.

Every tree draws from its own random substream keyed by the master seed and
the tree index, so the fitted forest does not depend on how many worker
threads grew it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ParameterError, TrainingError
from ..ingest import FeatureMatrix
from . import _backend
from .encoding import Encoding

_SEED_MAX = 2**64


@dataclass(frozen=True)
class ForestParams:
    tree_count: int = 500
    max_depth: Optional[int] = None  # None: grow until pure
    min_leaf: int = 1
    candidate_features: Optional[int] = None  # None: floor(sqrt(encoded width))
    seed: int = 42

    def __post_init__(self):
        if not isinstance(self.tree_count, int) or self.tree_count < 1:
            raise ParameterError(f"tree_count must be >= 1, got {self.tree_count!r}")
        if self.max_depth is not None and (not isinstance(self.max_depth, int) or self.max_depth < 1):
            raise ParameterError(f"max_depth must be >= 1 or None, got {self.max_depth!r}")
        if not isinstance(self.min_leaf, int) or self.min_leaf < 1:
            raise ParameterError(f"min_leaf must be >= 1, got {self.min_leaf!r}")
        if self.candidate_features is not None and (
            not isinstance(self.candidate_features, int) or self.candidate_features < 1
        ):
            raise ParameterError(
                f"candidate_features must be >= 1 or None, got {self.candidate_features!r}"
            )
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < _SEED_MAX:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def resolved_candidates(self, width: int) -> int:
        if self.candidate_features is None:
            return max(1, math.isqrt(width))
        if self.candidate_features > width:
            raise ParameterError(
                f"candidate_features={self.candidate_features} exceeds the "
                f"{width} encoded features"
            )
        return self.candidate_features

    def describe(self) -> str:
        depth = "unlimited" if self.max_depth is None else self.max_depth
        mtry = "sqrt" if self.candidate_features is None else self.candidate_features
        return (
            f"trees={self.tree_count} depth={depth} min_leaf={self.min_leaf} "
            f"candidates={mtry} seed={self.seed}"
        )


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for the substream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def bootstrap_sample(n: int, seed: int, tree_index: int):
    """Bootstrap rows and split-sampling seed for one tree."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(tree_index),)))
    sample = rng.integers(0, n, size=n).astype(np.intp)
    tree_seed = int(rng.integers(0, _SEED_MAX, dtype=np.uint64))
    return sample, tree_seed


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def leaf_class(self) -> np.ndarray:
        # argmax picks the first maximum: ties go to the smallest class label
        return np.argmax(self.counts, axis=1)

    def same_as(self, other: "Tree") -> bool:
        return all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("feature", "threshold", "left", "right", "counts")
        )


@dataclass(frozen=True)
class Prediction:
    label: str
    fractions: dict


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    encoding: Encoding
    classes: tuple
    params: ForestParams
    candidates: int
    backend: str

    def votes(self, X: np.ndarray) -> np.ndarray:
        """Per-row vote counts over classes for an encoded matrix."""
        kernel = _backend.get(self.backend)
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], len(self.classes)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for t in self.trees:
            leaves = kernel.apply_tree(t.feature, t.threshold, t.left, t.right, X)
            votes[rows, t.leaf_class[leaves]] += 1
        return votes

    def _predictions(self, votes):
        out = []
        total = len(self.trees)
        for v in votes:
            fractions = {c: int(n) / total for c, n in zip(self.classes, v)}
            out.append(Prediction(self.classes[int(np.argmax(v))], fractions))
        return out

    def predict(self, row: Sequence) -> Prediction:
        """Majority vote for one row of original (unencoded) feature values."""
        X = self.encoding.transform_rows([row])
        return self._predictions(self.votes(X))[0]

    def predict_matrix(self, m: FeatureMatrix) -> list:
        return self._predictions(self.votes(self.encoding.transform(m)))

    def predict_labels(self, m: FeatureMatrix) -> list:
        return [p.label for p in self.predict_matrix(m)]


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def fit_trees(X, y, n_classes, params, candidates, workers=None, backend=None):
    """Grow ``params.tree_count`` trees on an encoded matrix."""
    kernel = _backend.get(backend)
    Xt = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    y = np.ascontiguousarray(y, dtype=np.intp)
    n = y.shape[0]
    depth = -1 if params.max_depth is None else params.max_depth

    def grow(t):
        sample, tree_seed = bootstrap_sample(n, params.seed, t)
        arrays = kernel.build_tree(
            Xt, y, sample, n_classes, candidates, depth, params.min_leaf, np.uint64(tree_seed)
        )
        return Tree(*arrays)

    workers = default_workers() if workers is None else workers
    if workers <= 1 or params.tree_count == 1:
        return tuple(grow(t) for t in range(params.tree_count))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return tuple(pool.map(grow, range(params.tree_count)))


def fit_forest(m: FeatureMatrix, p: ForestParams = ForestParams(), workers=None, backend=None) -> ForestModel:
    classes = tuple(sorted(set(m.classes)))
    if len(classes) < 2:
        raise TrainingError(f"need at least two classes to train, got {list(classes)}")
    encoding = Encoding.fit(m)
    if encoding.width == 0:
        raise TrainingError("no features to train on")
    X = encoding.transform(m)
    code = {c: i for i, c in enumerate(classes)}
    y = np.array([code[c] for c in m.classes], dtype=np.intp)
    candidates = p.resolved_candidates(encoding.width)
    backend = _backend.DEFAULT if backend is None else backend
    trees = fit_trees(X, y, len(classes), p, candidates, workers=workers, backend=backend)
    return ForestModel(trees, encoding, classes, p, candidates, backend)
