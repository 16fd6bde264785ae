"""One-hot encoding of relation columns for threshold-split learners."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import Relation
from ..errors import PredictionError
from ..ingest import ColumnKind, FeatureMatrix


@dataclass(frozen=True)
class EncodedColumn:
    source: int
    name: str
    token: Optional[Relation] = None  # None: numeric pass-through


@dataclass(frozen=True)
class Encoding:
    """Maps original feature columns to encoded numeric columns.

    Numeric columns pass through unchanged. A relation column becomes one 0/1
    indicator per token seen at fit time, in order of first appearance; a
    token not seen at fit time encodes as all zeros.
    """

    feature_names: tuple
    column_kinds: tuple
    columns: tuple

    @classmethod
    def fit(cls, m: FeatureMatrix) -> "Encoding":
        cols = []
        for j, (name, kind) in enumerate(zip(m.feature_names, m.column_kinds)):
            if kind is ColumnKind.NUMERIC:
                cols.append(EncodedColumn(j, name))
                continue
            seen = dict.fromkeys(row[j] for row in m.values)
            cols.extend(EncodedColumn(j, f"{name}={tok.value}", tok) for tok in seen)
        return cls(m.feature_names, m.column_kinds, tuple(cols))

    @property
    def names(self) -> tuple:
        return tuple(c.name for c in self.columns)

    @property
    def width(self) -> int:
        return len(self.columns)

    def _plan(self):
        plan = {}
        for q, c in enumerate(self.columns):
            if c.token is None:
                plan[c.source] = q
            else:
                plan.setdefault(c.source, {})[c.token] = q
        return [plan.get(j, {}) for j in range(len(self.feature_names))]

    def check_row(self, row: Sequence):
        if len(row) != len(self.feature_names):
            raise PredictionError(
                f"row has {len(row)} values, model expects {len(self.feature_names)}"
            )
        out = []
        for v, kind, name in zip(row, self.column_kinds, self.feature_names):
            if kind is ColumnKind.NUMERIC:
                if isinstance(v, (Relation, str)):
                    raise PredictionError(f"column {name!r} expects a number, got {v!r}")
                out.append(float(v))
            else:
                if isinstance(v, Relation):
                    out.append(v)
                elif isinstance(v, str):
                    try:
                        out.append(Relation.from_token(v))
                    except ValueError as exc:
                        raise PredictionError(f"column {name!r}: {exc}") from None
                else:
                    raise PredictionError(f"column {name!r} expects a relation, got {v!r}")
        return out

    def transform_rows(self, rows: Sequence[Sequence], checked=False) -> np.ndarray:
        plan = self._plan()
        X = np.zeros((len(rows), self.width), dtype=np.float64)
        for i, row in enumerate(rows):
            if not checked:
                row = self.check_row(row)
            for j, v in enumerate(row):
                target = plan[j]
                if isinstance(target, int):
                    X[i, target] = v
                else:
                    q = target.get(v)
                    if q is not None:
                        X[i, q] = 1.0
        return X

    def transform(self, m: FeatureMatrix) -> np.ndarray:
        if m.feature_names != self.feature_names or m.column_kinds != self.column_kinds:
            raise PredictionError("matrix columns do not match the fitted encoding")
        return self.transform_rows(m.values, checked=True)

    def decode(self, X: np.ndarray) -> list:
        """Original-column rows from an encoded matrix.

        A relation column whose indicators are all zero decodes to ``None``.
        """
        rows = []
        for x in np.asarray(X):
            row = [None] * len(self.feature_names)
            for q, c in enumerate(self.columns):
                if c.token is None:
                    row[c.source] = float(x[q])
                elif x[q] == 1.0:
                    row[c.source] = c.token
            rows.append(row)
        return rows


def one_hot_encode(m: FeatureMatrix):
    """Encode ``m``; returns ``(X, encoding)``."""
    enc = Encoding.fit(m)
    return enc.transform(m), enc
