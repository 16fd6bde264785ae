"""Feature-based representations of e-sequence datasets and label selection.

Two representations are built from a :class:`~ibts.ingest.Dataset`:

* relative frequency: one numeric column per event label, holding the
  duration-weighted share of the sequence span the label occupies;
* temporal relations: one categorical column per unordered label pair
  ``l1:l2`` (``l1 < l2``), holding the Allen relation of the first ``l1``
  relative to the first ``l2``, or ``0`` when either label is absent.

Labels whose support (mean relative frequency over the dataset) is outside
``[epsilon, 1 - epsilon]`` can be discarded before either representation is
built; a label with support exactly 0 or 1 has the same value in every row and
cannot help a classifier.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, TextIO

from .core import Relation, allen_relation, first_occurrences, label_durations, sequence_duration
from .errors import ConsistencyError, ParameterError, ParseError
from .ingest import ColumnKind, Dataset, FeatureMatrix, column_labels, format_number, pair_name

REPRESENTATIONS = ("relfreq", "temporal", "combined")


def _labels(d: Dataset, labels):
    if labels is None:
        return d.alphabet
    return tuple(sorted(set(labels)))


def build_relfreq_matrix(d: Dataset, labels: Optional[Iterable[str]] = None) -> FeatureMatrix:
    """Relative-frequency matrix; ``labels`` restricts the columns."""
    cols = _labels(d, labels)
    values = []
    for s in d.sequences:
        span = sequence_duration(s)
        totals = label_durations(s)
        # int / int is correctly rounded, so this equals float(Fraction(total, span))
        values.append([totals.get(l, 0) / span for l in cols])
    return FeatureMatrix(
        feature_names=cols,
        column_kinds=[ColumnKind.NUMERIC] * len(cols),
        ids=d.ids,
        values=values,
        classes=d.y,
        labels=cols,
    )


def temporal_row(s, pairs) -> list:
    first = first_occurrences(s)
    row = []
    for l1, l2 in pairs:
        e1 = first.get(l1)
        e2 = first.get(l2)
        row.append(Relation.NONE if e1 is None or e2 is None else allen_relation(e1, e2))
    return row


def build_temporal_matrix(d: Dataset, labels: Optional[Iterable[str]] = None) -> FeatureMatrix:
    """Pairwise first-occurrence relation matrix; ``labels`` restricts the pairs."""
    cols = _labels(d, labels)
    pairs = list(combinations(cols, 2))
    values = [temporal_row(s, pairs) for s in d.sequences]
    return FeatureMatrix(
        feature_names=[pair_name(a, b) for a, b in pairs],
        column_kinds=[ColumnKind.RELATION] * len(pairs),
        ids=d.ids,
        values=values,
        classes=d.y,
        labels=cols,
    )


def build_combined_matrix(d: Dataset, labels: Optional[Iterable[str]] = None) -> FeatureMatrix:
    return build_relfreq_matrix(d, labels).hconcat(build_temporal_matrix(d, labels))


_BUILDERS = {
    "relfreq": build_relfreq_matrix,
    "temporal": build_temporal_matrix,
    "combined": build_combined_matrix,
}


def build_matrix(d: Dataset, representation: str, labels=None) -> FeatureMatrix:
    try:
        builder = _BUILDERS[representation]
    except KeyError:
        raise ParameterError(
            f"unknown representation {representation!r}; choose from {REPRESENTATIONS}"
        ) from None
    return builder(d, labels)


# -- support-based selection -------------------------------------------------------


def supports(d: Dataset) -> dict:
    """Exact support of every label in the alphabet."""
    if not d.sequences:
        raise ParameterError("support is undefined on an empty dataset")
    acc = dict.fromkeys(d.alphabet, Fraction(0))
    for s in d.sequences:
        span = sequence_duration(s)
        for label, total in label_durations(s).items():
            acc[label] += Fraction(total, span)
    n = len(d.sequences)
    return {label: v / n for label, v in acc.items()}


def support(d: Dataset, label: str) -> Fraction:
    """Mean relative frequency of ``label`` over the sequences of ``d``."""
    if not d.sequences:
        raise ParameterError("support is undefined on an empty dataset")
    total = Fraction(0)
    for s in d.sequences:
        dur = sum(e.duration for e in s.intervals if e.label == label)
        if dur:
            total += Fraction(dur, sequence_duration(s))
    return total / len(d.sequences)


def as_fraction(x) -> Fraction:
    """Exact value of ``x``; floats are read through their shortest repr.

    ``0.01`` therefore means one hundredth, not the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def check_epsilon(epsilon) -> Fraction:
    try:
        eps = as_fraction(epsilon)
    except (TypeError, ValueError):
        raise ParameterError(f"epsilon must be a number, got {epsilon!r}") from None
    if not 0 <= eps < Fraction(1, 2):
        raise ParameterError(f"epsilon must lie in [0, 0.5), got {epsilon}")
    return eps


class Verdict(str, enum.Enum):
    KEPT = "kept"
    DISCARDED = "discarded"


@dataclass(frozen=True)
class LabelSupport:
    label: str
    support: Fraction
    verdict: Verdict


@dataclass(frozen=True)
class SelectionReport:
    epsilon: Fraction
    entries: tuple

    @property
    def kept(self) -> tuple:
        return tuple(e.label for e in self.entries if e.verdict is Verdict.KEPT)

    @property
    def discarded(self) -> tuple:
        return tuple(e.label for e in self.entries if e.verdict is Verdict.DISCARDED)

    @property
    def labels(self) -> tuple:
        return tuple(e.label for e in self.entries)

    def support_of(self, label) -> Fraction:
        for e in self.entries:
            if e.label == label:
                return e.support
        raise KeyError(label)


def verdict_for(sup: Fraction, eps: Fraction) -> Verdict:
    """Discard outside the closed interval ``[eps, 1 - eps]``.

    Supports of exactly 0 or 1 are discarded for every ``eps``, including 0:
    such a label is constant across the dataset.
    """
    if sup <= 0 or sup >= 1 or sup < eps or sup > 1 - eps:
        return Verdict.DISCARDED
    return Verdict.KEPT


def select_labels(d: Dataset, epsilon=0) -> SelectionReport:
    eps = check_epsilon(epsilon)
    sups = supports(d)
    entries = tuple(LabelSupport(l, sups[l], verdict_for(sups[l], eps)) for l in d.alphabet)
    return SelectionReport(eps, entries)


def apply_selection(m: FeatureMatrix, r: SelectionReport) -> FeatureMatrix:
    """Drop every column that mentions a discarded label."""
    if set(m.labels) != set(r.labels):
        only_m = sorted(set(m.labels) - set(r.labels))
        only_r = sorted(set(r.labels) - set(m.labels))
        raise ConsistencyError(
            f"report and matrix cover different labels "
            f"(matrix only: {only_m}, report only: {only_r})"
        )
    gone = set(r.discarded)
    keep = [
        n
        for n, k in zip(m.feature_names, m.column_kinds)
        if not gone.intersection(column_labels(n, k))
    ]
    return m.select(keep, labels=r.kept)


def extract(d: Dataset, representation: str, epsilon=0):
    """Select labels, then build the representation over the kept labels only.

    Equivalent to ``apply_selection(build_matrix(d, rep), select_labels(d, eps))``
    but never materialises pair columns that would be dropped.
    """
    report = select_labels(d, epsilon)
    return build_matrix(d, representation, labels=report.kept), report


# -- report serialisation -----------------------------------------------------------


def write_selection_report(r: SelectionReport, sink: TextIO) -> None:
    sink.write(f"# epsilon={r.epsilon.numerator}/{r.epsilon.denominator} ({float(r.epsilon)!r})\n")
    sink.write("label,support,verdict\n")
    for e in r.entries:
        sink.write(f"{e.label},{format_number(e.support)},{e.verdict.value}\n")


def selection_report_to_text(r: SelectionReport) -> str:
    buf = io.StringIO()
    write_selection_report(r, buf)
    return buf.getvalue()


def read_selection_report(source: TextIO) -> SelectionReport:
    """Inverse of :func:`write_selection_report`; supports come back as floats."""
    eps = None
    entries = []
    header_seen = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# epsilon="):
                eps = Fraction(line[len("# epsilon="):].split()[0])
            continue
        if not header_seen:
            header_seen = True
            if line == "label,support,verdict":
                continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError("expected label,support,verdict", lineno)
        try:
            entries.append(LabelSupport(parts[0], Fraction(parts[1]), Verdict(parts[2])))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if eps is None:
        raise ParseError("missing '# epsilon=' header comment")
    return SelectionReport(eps, tuple(entries))
