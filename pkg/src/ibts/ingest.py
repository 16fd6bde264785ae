"""Datasets, feature matrices and their plain-text formats.

Events file, one interval per line::

    sequence_id,label,begin,finish

Classes file, one sequence per line::

    sequence_id,class

Feature file::

    id,<feature names...>,class

Blank lines and lines starting with ``#`` are skipped everywhere. A single
header line is accepted at the top of each file.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, TextIO

from .core import ESequence, EventInterval, Relation
from .errors import ConsistencyError, ParseError, ValidityError

EVENTS_HEADER = ("sequence_id", "label", "begin", "finish")
CLASSES_HEADER = ("sequence_id", "class")
_ID_HEADER_NAMES = {"sequence_id", "id", "seq_id"}
_RESERVED_TOKEN_CHARS = frozenset(',"\r\n')


def _check_token(kind, value):
    if not value or _RESERVED_TOKEN_CHARS.intersection(value) or value != value.strip():
        raise ValidityError(f"invalid {kind} {value!r}")
    return value


@dataclass(frozen=True)
class Dataset:
    """A set of e-sequences, each carrying one class label.

    Sequence order is significant only for presentation: it is the order of
    the classes file, so reshuffling the events file changes nothing.
    """

    sequences: tuple
    classes: Mapping[str, str]
    alphabet: tuple = field(init=False)

    def __init__(self, sequences: Iterable[ESequence], classes: Mapping[str, str]):
        seqs = tuple(sequences)
        object.__setattr__(self, "sequences", seqs)
        object.__setattr__(self, "classes", dict(classes))
        ids = [s.id for s in seqs]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ConsistencyError(f"duplicate sequence ids: {dup}")
        missing = [i for i in ids if i not in self.classes]
        if missing:
            raise ConsistencyError(f"sequences without a class label: {missing}")
        extra = sorted(set(self.classes) - set(ids))
        if extra:
            raise ConsistencyError(f"class labels for unknown sequence ids: {extra}")
        for i in ids:
            _check_token("sequence id", i)
            _check_token("class label", self.classes[i])
        alphabet = sorted(set().union(*(s.labels for s in seqs)))
        object.__setattr__(self, "alphabet", tuple(alphabet))

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    @property
    def ids(self) -> tuple:
        return tuple(s.id for s in self.sequences)

    @property
    def y(self) -> tuple:
        """Class label of every sequence in dataset order."""
        return tuple(self.classes[s.id] for s in self.sequences)

    @property
    def class_labels(self) -> tuple:
        return tuple(sorted(set(self.classes.values())))

    def with_classes(self, classes: Mapping[str, str]) -> "Dataset":
        return Dataset(self.sequences, classes)


class ColumnKind(str, enum.Enum):
    NUMERIC = "numeric"
    RELATION = "relation"


def pair_name(l1: str, l2: str) -> str:
    return f"{l1}:{l2}"


def column_labels(name: str, kind: ColumnKind) -> tuple:
    """Event labels a column was derived from."""
    if kind is ColumnKind.RELATION:
        return tuple(name.split(":"))
    return (name,)


@dataclass(frozen=True)
class FeatureMatrix:
    """Named feature columns by instance rows, plus a class column.

    ``values[i][j]`` is the value of column ``j`` for row ``i``: a float in
    ``[0, 1]`` for numeric columns, a :class:`Relation` for relation columns.
    ``labels`` records the event labels the matrix was built from and is used
    to check a selection report against it.
    """

    feature_names: tuple
    column_kinds: tuple
    ids: tuple
    values: tuple
    classes: tuple
    labels: tuple = None

    def __post_init__(self):
        for name in ("feature_names", "column_kinds", "ids", "classes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "values", tuple(tuple(r) for r in self.values))
        kinds = tuple(ColumnKind(k) for k in self.column_kinds)
        object.__setattr__(self, "column_kinds", kinds)
        if self.labels is None:
            derived = set()
            for n, k in zip(self.feature_names, kinds):
                derived.update(column_labels(n, k))
            object.__setattr__(self, "labels", tuple(sorted(derived)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        self._validate()

    def _validate(self):
        z = len(self.feature_names)
        if len(self.column_kinds) != z:
            raise ValidityError("one column kind per feature name is required")
        if len(set(self.feature_names)) != z:
            raise ValidityError("duplicate feature names")
        n = len(self.ids)
        if len(self.values) != n or len(self.classes) != n:
            raise ValidityError("ids, values and classes must have one entry per row")
        if len(set(self.ids)) != n:
            raise ValidityError("duplicate row ids")
        for rid, row in zip(self.ids, self.values):
            if len(row) != z:
                raise ValidityError(f"row {rid!r} has {len(row)} values, expected {z}")
            for v, k, name in zip(row, self.column_kinds, self.feature_names):
                if k is ColumnKind.NUMERIC:
                    if isinstance(v, (Relation, str, bool)) or not (
                        math.isfinite(v) and 0.0 <= v <= 1.0
                    ):
                        raise ValidityError(
                            f"row {rid!r}, column {name!r}: {v!r} is not a number in [0, 1]"
                        )
                elif not isinstance(v, Relation):
                    raise ValidityError(
                        f"row {rid!r}, column {name!r}: {v!r} is not a relation"
                    )

    @property
    def shape(self):
        return len(self.ids), len(self.feature_names)

    def __len__(self):
        return len(self.ids)

    def rows(self):
        """Yield ``(id, values, class)`` per instance."""
        return zip(self.ids, self.values, self.classes)

    def column(self, name):
        j = self.feature_names.index(name)
        return tuple(r[j] for r in self.values)

    def select(self, names: Sequence[str], labels=None) -> "FeatureMatrix":
        """Project onto ``names`` (in the given order)."""
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(
            feature_names=[self.feature_names[j] for j in idx],
            column_kinds=[self.column_kinds[j] for j in idx],
            ids=self.ids,
            values=[[r[j] for j in idx] for r in self.values],
            classes=self.classes,
            labels=self.labels if labels is None else labels,
        )

    def take(self, rows: Sequence[int]) -> "FeatureMatrix":
        """Subset of rows by position."""
        return FeatureMatrix(
            feature_names=self.feature_names,
            column_kinds=self.column_kinds,
            ids=[self.ids[i] for i in rows],
            values=[self.values[i] for i in rows],
            classes=[self.classes[i] for i in rows],
            labels=self.labels,
        )

    def hconcat(self, other: "FeatureMatrix") -> "FeatureMatrix":
        if self.ids != other.ids or self.classes != other.classes:
            raise ConsistencyError("matrices describe different rows")
        return FeatureMatrix(
            feature_names=self.feature_names + other.feature_names,
            column_kinds=self.column_kinds + other.column_kinds,
            ids=self.ids,
            values=[a + b for a, b in zip(self.values, other.values)],
            classes=self.classes,
            labels=sorted(set(self.labels) | set(other.labels)),
        )


# -- parsing ------------------------------------------------------------------


def _data_lines(source: TextIO):
    """Yield ``(line_number, fields)`` for every non-blank, non-comment line."""
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = next(csv.reader([line]))
        yield lineno, [f.strip() for f in fields]


def _is_int(text):
    try:
        int(text)
    except ValueError:
        return False
    return True


def _name(source):
    return getattr(source, "name", None)


def parse_events(source: TextIO) -> dict:
    """Read an events stream into ``{sequence_id: [EventInterval, ...]}``."""
    src = _name(source)
    by_id = {}
    seen = {}
    first = True
    for lineno, fields in _data_lines(source):
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 fields (sequence_id,label,begin,finish), got {len(fields)}",
                lineno,
                src,
            )
        sid, label, b, f = fields
        if first and not _is_int(b):
            first = False
            continue
        first = False
        if not (_is_int(b) and _is_int(f)):
            raise ParseError(f"begin/finish must be integers, got {b!r}, {f!r}", lineno, src)
        try:
            _check_token("sequence id", sid)
            e = EventInterval(label, int(b), int(f))
        except ValidityError as exc:
            raise ValidityError(f"{src or '<events>'}:{lineno}: {exc}") from None
        key = (sid, e.label, e.begin, e.finish)
        if key in seen:
            raise ValidityError(
                f"{src or '<events>'}:{lineno}: duplicate of line {seen[key]}"
            )
        seen[key] = lineno
        by_id.setdefault(sid, []).append((lineno, e))
    out = {}
    for sid, items in by_id.items():
        items.sort(key=lambda t: t[1])
        last = {}
        for lineno, e in items:
            prev = last.get(e.label)
            if prev is not None and prev[1].finish > e.begin:
                raise ValidityError(
                    f"{src or '<events>'}: sequence {sid!r}: {e.label} intervals on "
                    f"lines {prev[0]} and {lineno} overlap"
                )
            last[e.label] = (lineno, e)
        out[sid] = [e for _, e in items]
    return out


def parse_classes(source: TextIO) -> dict:
    """Read a classes stream into an ordered ``{sequence_id: class}``."""
    src = _name(source)
    out = {}
    first = True
    for lineno, fields in _data_lines(source):
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 fields (sequence_id,class), got {len(fields)}", lineno, src
            )
        sid, cls = fields
        if first and sid.lower() in _ID_HEADER_NAMES:
            first = False
            continue
        first = False
        if not sid or not cls:
            raise ParseError("empty sequence id or class", lineno, src)
        if sid in out:
            raise ConsistencyError(f"{src or '<classes>'}:{lineno}: duplicate id {sid!r}")
        out[sid] = cls
    return out


def parse_dataset(events_source: TextIO, classes_source: TextIO) -> Dataset:
    events = parse_events(events_source)
    classes = parse_classes(classes_source)
    missing = sorted(set(events) - set(classes))
    if missing:
        raise ConsistencyError(f"sequence ids without a class: {missing}")
    unknown = [sid for sid in classes if sid not in events]
    if unknown:
        raise ConsistencyError(f"classes reference unknown sequence ids: {unknown}")
    seqs = [ESequence(sid, events[sid]) for sid in classes]
    return Dataset(seqs, classes)


def load_dataset(events_path, classes_path) -> Dataset:
    with open(events_path, encoding="utf-8", newline="") as ev, open(
        classes_path, encoding="utf-8", newline=""
    ) as cl:
        return parse_dataset(ev, cl)


def write_dataset(d: Dataset, events_sink: TextIO, classes_sink: TextIO) -> None:
    events_sink.write(",".join(EVENTS_HEADER) + "\n")
    classes_sink.write(",".join(CLASSES_HEADER) + "\n")
    for s in d.sequences:
        for e in s.intervals:
            events_sink.write(f"{s.id},{e.label},{e.begin},{e.finish}\n")
        classes_sink.write(f"{s.id},{d.classes[s.id]}\n")


def save_dataset(d: Dataset, events_path, classes_path) -> None:
    with open(events_path, "w", encoding="utf-8", newline="") as ev, open(
        classes_path, "w", encoding="utf-8", newline=""
    ) as cl:
        write_dataset(d, ev, cl)


def dataset_to_text(d: Dataset):
    ev, cl = io.StringIO(), io.StringIO()
    write_dataset(d, ev, cl)
    return ev.getvalue(), cl.getvalue()


# -- feature matrices -----------------------------------------------------------


def format_number(v: float) -> str:
    """Shortest text that reads back as exactly ``v``."""
    return repr(float(v))


def format_display(v, digits: int = 2) -> str:
    """Half-up rounding to ``digits`` decimals, printing exact zero as ``0``.

    Display only: matrices keep full precision.
    """
    from decimal import ROUND_HALF_UP, Decimal
    from fractions import Fraction

    if isinstance(v, Relation):
        return v.value
    exact = Fraction(v)
    if exact == 0:
        return "0"
    q = Decimal(exact.numerator) / Decimal(exact.denominator)
    return str(q.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP))


def write_feature_matrix(m: FeatureMatrix, sink: TextIO) -> None:
    sink.write(",".join(("id",) + m.feature_names + ("class",)) + "\n")
    for rid, row, cls in m.rows():
        cells = [
            v.value if k is ColumnKind.RELATION else format_number(v)
            for v, k in zip(row, m.column_kinds)
        ]
        sink.write(",".join([rid] + cells + [cls]) + "\n")


def feature_matrix_to_text(m: FeatureMatrix) -> str:
    buf = io.StringIO()
    write_feature_matrix(m, buf)
    return buf.getvalue()


def _as_number(text):
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def read_feature_matrix(source: TextIO) -> FeatureMatrix:
    """Read a feature CSV.

    A column is numeric when every cell parses as a finite number, except that
    a column made only of the literal ``0`` is a relation column (the writer
    emits numeric zero as ``0.0``, and an all-absent pair column as ``0``).
    """
    src = _name(source)
    lines = list(_data_lines(source))
    if not lines:
        raise ParseError("empty feature file", None, src)
    hline, header = lines[0]
    if len(header) < 2 or header[0] != "id" or header[-1] != "class":
        raise ParseError("header must be id,<features...>,class", hline, src)
    names = header[1:-1]
    width = len(header)
    ids, raw, classes = [], [], []
    seen = {}
    for lineno, fields in lines[1:]:
        if len(fields) != width:
            raise ParseError(
                f"row has {len(fields)} fields, header has {width}", lineno, src
            )
        if fields[0] in seen:
            raise ParseError(
                f"duplicate id {fields[0]!r} (first on line {seen[fields[0]]})", lineno, src
            )
        seen[fields[0]] = lineno
        ids.append(fields[0])
        raw.append((lineno, fields[1:-1]))
        classes.append(fields[-1])

    kinds = []
    for j in range(len(names)):
        col = [cells[j] for _, cells in raw]
        numeric = all(_as_number(c) is not None for c in col)
        if numeric and col and all(c == Relation.NONE.value for c in col):
            numeric = False
        kinds.append(ColumnKind.NUMERIC if numeric else ColumnKind.RELATION)

    values = []
    for lineno, cells in raw:
        row = []
        for c, k, name in zip(cells, kinds, names):
            if k is ColumnKind.NUMERIC:
                row.append(float(c))
            else:
                try:
                    row.append(Relation.from_token(c))
                except ValueError:
                    raise ParseError(
                        f"unknown relation token {c!r} in column {name!r}", lineno, src
                    ) from None
        values.append(row)
    try:
        return FeatureMatrix(names, kinds, ids, values, classes)
    except ValidityError as exc:
        raise ParseError(str(exc), None, src) from None


def feature_matrix_from_text(text: str) -> FeatureMatrix:
    return read_feature_matrix(io.StringIO(text))
