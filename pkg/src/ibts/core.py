"""Domain types and pure kernels for interval-based temporal sequences.

An event interval is a labelled span of time ``(label, begin, finish)``
with integer time points. An e-sequence groups intervals under one instance
id and keeps them in canonical order: ascending begin, ties broken by label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import ValidityError

#: Characters that may never appear in an event label. ``,`` and ``"`` clash
#: with CSV, ``:`` separates pair column names and ``=`` separates one-hot
#: indicator names.
RESERVED_LABEL_CHARS = frozenset(',:="\r\n')


class Relation(str, enum.Enum):
    """Allen's thirteen interval relations plus ``NONE`` for a missing pair.

    The enum value is the canonical machine-readable token. Inverses carry an
    ``i`` suffix; ``NONE`` is written as ``0``.
    """

    EQUALS = "q"
    BEFORE = "b"
    MEETS = "m"
    OVERLAPS = "o"
    CONTAINS = "c"
    STARTS = "s"
    FINISHED_BY = "f"
    AFTER = "bi"
    MET_BY = "mi"
    OVERLAPPED_BY = "oi"
    DURING = "ci"
    STARTED_BY = "si"
    FINISHES = "fi"
    NONE = "0"

    def __str__(self):
        return self.value

    @property
    def inverse(self) -> "Relation":
        return _INVERSE[self]

    @property
    def is_primary(self) -> bool:
        return self in PRIMARY_RELATIONS

    @classmethod
    def from_token(cls, token: str) -> "Relation":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"unknown relation token {token!r}") from None


PRIMARY_RELATIONS = (
    Relation.EQUALS,
    Relation.BEFORE,
    Relation.MEETS,
    Relation.OVERLAPS,
    Relation.CONTAINS,
    Relation.STARTS,
    Relation.FINISHED_BY,
)
INVERSE_RELATIONS = (
    Relation.AFTER,
    Relation.MET_BY,
    Relation.OVERLAPPED_BY,
    Relation.DURING,
    Relation.STARTED_BY,
    Relation.FINISHES,
)
#: The thirteen proper relations, primaries first.
ALLEN_RELATIONS = PRIMARY_RELATIONS + INVERSE_RELATIONS

_INVERSE = {Relation.EQUALS: Relation.EQUALS, Relation.NONE: Relation.NONE}
for _p, _i in zip(PRIMARY_RELATIONS[1:], INVERSE_RELATIONS):
    _INVERSE[_p] = _i
    _INVERSE[_i] = _p


def inverse(r: Relation) -> Relation:
    return _INVERSE[r]


def check_label(label) -> str:
    if not isinstance(label, str) or not label:
        raise ValidityError(f"event label must be a non-empty string, got {label!r}")
    bad = RESERVED_LABEL_CHARS.intersection(label)
    if bad or label != label.strip():
        raise ValidityError(f"event label {label!r} contains reserved characters")
    return label


@dataclass(frozen=True, slots=True, order=True)
class EventInterval:
    """One labelled interval. Ordering follows the canonical e-sequence order."""

    begin: int
    label: str
    finish: int

    def __init__(self, label: str, begin: int, finish: int):
        # Field order above drives ``order=True`` (begin, then label); the
        # constructor keeps the natural (label, begin, finish) signature.
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "begin", begin)
        object.__setattr__(self, "finish", finish)
        self.__post_init__()

    def __post_init__(self):
        check_label(self.label)
        for name in ("begin", "finish"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidityError(f"{name} must be an integer, got {v!r}")
        if self.begin < 0:
            raise ValidityError(f"begin must be non-negative, got {self.begin}")
        if not self.begin < self.finish:
            raise ValidityError(
                f"interval {self.label} [{self.begin}, {self.finish}] needs begin < finish"
            )

    def __repr__(self):
        return f"EventInterval({self.label!r}, {self.begin}, {self.finish})"

    def __iter__(self):
        return iter((self.label, self.begin, self.finish))

    @property
    def duration(self) -> int:
        return self.finish - self.begin

    def shifted(self, offset: int) -> "EventInterval":
        return EventInterval(self.label, self.begin + offset, self.finish + offset)


@dataclass(frozen=True, slots=True)
class ESequence:
    """An identified e-sequence.

    The constructor canonicalises interval order, so callers may pass the
    intervals in any order. Same-label intervals must not overlap; touching at
    an endpoint is allowed.
    """

    id: str
    intervals: tuple

    def __init__(self, id: str, intervals: Iterable[EventInterval]):
        ivs = tuple(sorted(intervals))
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "intervals", ivs)
        if not isinstance(id, str) or not id:
            raise ValidityError(f"sequence id must be a non-empty string, got {id!r}")
        if not ivs:
            raise ValidityError(f"sequence {id!r} is empty")
        last = {}
        for e in ivs:
            if not isinstance(e, EventInterval):
                raise ValidityError(f"sequence {id!r} holds a non-interval {e!r}")
            prev = last.get(e.label)
            if prev is not None and prev.finish > e.begin:
                raise ValidityError(
                    f"sequence {id!r}: intervals {prev!r} and {e!r} overlap"
                )
            last[e.label] = e

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def labels(self) -> frozenset:
        return frozenset(e.label for e in self.intervals)

    @property
    def start(self) -> int:
        # intervals are sorted by begin
        return self.intervals[0].begin

    @property
    def end(self) -> int:
        return max(e.finish for e in self.intervals)

    def shifted(self, offset: int) -> "ESequence":
        return ESequence(self.id, (e.shifted(offset) for e in self.intervals))


def duration(e: EventInterval) -> int:
    return e.finish - e.begin


def sequence_duration(s: ESequence) -> int:
    """Span between the earliest begin and the latest finish of ``s``."""
    ivs = getattr(s, "intervals", s)
    if not ivs:
        raise ValidityError("sequence duration of an empty sequence is undefined")
    return max(e.finish for e in ivs) - min(e.begin for e in ivs)


def allen_relation(e1: EventInterval, e2: EventInterval) -> Relation:
    """Relation of ``e1`` relative to ``e2``; exactly one of thirteen holds."""
    b1, f1, b2, f2 = e1.begin, e1.finish, e2.begin, e2.finish
    if b1 == b2 and f1 == f2:
        return Relation.EQUALS
    if f1 < b2:
        return Relation.BEFORE
    if f2 < b1:
        return Relation.AFTER
    if f1 == b2:
        return Relation.MEETS
    if f2 == b1:
        return Relation.MET_BY
    if b1 == b2:
        return Relation.STARTS if f1 < f2 else Relation.STARTED_BY
    if f1 == f2:
        return Relation.FINISHED_BY if b1 < b2 else Relation.FINISHES
    if b1 < b2:
        # b2 < f1 holds here (before/meets excluded)
        return Relation.OVERLAPS if f1 < f2 else Relation.CONTAINS
    return Relation.OVERLAPPED_BY if f2 < f1 else Relation.DURING


def label_durations(s: ESequence) -> dict:
    """Total duration per label in ``s``."""
    out = {}
    for e in s.intervals:
        out[e.label] = out.get(e.label, 0) + e.finish - e.begin
    return out


def relative_frequency(s: ESequence, label: str) -> Fraction:
    """Duration-weighted frequency of ``label`` in ``s`` as an exact fraction."""
    total = sum(e.finish - e.begin for e in s.intervals if e.label == label)
    return Fraction(total, sequence_duration(s))


def first_occurrence(s: ESequence, label: str) -> Optional[EventInterval]:
    for e in s.intervals:
        if e.label == label:
            return e
    return None


def first_occurrences(s: ESequence) -> dict:
    """Map each label of ``s`` to its earliest interval."""
    out = {}
    for e in s.intervals:
        out.setdefault(e.label, e)
    return out


def pair_relation(s: ESequence, l1: str, l2: str) -> Relation:
    """Relation between the first ``l1`` and the first ``l2`` of ``s``."""
    e1 = first_occurrence(s, l1)
    e2 = first_occurrence(s, l2)
    if e1 is None or e2 is None:
        return Relation.NONE
    return allen_relation(e1, e2)


def make_sequence(id, rows: Sequence) -> ESequence:
    """Build an ``ESequence`` from ``(label, begin, finish)`` triples."""
    return ESequence(str(id), (EventInterval(*r) for r in rows))
