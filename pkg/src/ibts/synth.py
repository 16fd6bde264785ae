"""Seeded synthetic e-sequence datasets with a planted class rule.

Each sequence is generated for a target truth value of the rule (targets
alternate, so classes are balanced before noise) and re-drawn until the rule
evaluates to that target. ``label_noise_rate`` then flips the class with the
given probability.

Saturated labels occupy the whole horizon (starting at 0 or 1) in every
sequence; their support sits just below 1. They model labels present
everywhere that the support filter should remove.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import ALLEN_RELATIONS, ESequence, EventInterval, Relation, allen_relation, first_occurrence, relative_frequency
from .errors import GenerationError, ParameterError
from .features import as_fraction
from .ingest import Dataset

MAX_ATTEMPTS = 1000


def label_name(i: int) -> str:
    """Spreadsheet-style names: A..Z, AA, AB, ..."""
    name = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        name = chr(ord("A") + r) + name
    return name


@dataclass(frozen=True)
class PresenceRule:
    label: str

    def holds(self, s: ESequence) -> bool:
        return self.label in s.labels

    @property
    def labels(self):
        return (self.label,)

    def __str__(self):
        return f"presence:{self.label}"


@dataclass(frozen=True)
class RelationRule:
    first: str
    second: str
    relation: Relation

    def holds(self, s: ESequence) -> bool:
        e1 = first_occurrence(s, self.first)
        e2 = first_occurrence(s, self.second)
        return e1 is not None and e2 is not None and allen_relation(e1, e2) is self.relation

    @property
    def labels(self):
        return (self.first, self.second)

    def __str__(self):
        return f"relation:{self.first}:{self.second}:{self.relation.value}"


@dataclass(frozen=True)
class FrequencyRule:
    label: str
    threshold: float

    def holds(self, s: ESequence) -> bool:
        return relative_frequency(s, self.label) >= as_fraction(self.threshold)

    @property
    def labels(self):
        return (self.label,)

    def __str__(self):
        return f"frequency:{self.label}:{self.threshold}"


Rule = Union[PresenceRule, RelationRule, FrequencyRule]


def parse_rule(text: str) -> Rule:
    """Parse ``presence:L``, ``relation:L1:L2:REL`` or ``frequency:L:THETA``."""
    kind, _, rest = text.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "presence" and len(parts) == 1:
            return PresenceRule(parts[0])
        if kind == "relation" and len(parts) == 3:
            return RelationRule(parts[0], parts[1], Relation.from_token(parts[2]))
        if kind == "frequency" and len(parts) == 2:
            return FrequencyRule(parts[0], float(parts[1]))
    except ValueError as exc:
        raise ParameterError(f"bad rule {text!r}: {exc}") from None
    raise ParameterError(
        f"bad rule {text!r}; expected presence:L, relation:L1:L2:REL or frequency:L:THETA"
    )


@dataclass(frozen=True)
class SynthSpec:
    rule: Rule
    sequence_count: int = 200
    alphabet_size: int = 6
    intervals_per_sequence: tuple = (3, 8)
    time_horizon: int = 100
    label_noise_rate: float = 0.0
    saturated_labels: int = 0
    seed: int = 0
    classes: tuple = ("pos", "neg")  # (rule holds, rule fails)

    def __post_init__(self):
        lo, hi = self.intervals_per_sequence
        if self.sequence_count < 1:
            raise ParameterError("sequence_count must be >= 1")
        if not 0 <= self.saturated_labels < self.alphabet_size:
            raise ParameterError("saturated_labels must be in [0, alphabet_size)")
        if not 1 <= lo <= hi:
            raise ParameterError(f"intervals_per_sequence must satisfy 1 <= min <= max, got {(lo, hi)}")
        if self.time_horizon < 4:
            raise ParameterError("time_horizon must be >= 4")
        if not 0 <= self.label_noise_rate < 1:
            raise ParameterError("label_noise_rate must lie in [0, 1)")
        if len(self.classes) != 2 or self.classes[0] == self.classes[1]:
            raise ParameterError("classes must be two distinct tokens")
        free = set(self.free_labels)
        missing = [l for l in self.rule.labels if l not in self.alphabet]
        if missing:
            raise ParameterError(
                f"rule {self.rule} refers to labels {missing} outside the alphabet "
                f"{self.alphabet[0]}..{self.alphabet[-1]}"
            )
        pinned = [l for l in self.rule.labels if l not in free]
        if pinned:
            raise ParameterError(f"rule labels {pinned} are saturated and cannot carry a rule")
        if isinstance(self.rule, PresenceRule) and self.alphabet_size < 2:
            raise ParameterError("a presence rule needs alphabet_size >= 2")
        if isinstance(self.rule, RelationRule) and self.rule.first == self.rule.second:
            raise ParameterError("a relation rule needs two distinct labels")
        if isinstance(self.rule, FrequencyRule) and not 0 < self.rule.threshold < 1:
            raise ParameterError("frequency threshold must lie in (0, 1)")

    @property
    def alphabet(self) -> tuple:
        return tuple(label_name(i) for i in range(self.alphabet_size))

    @property
    def free_labels(self) -> tuple:
        return self.alphabet[: self.alphabet_size - self.saturated_labels]

    @property
    def saturated(self) -> tuple:
        return self.alphabet[self.alphabet_size - self.saturated_labels:]


def _pair_with(rng, relation: Relation, horizon: int):
    """Two intervals in ``[0, horizon]`` standing in ``relation``."""
    if relation.is_primary:
        t0, t1, t2, t3 = (int(t) for t in np.sort(rng.choice(horizon + 1, size=4, replace=False)))
        return {
            Relation.EQUALS: ((t0, t1), (t0, t1)),
            Relation.BEFORE: ((t0, t1), (t2, t3)),
            Relation.MEETS: ((t0, t1), (t1, t2)),
            Relation.OVERLAPS: ((t0, t2), (t1, t3)),
            Relation.CONTAINS: ((t0, t3), (t1, t2)),
            Relation.STARTS: ((t0, t1), (t0, t2)),
            Relation.FINISHED_BY: ((t0, t2), (t1, t2)),
        }[relation]
    a, b = _pair_with(rng, relation.inverse, horizon)
    return b, a


class _Builder:
    """Accumulates intervals for one sequence, enforcing same-label disjointness."""

    def __init__(self, horizon):
        self.horizon = horizon
        self.intervals = []
        self.not_before = {}

    def fits(self, label, b, f):
        if b <= self.not_before.get(label, -1):
            return False
        return all(e.finish <= b or f <= e.begin for e in self.intervals if e.label == label)

    def add(self, label, b, f):
        self.intervals.append(EventInterval(label, b, f))

    def add_random(self, rng, pool):
        H = self.horizon
        for _ in range(MAX_ATTEMPTS):
            label = pool[int(rng.integers(len(pool)))]
            b = int(rng.integers(0, H))
            d = min(int(rng.geometric(min(1.0, 8.0 / H))), H - b)
            if self.fits(label, b, b + d):
                self.add(label, b, b + d)
                return
        raise GenerationError(f"could not place a non-overlapping interval in {MAX_ATTEMPTS} attempts")


def _attempt(spec: SynthSpec, rng, target: bool, sid: str) -> ESequence:
    H = spec.time_horizon
    rule = spec.rule
    bld = _Builder(H)
    for label in spec.saturated:
        bld.add(label, int(rng.integers(0, 2)), H)
    pool = list(spec.free_labels)
    planted = 0
    if isinstance(rule, PresenceRule):
        if target:
            b = int(rng.integers(0, H))
            d = min(int(rng.geometric(min(1.0, 8.0 / H))), H - b)
            bld.add(rule.label, b, b + d)
            planted = 1
        else:
            pool.remove(rule.label)
    elif isinstance(rule, RelationRule):
        if target:
            rel = rule.relation
        else:
            others = [r for r in ALLEN_RELATIONS if r is not rule.relation]
            rel = others[int(rng.integers(len(others)))]
        (b1, f1), (b2, f2) = _pair_with(rng, rel, H)
        bld.add(rule.first, b1, f1)
        bld.add(rule.second, b2, f2)
        # later duplicates must not displace the planted first occurrences
        bld.not_before = {rule.first: b1, rule.second: b2}
        planted = 2
    elif isinstance(rule, FrequencyRule) and target:
        length = int(rng.integers(int(np.ceil(rule.threshold * H)), H + 1))
        b = int(rng.integers(0, H - length + 1))
        bld.add(rule.label, b, b + length)
        planted = 1
    if not pool:
        raise GenerationError("no labels left to draw filler intervals from")
    lo, hi = spec.intervals_per_sequence
    count = int(rng.integers(lo, hi + 1))
    for _ in range(max(0, count - planted)):
        bld.add_random(rng, pool)
    return ESequence(sid, bld.intervals)


def generate(spec: SynthSpec) -> Dataset:
    """Generate a dataset; identical specs give identical datasets."""
    seqs, classes = [], {}
    pos, neg = spec.classes
    for i in range(spec.sequence_count):
        rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed), spawn_key=(i,)))
        target = i % 2 == 0
        sid = str(i + 1)
        for _ in range(MAX_ATTEMPTS):
            s = _attempt(spec, rng, target, sid)
            if spec.rule.holds(s) == target:
                break
        else:
            raise GenerationError(
                f"rule {spec.rule} could not be made {'true' if target else 'false'} "
                f"for sequence {sid} in {MAX_ATTEMPTS} attempts"
            )
        label = pos if target else neg
        if spec.label_noise_rate and rng.random() < spec.label_noise_rate:
            label = neg if target else pos
        seqs.append(s)
        classes[sid] = label
    return Dataset(seqs, classes)
