"""Ground sets, activation scenarios, query transcripts and seeded randomness.

Subsets are plain ``frozenset`` objects of dense integer ids ``0..n-1``. The
helpers here convert between those and integer bit masks, which is what the
exhaustive enumerations elsewhere in the package work with.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Subset = frozenset


def subset(items: Iterable[int] = ()) -> frozenset:
    return frozenset(int(i) for i in items)


def to_mask(X: Iterable[int]) -> int:
    m = 0
    for e in X:
        m |= 1 << e
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return frozenset(out)


def all_masks(n: int) -> np.ndarray:
    """Boolean matrix whose row ``m`` is the indicator vector of bit mask ``m``."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def indicator(X: Iterable[int], n: int) -> np.ndarray:
    v = np.zeros(n, dtype=bool)
    v[list(X)] = True
    return v


def sorted_ids(X: Iterable[int]) -> list[int]:
    return sorted(int(e) for e in X)


@dataclass(frozen=True)
class GroundSet:
    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("ground set size must be nonnegative")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("need exactly one label per element")

    @property
    def elements(self) -> frozenset:
        return frozenset(range(self.n))

    def check(self, X: Iterable[int]) -> frozenset:
        X = subset(X)
        bad = [e for e in X if not 0 <= e < self.n]
        if bad:
            raise ValueError(f"elements {sorted(bad)} outside ground set of size {self.n}")
        return X

    def label(self, e: int) -> str:
        return self.labels[e] if self.labels else str(e)


class RandomSource:
    """Seeded random stream with reproducible, independent child streams.

    ``child(label)`` derives a new stream from ``(seed, path, label)`` only,
    so it does not depend on how much of the parent stream was consumed.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(path)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.path))
        )

    @staticmethod
    def _key(label) -> int:
        digest = hashlib.blake2b(repr(label).encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little") & 0x7FFFFFFF

    def child(self, label) -> "RandomSource":
        return RandomSource(self.seed, self.path + (self._key(label),))

    def derived_seed(self) -> int:
        """A 64-bit integer seed unique to this stream's position in the tree."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return int(ss.generate_state(1, dtype=np.uint64)[0])

    def random(self, size=None):
        return self.generator.random(size)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, path={self.path})"


@dataclass(frozen=True)
class ActivationScenario:
    probs: tuple[float, ...]
    active: frozenset

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def p_min(self) -> float:
        return min(self.probs) if self.probs else 1.0

    def is_active(self, e: int) -> bool:
        return e in self.active

    def to_dict(self) -> dict:
        return {"probs": list(self.probs), "active": sorted_ids(self.active)}

    @classmethod
    def from_dict(cls, d: dict) -> "ActivationScenario":
        return cls(tuple(float(p) for p in d["probs"]), subset(d["active"]))


def _check_probs(probs: Sequence[float]) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1:
        raise ValueError("probs must be one-dimensional")
    bad = np.flatnonzero((probs <= 0) | (probs > 1) | ~np.isfinite(probs))
    if bad.size:
        raise ValueError(f"activation probabilities must lie in (0, 1]; bad entries at {bad.tolist()}")
    return probs


def sample_activation(probs: Sequence[float], rng: RandomSource) -> ActivationScenario:
    probs = _check_probs(probs)
    u = rng.generator.random(probs.size)
    active = frozenset(np.flatnonzero(u < probs).tolist())
    return ActivationScenario(tuple(probs.tolist()), active)


def uniform_probs(n: int, p: float) -> tuple[float, ...]:
    return tuple(_check_probs([p] * n).tolist())


@dataclass(frozen=True)
class KnowledgeState:
    known_active: frozenset
    known_inactive: frozenset
    unknown: frozenset


@dataclass
class QueryTranscript:
    """Record of query rounds and what they revealed.

    Re-querying an element is allowed and leaves its revealed state alone.
    """

    n: int
    rounds: list = field(default_factory=list)
    revealed: dict = field(default_factory=dict)

    @property
    def adaptivity(self) -> int:
        return sum(1 for r in self.rounds if r)

    @property
    def queried(self) -> frozenset:
        return frozenset(self.revealed)

    @property
    def queries_total(self) -> int:
        return len(self.revealed)

    def apply_round(self, targets: Iterable[int], scenario: ActivationScenario) -> "QueryTranscript":
        targets = subset(targets)
        bad = [e for e in targets if not 0 <= e < self.n]
        if bad:
            raise ValueError(f"query targets {sorted(bad)} outside ground set")
        self.rounds.append(targets)
        for e in sorted(targets):
            if e not in self.revealed:
                self.revealed[e] = e in scenario.active
        return self

    def knowledge_state(self) -> KnowledgeState:
        act = frozenset(e for e, a in self.revealed.items() if a)
        inact = frozenset(e for e, a in self.revealed.items() if not a)
        unknown = frozenset(range(self.n)) - act - inact
        return KnowledgeState(act, inact, unknown)


def apply_round(transcript: QueryTranscript, targets, scenario: ActivationScenario) -> QueryTranscript:
    return transcript.apply_round(targets, scenario)


def knowledge_state(transcript: QueryTranscript) -> KnowledgeState:
    return transcript.knowledge_state()
