"""Monotone submodular objectives and exhaustive checks of their properties.

Every objective exposes ``value(X)`` for a single subset and ``values(F)`` for a
boolean matrix whose rows are indicator vectors; the second form is what the
brute-force solvers and the exact expectation routines use.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import GroundSet, all_masks, indicator, subset

TOL = 1e-9
MAX_AXIOM_N = 20
MAX_LEMMA_N = 15


class UniverseTooLarge(ValueError):
    pass


class Objective:
    kind = "abstract"
    universe: GroundSet

    @property
    def n(self) -> int:
        return self.universe.n

    def values(self, F: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, X: Iterable[int]) -> float:
        X = self.universe.check(X)
        return float(self.values(indicator(X, self.n)[None, :])[0])

    def restrict(self, mask: Iterable[int]) -> "RestrictedObjective":
        return RestrictedObjective(self, self.universe.check(mask))

    @property
    def is_linear(self) -> bool:
        return False


class LinearObjective(Objective):
    kind = "linear"

    def __init__(self, weights: Sequence[float]):
        w = tuple(float(x) for x in weights)
        if any(x < 0 for x in w):
            raise ValueError("linear weights must be nonnegative")
        self.weights = w
        self.universe = GroundSet(len(w))
        self._w = np.array(w, dtype=float)

    def values(self, F):
        return np.asarray(F, dtype=float) @ self._w

    @property
    def is_linear(self):
        return True

    def to_dict(self):
        return {"kind": "linear", "weights": list(self.weights)}


class CoverageObjective(Objective):
    """Weighted coverage: element ``e`` covers the items in ``sets[e]``."""

    kind = "coverage"

    def __init__(self, sets: Sequence[Iterable[int]], item_weights: Sequence[float] | None = None):
        sets = tuple(frozenset(int(i) for i in s) for s in sets)
        n_items = max((max(s) + 1 for s in sets if s), default=0)
        if item_weights is None:
            item_weights = [1.0] * n_items
        item_weights = tuple(float(x) for x in item_weights)
        if len(item_weights) < n_items:
            raise ValueError("item index exceeds number of item weights")
        if any(x < 0 for x in item_weights):
            raise ValueError("item weights must be nonnegative")
        inc = np.zeros((len(sets), len(item_weights)), dtype=np.int64)
        for e, s in enumerate(sets):
            inc[e, sorted(s)] = 1
        self.sets = sets
        self.item_weights = item_weights
        self.universe = GroundSet(len(sets))
        self._inc = inc
        self._iw = np.array(item_weights, dtype=float)

    def values(self, F):
        covered = (np.asarray(F, dtype=np.int64) @ self._inc) > 0
        return covered.astype(float) @ self._iw

    def to_dict(self):
        return {
            "kind": "coverage",
            "sets": [sorted(s) for s in self.sets],
            "item_weights": list(self.item_weights),
        }


class TableObjective(Objective):
    """Explicit value table indexed by bit mask (bit ``e`` set iff ``e`` in X)."""

    kind = "explicit-table"

    def __init__(self, table: Sequence[float]):
        table = tuple(float(x) for x in table)
        n = len(table).bit_length() - 1
        if len(table) != 1 << n:
            raise ValueError("table length must be a power of two")
        self.table = table
        self.universe = GroundSet(n)
        self._tab = np.array(table, dtype=float)
        self._bits = 1 << np.arange(n, dtype=np.int64)

    @classmethod
    def from_function(cls, n: int, fn) -> "TableObjective":
        F = all_masks(n)
        return cls([float(fn(frozenset(np.flatnonzero(row).tolist()))) for row in F])

    @classmethod
    def from_sets(cls, n: int, values: dict) -> "TableObjective":
        """Build from ``{frozenset: value}``; subsets not listed get value 0."""
        tab = [0.0] * (1 << n)
        for X, v in values.items():
            m = 0
            for e in X:
                m |= 1 << e
            tab[m] = float(v)
        return cls(tab)

    def values(self, F):
        F = np.asarray(F, dtype=np.int64)
        return self._tab[F @ self._bits] if F.shape[1] else np.full(F.shape[0], self._tab[0])

    def to_dict(self):
        return {"kind": "explicit-table", "table": list(self.table)}


class RestrictedObjective(Objective):
    """``X -> base(X & mask)``."""

    kind = "restricted"

    def __init__(self, base: Objective, mask: Iterable[int]):
        self.base = base
        self.mask = subset(mask)
        self.universe = base.universe
        self._m = indicator(self.mask, base.n)

    def values(self, F):
        return self.base.values(np.asarray(F, dtype=bool) & self._m)

    @property
    def is_linear(self):
        return self.base.is_linear


class ShiftedObjective(Objective):
    """``S -> f(anchor | S) - f(anchor)``; normalized, monotone and submodular when f is."""

    kind = "shifted"

    def __init__(self, base: Objective, anchor: Iterable[int]):
        self.base = base
        self.universe = base.universe
        self._a = indicator(subset(anchor), base.n)
        self._fa = float(base.values(self._a[None, :])[0])

    def values(self, F):
        return self.base.values(np.asarray(F, dtype=bool) | self._a) - self._fa


def objective_from_dict(d: dict) -> Objective:
    kind = d.get("kind")
    if kind == "linear":
        return LinearObjective(d["weights"])
    if kind == "coverage":
        return CoverageObjective(d["sets"], d.get("item_weights"))
    if kind == "explicit-table":
        return TableObjective(d["table"])
    raise ValueError(f"unknown objective kind {kind!r}")


def evaluate(f: Objective, X) -> float:
    return f.value(X)


def marginal_gain(f: Objective, X, e: int) -> float:
    X = f.universe.check(X)
    if e in X:
        raise ValueError(f"element {e} already in X")
    return f.value(X | {e}) - f.value(X)


@dataclass(frozen=True)
class AxiomReport:
    normalized: bool
    monotone: bool
    submodular: bool

    @property
    def ok(self) -> bool:
        return self.normalized and self.monotone and self.submodular


def _table(f: Objective, limit: int) -> np.ndarray:
    if f.n > limit:
        raise UniverseTooLarge(f"exhaustive check limited to {limit} elements, got {f.n}")
    return f.values(all_masks(f.n))


def check_axioms(f: Objective, tol: float = TOL) -> AxiomReport:
    """Exhaustive normalization / monotonicity / submodularity check.

    Submodularity is tested through the pairwise form
    ``f(X+a) + f(X+b) >= f(X+a+b) + f(X)`` over all X and a, b not in X,
    which is equivalent to diminishing returns over all X <= Y, e not in Y.
    """
    n = f.n
    vals = _table(f, MAX_AXIOM_N)
    idx = np.arange(1 << n, dtype=np.int64)
    normalized = abs(vals[0]) <= tol
    monotone = True
    submodular = True
    for a in range(n):
        without_a = idx[(idx >> a) & 1 == 0]
        if np.any(vals[without_a | (1 << a)] < vals[without_a] - tol):
            monotone = False
        for b in range(a + 1, n):
            base = without_a[(without_a >> b) & 1 == 0]
            lhs = vals[base | (1 << a)] + vals[base | (1 << b)]
            rhs = vals[base | (1 << a) | (1 << b)] + vals[base]
            if np.any(lhs < rhs - tol):
                submodular = False
                break
    return AxiomReport(bool(normalized), monotone, submodular)


def _product_weights(marginals: np.ndarray) -> np.ndarray:
    n = marginals.size
    F = all_masks(n)
    return np.prod(np.where(F, marginals, 1.0 - marginals), axis=1)


def _marginals(f: Objective, marginals) -> np.ndarray:
    m = np.broadcast_to(np.asarray(marginals, dtype=float), (f.n,)).copy()
    if np.any((m < 0) | (m > 1)):
        raise ValueError("marginals must lie in [0, 1]")
    return m


def expected_value(f: Objective, marginals) -> float:
    """E[f(S)] for S drawn from the product distribution with the given marginals."""
    if f.n > MAX_LEMMA_N:
        raise UniverseTooLarge(f"exact expectation limited to {MAX_LEMMA_N} elements, got {f.n}")
    m = _marginals(f, marginals)
    return float(_product_weights(m) @ f.values(all_masks(f.n)))


def verify_covering_lemma(f: Objective, marginals) -> float:
    """Return E[f(S)] - alpha * f(E) where alpha is the smallest marginal of S."""
    m = _marginals(f, marginals)
    alpha = float(m.min()) if m.size else 1.0
    full = f.value(range(f.n))
    return expected_value(f, m) - alpha * full


def verify_covering_complement_lemma(f: Objective, marginals) -> float:
    """Return beta * f(E) - E[f(E) - f(E \\ T)] where beta is the largest marginal of T."""
    m = _marginals(f, marginals)
    beta = float(m.max()) if m.size else 0.0
    full = f.value(range(f.n))
    # E \ T has marginals 1 - m
    loss = full - expected_value(f, 1.0 - m)
    return beta * full - loss
