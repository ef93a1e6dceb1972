"""Feasible domains, matroid oracles and k-exchange certificates.

All domains work on dense element ids ``0..n-1``. ``enumerate_feasible`` walks
the feasible sets depth-first in increasing element order, so the returned
list is sorted lexicographically by sorted member list; the brute-force solver
relies on that order for tie-breaking.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .core import GroundSet, all_masks, subset

TOL = 1e-9
MAX_ENUM = 22
MAX_MATROID_CHECK = 15
MAX_CERT_CHECK = 12


class DomainError(ValueError):
    pass


# --------------------------------------------------------------------------
# matroids


class MatroidOracle:
    kind = "abstract"
    n: int

    def is_independent(self, X: frozenset) -> bool:
        raise NotImplementedError

    def rank(self, X: Iterable[int] | None = None) -> int:
        X = range(self.n) if X is None else X
        basis: set = set()
        for e in sorted(X):
            if self.is_independent(frozenset(basis | {e})):
                basis.add(e)
        return len(basis)

    def is_base(self, X: frozenset) -> bool:
        return self.is_independent(X) and len(X) == self.full_rank

    @cached_property
    def full_rank(self) -> int:
        return self.rank()


class UniformMatroid(MatroidOracle):
    kind = "uniform"

    def __init__(self, n: int, r: int):
        if r < 0:
            raise ValueError("rank must be nonnegative")
        self.n, self.r = int(n), int(r)

    def is_independent(self, X):
        return len(X) <= self.r

    def to_dict(self):
        return {"kind": "uniform", "n": self.n, "r": self.r}


class PartitionMatroid(MatroidOracle):
    kind = "partition"

    def __init__(self, blocks: Sequence[Iterable[int]], capacities: Sequence[int], n: int | None = None):
        self.blocks = tuple(subset(b) for b in blocks)
        self.capacities = tuple(int(c) for c in capacities)
        if len(self.blocks) != len(self.capacities):
            raise ValueError("one capacity per block")
        seen: set = set()
        for b in self.blocks:
            if seen & b:
                raise ValueError("partition blocks must be disjoint")
            seen |= b
        self.n = int(n) if n is not None else max(seen, default=-1) + 1
        self._block_of = {e: i for i, b in enumerate(self.blocks) for e in b}

    def is_independent(self, X):
        counts = [0] * len(self.blocks)
        for e in X:
            i = self._block_of.get(e)
            if i is None:
                continue  # elements outside every block are free
            counts[i] += 1
            if counts[i] > self.capacities[i]:
                return False
        return True

    def to_dict(self):
        return {
            "kind": "partition",
            "blocks": [sorted(b) for b in self.blocks],
            "capacities": list(self.capacities),
            "n": self.n,
        }


class GraphicMatroid(MatroidOracle):
    """Element ``e`` is the edge ``edges[e]``; independent sets are forests."""

    kind = "graphic"

    def __init__(self, edges: Sequence[tuple[int, int]]):
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self.n = len(self.edges)

    def is_independent(self, X):
        parent: dict = {}

        def find(a):
            while parent.get(a, a) != a:
                parent[a] = parent.get(parent[a], parent[a])
                a = parent[a]
            return a

        for e in X:
            u, v = self.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def to_dict(self):
        return {"kind": "graphic", "edges": [list(e) for e in self.edges]}


class ExplicitMatroid(MatroidOracle):
    """Independence given by an explicit list; not validated on construction."""

    kind = "explicit"

    def __init__(self, n: int, independent_sets: Iterable[Iterable[int]]):
        self.n = int(n)
        self.independent_sets = frozenset(subset(s) for s in independent_sets)

    def is_independent(self, X):
        return frozenset(X) in self.independent_sets

    def to_dict(self):
        return {
            "kind": "explicit",
            "n": self.n,
            "independent": sorted(sorted(s) for s in self.independent_sets),
        }


def matroid_from_dict(d: dict) -> MatroidOracle:
    kind = d.get("kind")
    if kind == "uniform":
        return UniformMatroid(d["n"], d["r"])
    if kind == "partition":
        return PartitionMatroid(d["blocks"], d["capacities"], d.get("n"))
    if kind == "graphic":
        return GraphicMatroid(d["edges"])
    if kind == "explicit":
        return ExplicitMatroid(d["n"], d["independent"])
    raise ValueError(f"unknown matroid kind {kind!r}")


def verify_matroid_axioms(M: MatroidOracle) -> bool:
    """Exhaustively check the three independence axioms."""
    n = M.n
    if n > MAX_MATROID_CHECK:
        raise DomainError(f"axiom check limited to {MAX_MATROID_CHECK} elements, got {n}")
    ind = [M.is_independent(frozenset(np.flatnonzero(row).tolist())) for row in all_masks(n)]
    if not ind[0]:
        return False
    indep_masks = [m for m in range(1 << n) if ind[m]]
    for m in indep_masks:
        for e in range(n):
            if m >> e & 1 and not ind[m ^ (1 << e)]:
                return False
    pop = [bin(m).count("1") for m in range(1 << n)]
    for a in indep_masks:
        for b in indep_masks:
            if pop[a] < pop[b]:
                if not any(ind[a | (1 << e)] for e in range(n) if (b & ~a) >> e & 1):
                    return False
    return True


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class FeasibleFamily:
    sets: tuple[frozenset, ...]
    matrix: np.ndarray  # rows are indicator vectors, in the order of ``sets``


class Domain:
    kind = "abstract"
    downward_closed = True
    universe: GroundSet

    @property
    def n(self) -> int:
        return self.universe.n

    def is_feasible(self, X) -> bool:
        raise NotImplementedError

    def system_k(self) -> int:
        """k such that the domain is a k-system; used for declared solver factors."""
        raise DomainError(f"no k-system bound known for domain kind {self.kind!r}")

    def _dfs(self, allowed: list[int]) -> list[frozenset]:
        out: list[frozenset] = []

        def rec(current: list[int], start: int):
            out.append(frozenset(current))
            for i in range(start, len(allowed)):
                cand = current + [allowed[i]]
                if self.is_feasible(frozenset(cand)):
                    rec(cand, i + 1)

        if self.is_feasible(frozenset()):
            rec([], 0)
        return out

    def enumerate_feasible(self, allowed: Iterable[int] | None = None) -> list[frozenset]:
        return list(self.family(allowed).sets)

    def max_cardinality(self, allowed: Iterable[int] | None = None) -> int:
        """Size of the largest feasible set."""
        return int(self.family(allowed).matrix.sum(axis=1).max(initial=0))

    def family(self, allowed: Iterable[int] | None = None) -> FeasibleFamily:
        allowed = self.universe.elements if allowed is None else self.universe.check(allowed)
        cache = self.__dict__.setdefault("_family_cache", {})
        fam = cache.get(allowed)
        if fam is None:
            if len(allowed) > MAX_ENUM:
                raise DomainError(f"enumeration limited to {MAX_ENUM} allowed elements, got {len(allowed)}")
            sets = tuple(self._enumerate(sorted(allowed)))
            mat = np.zeros((len(sets), self.n), dtype=bool)
            for i, s in enumerate(sets):
                mat[i, list(s)] = True
            fam = FeasibleFamily(sets, mat)
            cache[allowed] = fam
        return fam

    def _enumerate(self, allowed: list[int]) -> list[frozenset]:
        return self._dfs(allowed)

    def in_relaxed(self, X, gamma: int) -> bool:
        """Membership in the gamma-fold union of the domain."""
        X = subset(X)
        if gamma <= 1 or self.is_feasible(X):
            return self.is_feasible(X)
        if not self.downward_closed:
            raise DomainError("relaxed membership only defined for downward-closed domains")
        items = sorted(X)
        for labels in itertools.product(range(gamma), repeat=len(items)):
            parts = [frozenset(e for e, g in zip(items, labels) if g == j) for j in range(gamma)]
            if all(self.is_feasible(P) for P in parts):
                return True
        return False


class MatchingDomain(Domain):
    """Element ``e`` is the edge ``edges[e]``; feasible sets are matchings."""

    kind = "matching"

    def __init__(self, edges: Sequence[tuple[int, int]]):
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        if any(u == v for u, v in self.edges):
            raise ValueError("self-loops are not allowed")
        self.universe = GroundSet(len(self.edges))

    def is_feasible(self, X):
        seen: set = set()
        for e in X:
            u, v = self.edges[e]
            if u in seen or v in seen:
                return False
            seen.add(u)
            seen.add(v)
        return True

    def system_k(self):
        return 2

    def to_dict(self):
        return {"kind": "matching", "edges": [list(e) for e in self.edges]}


class SetPackingDomain(Domain):
    """Element ``e`` is the set ``sets[e]``; feasible sets are pairwise disjoint."""

    kind = "k-set-packing"

    def __init__(self, sets: Sequence[Iterable[int]]):
        self.sets = tuple(subset(s) for s in sets)
        self.universe = GroundSet(len(self.sets))

    @property
    def k(self) -> int:
        return max((len(s) for s in self.sets), default=1)

    def is_feasible(self, X):
        seen: set = set()
        for e in X:
            s = self.sets[e]
            if seen & s:
                return False
            seen |= s
        return True

    def system_k(self):
        return self.k

    def to_dict(self):
        return {"kind": "k-set-packing", "sets": [sorted(s) for s in self.sets]}


class MatroidDomain(Domain):
    kind = "matroid-independent"

    def __init__(self, matroid: MatroidOracle):
        self.matroid = matroid
        self.universe = GroundSet(matroid.n)

    def is_feasible(self, X):
        return self.matroid.is_independent(frozenset(X))

    def system_k(self):
        return 1

    def to_dict(self):
        return {"kind": "matroid-independent", "matroid": self.matroid.to_dict()}


class MatroidBaseDomain(Domain):
    """Bases of a matroid. Not downward closed."""

    kind = "matroid-base"
    downward_closed = False

    def __init__(self, matroid: MatroidOracle):
        self.matroid = matroid
        self.universe = GroundSet(matroid.n)

    def is_feasible(self, X):
        return self.matroid.is_base(frozenset(X))

    def _enumerate(self, allowed):
        # bases of the matroid restricted to ``allowed``
        indep = MatroidDomain(self.matroid)._dfs(allowed)
        r = max((len(s) for s in indep), default=0)
        return [s for s in indep if len(s) == r]

    def system_k(self):
        return 1

    def to_dict(self):
        return {"kind": "matroid-base", "matroid": self.matroid.to_dict()}


class IntersectionDomain(Domain):
    """Common independent sets of several matroids, kept as separate oracles."""

    kind = "intersection"

    def __init__(self, matroids: Sequence[MatroidOracle]):
        self.matroids = tuple(matroids)
        if not self.matroids:
            raise ValueError("need at least one matroid")
        n = self.matroids[0].n
        if any(M.n != n for M in self.matroids):
            raise ValueError("matroids must share a ground set")
        self.universe = GroundSet(n)

    def is_feasible(self, X):
        X = frozenset(X)
        return all(M.is_independent(X) for M in self.matroids)

    def system_k(self):
        return len(self.matroids)

    def to_dict(self):
        return {"kind": "intersection", "matroids": [M.to_dict() for M in self.matroids]}


class KnapsackDomain(Domain):
    """Sum of sizes at most one."""

    kind = "knapsack"

    def __init__(self, sizes: Sequence[float]):
        self.sizes = tuple(float(c) for c in sizes)
        if any(c <= 0 for c in self.sizes):
            raise ValueError("knapsack sizes must be positive")
        self.universe = GroundSet(len(self.sizes))

    def load(self, X) -> float:
        return sum(self.sizes[e] for e in X)

    def is_feasible(self, X):
        return self.load(X) <= 1.0 + TOL

    def heavy(self, threshold: float = 1 / 3) -> frozenset:
        return frozenset(e for e, c in enumerate(self.sizes) if c > threshold)

    def in_relaxed(self, X, gamma):
        X = subset(X)
        if gamma <= 1:
            return self.is_feasible(X)
        if gamma == 2 and split_two_bins([self.sizes[e] for e in sorted(X)]) is not None:
            return True
        return super().in_relaxed(X, gamma)

    def to_dict(self):
        return {"kind": "knapsack", "sizes": list(self.sizes)}


class CardinalityDomain(Domain):
    kind = "cardinality"

    def __init__(self, n: int, r: int):
        self.universe = GroundSet(int(n))
        self.r = int(r)

    def is_feasible(self, X):
        return len(X) <= self.r

    def system_k(self):
        return 1

    def to_dict(self):
        return {"kind": "cardinality", "n": self.n, "r": self.r}


def split_two_bins(sizes: Sequence[float], capacity: float = 1.0):
    """Lay items end to end on an interval and cut at ``capacity``.

    Returns the two index lists (items ending before the cut, the rest) when
    both fit, else None. Succeeds whenever total <= 5/3 and every item <= 1/3.
    """
    first, second, pos = [], [], 0.0
    for i, c in enumerate(sizes):
        if not second and pos + c <= capacity + TOL:
            first.append(i)
            pos += c
        else:
            second.append(i)
    if sum(sizes[i] for i in second) <= capacity + TOL:
        return first, second
    return None


def domain_from_dict(d: dict) -> Domain:
    kind = d.get("kind")
    if kind == "matching":
        return MatchingDomain(d["edges"])
    if kind == "k-set-packing":
        return SetPackingDomain(d["sets"])
    if kind == "matroid-independent":
        return MatroidDomain(matroid_from_dict(d["matroid"]))
    if kind == "matroid-base":
        return MatroidBaseDomain(matroid_from_dict(d["matroid"]))
    if kind == "intersection":
        return IntersectionDomain([matroid_from_dict(m) for m in d["matroids"]])
    if kind == "knapsack":
        return KnapsackDomain(d["sizes"])
    if kind == "cardinality":
        return CardinalityDomain(d["n"], d["r"])
    raise ValueError(f"unknown domain kind {kind!r}")


def is_feasible(D: Domain, X) -> bool:
    return D.is_feasible(D.universe.check(X))


def enumerate_feasible(D: Domain, allowed=None) -> list[frozenset]:
    return D.enumerate_feasible(allowed)


# --------------------------------------------------------------------------
# k-exchange certificates


@dataclass(frozen=True)
class KExchangeCertificate:
    domain: Domain
    X: frozenset
    Y: frozenset
    collection: dict  # y in Y \ X -> T_y subset of X \ Y
    k: int

    @property
    def added(self) -> frozenset:
        return self.Y - self.X

    @property
    def removed(self) -> frozenset:
        return self.X - self.Y

    def removal(self, S: Iterable[int]) -> frozenset:
        out: frozenset = frozenset()
        for y in S:
            out |= self.collection[y]
        return out

    def verify(self) -> bool:
        """Exhaustively check the three k-exchange properties."""
        ys = sorted(self.added)
        if set(self.collection) != set(ys):
            return False
        if len(ys) > MAX_CERT_CHECK:
            raise DomainError(f"exhaustive certificate check limited to |Y \\ X| <= {MAX_CERT_CHECK}")
        if any(len(T) > self.k or not T <= self.removed for T in self.collection.values()):
            return False
        for x in self.removed:
            if sum(x in T for T in self.collection.values()) > self.k:
                return False
        for r in range(len(ys) + 1):
            for S in itertools.combinations(ys, r):
                if not self.domain.is_feasible((self.X | set(S)) - self.removal(S)):
                    return False
        return True


def k_exchange_certificate(D: Domain, X, Y) -> KExchangeCertificate:
    X, Y = D.universe.check(X), D.universe.check(Y)
    if not (D.is_feasible(X) and D.is_feasible(Y)):
        raise DomainError("X and Y must both be feasible")
    if isinstance(D, MatchingDomain):
        touches = lambda a, b: bool(set(D.edges[a]) & set(D.edges[b]))
        k = 2
    elif isinstance(D, SetPackingDomain):
        touches = lambda a, b: bool(D.sets[a] & D.sets[b])
        k = D.k
    else:
        raise DomainError(f"k-exchange certificates not supported for domain kind {D.kind!r}")
    coll = {y: frozenset(x for x in X - Y if touches(x, y)) for y in sorted(Y - X)}
    return KExchangeCertificate(D, X, Y, coll, k)
