"""Deterministic approximation algorithms used as black boxes by the strategies.

``solve`` dispatches on ``Solver.kind``. The brute-force solver is exact and is
what the strategies use by default at desk scale; the others exist so that
measured factors can be compared against their declared ones.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .domains import (
    Domain,
    KnapsackDomain,
    MatchingDomain,
    MatroidBaseDomain,
    MatroidDomain,
    SetPackingDomain,
)
from .objectives import LinearObjective, Objective, RestrictedObjective

TOL = 1e-9
KINDS = ("brute-force", "greedy", "local-search-k-exchange", "knapsack-dp", "knapsack-enum-greedy")


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class Solver:
    kind: str = "brute-force"
    k: int | None = None  # exchange size for local search; defaults to the domain's
    epsilon: float = 0.1  # local search: iterations = ceil(n ln(1/epsilon))
    n_iterations: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SolverError(f"unknown solver kind {self.kind!r}")
        if not 0 < self.epsilon < 1:
            raise SolverError("epsilon must lie in (0, 1)")

    def declared_eta(self, D: Domain | None = None) -> float:
        if self.kind in ("brute-force", "knapsack-dp"):
            return 1.0
        if self.kind == "knapsack-enum-greedy":
            return 1.0 - 1.0 / math.e
        if D is None:
            raise SolverError(f"declared factor of {self.kind!r} depends on the domain")
        if self.kind == "greedy":
            return 1.0 / (D.system_k() + 1)
        k = self.k if self.k is not None else D.system_k()
        return (1.0 - self.epsilon) / (k + 1)

    def to_dict(self):
        d = {"solver": self.kind}
        if self.k is not None:
            d["k"] = self.k
        if self.kind == "local-search-k-exchange":
            d["epsilon"] = self.epsilon
        return d


def solver_from_dict(d: dict | str) -> Solver:
    if isinstance(d, str):
        return Solver(d)
    return Solver(d.get("solver", "brute-force"), d.get("k"), d.get("epsilon", 0.1), d.get("n_iterations"))


def _allowed(D: Domain, allowed) -> frozenset:
    return D.universe.elements if allowed is None else D.universe.check(allowed)


def _best_index(vals: np.ndarray, matrix: np.ndarray, avoid: frozenset | None) -> int:
    best = vals.max()
    cand = np.flatnonzero(vals >= best - TOL * max(1.0, abs(best)))
    if avoid:
        penalty = matrix[np.ix_(cand, sorted(avoid))].sum(axis=1)
        cand = cand[penalty == penalty.min()]
    return int(cand[0])


def brute_force(f: Objective, D: Domain, allowed=None, avoid=None) -> frozenset:
    """Exact maximizer; ties go to the solution with fewest ``avoid`` members, then lexicographically first."""
    fam = D.family(_allowed(D, allowed))
    if not fam.sets:
        raise SolverError("no feasible set inside the allowed elements")
    vals = f.values(fam.matrix)
    return fam.sets[_best_index(vals, fam.matrix, frozenset(avoid or ()))]


def greedy(f: Objective, D: Domain, allowed=None) -> frozenset:
    allowed = sorted(_allowed(D, allowed))
    if isinstance(D, KnapsackDomain):
        raise SolverError("plain greedy has no guarantee on knapsack domains")
    grow = MatroidDomain(D.matroid) if isinstance(D, MatroidBaseDomain) else D
    X: frozenset = frozenset()
    fx = f.value(X)
    while True:
        cands = [e for e in allowed if e not in X and grow.is_feasible(X | {e})]
        if not cands:
            break
        vals = [f.value(X | {e}) for e in cands]
        i = int(np.argmax(vals))
        if vals[i] <= fx + TOL and grow is D:
            break
        X, fx = X | {cands[i]}, vals[i]
    return X


def local_search_step(f: Objective, D: Domain, X, k: int, allowed=None) -> frozenset:
    """Best insert-one / remove-at-most-k move; ``X`` itself if nothing strictly improves."""
    X = D.universe.check(X)
    allowed = _allowed(D, allowed)
    members = sorted(X)
    moves = []
    for e in sorted(allowed - X):
        for r in range(min(k, len(members)) + 1):
            for T in itertools.combinations(members, r):
                Z = (X | {e}) - frozenset(T)
                if D.is_feasible(Z):
                    moves.append(Z)
    if not moves:
        return X
    F = np.zeros((len(moves), D.n), dtype=bool)
    for i, Z in enumerate(moves):
        F[i, list(Z)] = True
    vals = f.values(F)
    i = int(np.argmax(vals))
    return moves[i] if vals[i] > f.value(X) + TOL else X


def local_search_iterations(n: int, epsilon: float) -> int:
    return max(1, math.ceil(n * math.log(1.0 / epsilon)))


def local_search(f: Objective, D: Domain, k: int, allowed=None, n_iterations: int | None = None,
                 epsilon: float = 0.1) -> frozenset:
    if not isinstance(D, (MatchingDomain, SetPackingDomain)):
        raise SolverError(f"k-exchange local search not supported on {D.kind!r}")
    allowed = _allowed(D, allowed)
    if n_iterations is None:
        n_iterations = local_search_iterations(D.max_cardinality(allowed), epsilon)
    X: frozenset = frozenset()
    for _ in range(n_iterations):
        Z = local_search_step(f, D, X, k, allowed)
        if Z == X:
            break
        X = Z
    return X


def linear_weights(f: Objective) -> np.ndarray | None:
    if isinstance(f, LinearObjective):
        return f.values(np.eye(f.n, dtype=bool))
    if isinstance(f, RestrictedObjective) and f.base.is_linear:
        return f.values(np.eye(f.n, dtype=bool))
    return None


def _as_fractions(sizes, max_den=10_000):
    out = []
    for c in sizes:
        q = Fraction(c).limit_denominator(max_den)
        if abs(float(q) - c) > 1e-12:
            return None
        out.append(q)
    return out


def knapsack_solve_linear(f: Objective, sizes, allowed=None) -> frozenset:
    """Exact knapsack for linear objectives: integer DP when sizes are rational, else enumeration."""
    w = linear_weights(f)
    if w is None:
        raise SolverError("knapsack DP requires a linear objective")
    sizes = [float(c) for c in sizes]
    allowed = sorted(set(range(len(sizes))) if allowed is None else set(allowed))
    items = [e for e in allowed if sizes[e] <= 1.0 + TOL]
    fracs = _as_fractions([sizes[e] for e in items])
    scale = math.lcm(*(q.denominator for q in fracs)) if fracs else 1
    if fracs is None or scale > 100_000:
        if len(allowed) > 22:
            raise SolverError("instance too large for exhaustive knapsack")
        return brute_force(f, KnapsackDomain(sizes), allowed)
    ints = [int(q * scale) for q in fracs]
    cap = scale
    best = np.zeros(cap + 1)
    take = np.zeros((len(items), cap + 1), dtype=bool)
    for i, (e, c) in enumerate(zip(items, ints)):
        if w[e] <= 0:
            continue
        shifted = np.full(cap + 1, -np.inf)
        shifted[c:] = best[: cap + 1 - c] + w[e]
        better = shifted > best + TOL
        take[i] = better
        best = np.where(better, shifted, best)
    X, c = [], cap
    for i in range(len(items) - 1, -1, -1):
        if take[i, c]:
            X.append(items[i])
            c -= ints[i]
    return frozenset(X)


def knapsack_enum_greedy(f: Objective, sizes, allowed=None) -> frozenset:
    """Enumerate all feasible seeds of size <= 3, extend each by best gain per unit size."""
    D = KnapsackDomain(sizes)
    allowed = sorted(_allowed(D, allowed))
    best, best_val = frozenset(), f.value(frozenset())
    for r in range(4):
        for seed in itertools.combinations(allowed, r):
            X = frozenset(seed)
            if not D.is_feasible(X):
                continue
            fx = f.value(X)
            while True:
                room = [e for e in allowed if e not in X and D.is_feasible(X | {e})]
                if not room:
                    break
                ratios = [(f.value(X | {e}) - fx) / D.sizes[e] for e in room]
                i = int(np.argmax(ratios))
                if ratios[i] <= TOL:
                    break
                X = X | {room[i]}
                fx = f.value(X)
            if fx > best_val + TOL:
                best, best_val = X, fx
    return best


def solve(solver: Solver, f: Objective, D: Domain, allowed=None, avoid=None) -> frozenset:
    kind = solver.kind
    if kind == "brute-force":
        return brute_force(f, D, allowed, avoid)
    if kind == "greedy":
        return greedy(f, D, allowed)
    if kind == "local-search-k-exchange":
        k = solver.k if solver.k is not None else D.system_k()
        return local_search(f, D, k, allowed, solver.n_iterations, solver.epsilon)
    if not isinstance(D, KnapsackDomain):
        raise SolverError(f"solver {kind!r} requires a knapsack domain, got {D.kind!r}")
    if kind == "knapsack-dp":
        return knapsack_solve_linear(f, D.sizes, allowed)
    return knapsack_enum_greedy(f, D.sizes, allowed)


def omniscient_optimum(f: Objective, D: Domain, active: Iterable[int]) -> tuple[frozenset, float]:
    """Exact max of f(Z & A) over feasible Z."""
    g = f.restrict(active)
    Z = brute_force(g, D)
    return Z, g.value(Z)

