"""Matroid exchange maps from a family of removal sets {B_R} indexed by R in 2^(Y \\ X).

The family is searched for directly: a depth-first search over per-R removal
sets keeps the activation-weighted load of every x at most p. The search
first tries the removal set dictated by a fixed single-exchange matching
(which already works for strongly base orderable matroids such as uniform and
partition matroids). If no deterministic family is found within the node
budget, a linear program over randomized removal choices is solved instead.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, lil_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ..domains import MatroidBaseDomain, MatroidDomain, MatroidOracle
from .base import ExchangeError, ExchangeMap, activation_distribution

MAX_ROTA = 10
TOL = 1e-9


class RotaMap(ExchangeMap):
    kind = "matroid-rota"
    identity_S = True

    def __init__(self, domain, X, Y, family: dict, p: float, deterministic: bool):
        super().__init__(domain, X, Y)
        self.family = family  # R -> list of (prob, B_R)
        self.p = p
        self.deterministic = deterministic

    def outcomes(self, R):
        R = frozenset(R)
        return [(q, R, B) for q, B in self.family[R]]

    def coverage_counts(self) -> dict:
        """Unweighted number of R whose removal set contains x (deterministic families)."""
        counts = {x: 0 for x in self.removed}
        for choices in self.family.values():
            for q, B in choices:
                for x in B:
                    counts[x] += q
        return counts


def _candidates(domain, X, R, xs, bases: bool) -> list[frozenset]:
    XR = X | R
    out = []
    sizes = [len(R)] if bases else range(len(xs) + 1)
    for r in sizes:
        for B in itertools.combinations(xs, r):
            B = frozenset(B)
            if bases:
                if domain.matroid.is_base(XR - B):
                    out.append(B)
            elif domain.matroid.is_independent(XR - B) and not any(c <= B for c in out):
                out.append(B)  # inclusion-minimal: smaller sets were generated first
    return out


def _single_exchange_matching(M: MatroidOracle, X, ys, xs) -> dict:
    """y -> x such that X - x + y is independent, via maximum bipartite matching."""
    if not ys or not xs:
        return {}
    A = np.zeros((len(ys), len(xs)), dtype=np.int8)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            if M.is_independent((X - {x}) | {y}):
                A[i, j] = 1
    match = maximum_bipartite_matching(csr_matrix(A), perm_type="column")
    return {ys[i]: xs[j] for i, j in enumerate(match) if j >= 0}


def _search(cands, weights, xs, p, preferred, budget):
    order = sorted(cands, key=lambda R: (-weights[R], sorted(R)))
    load = {x: 0.0 for x in xs}

    def options(R):
        pref = preferred(R)
        w = weights[R]
        ok = [B for B in cands[R] if all(load[x] + w <= p + TOL for x in B)]
        return sorted(ok, key=lambda B: (B != pref, max((load[x] for x in B), default=0.0), len(B), sorted(B)))

    stack = []  # frames: [untried options, applied option]
    nodes = 0
    descend = True
    while True:
        if descend:
            if len(stack) == len(order):
                return {order[i]: frame[1] for i, frame in enumerate(stack)}
            nodes += 1
            if nodes > budget:
                return None
            stack.append([options(order[len(stack)]), None])
        frame = stack[-1]
        R = order[len(stack) - 1]
        if frame[1] is not None:
            for x in frame[1]:
                load[x] -= weights[R]
            frame[1] = None
        if not frame[0]:
            stack.pop()
            if not stack:
                return None
            descend = False
            continue
        B = frame[0].pop(0)
        for x in B:
            load[x] += weights[R]
        frame[1] = B
        descend = True


def _lp_family(cands, weights, xs, p):
    Rs = sorted(cands, key=sorted)
    var = [(R, B) for R in Rs for B in cands[R]]
    nv = len(var) + 1  # last variable: max load
    c = np.zeros(nv)
    c[-1] = 1.0
    A_eq = lil_matrix((len(Rs), nv))
    row_of = {R: i for i, R in enumerate(Rs)}
    A_ub = lil_matrix((len(xs), nv))
    col_of = {x: i for i, x in enumerate(xs)}
    for j, (R, B) in enumerate(var):
        A_eq[row_of[R], j] = 1.0
        for x in B:
            A_ub[col_of[x], j] = weights[R]
    for i in range(len(xs)):
        A_ub[i, -1] = -1.0
    res = linprog(c, A_ub=A_ub.tocsr() if xs else None, b_ub=np.zeros(len(xs)) if xs else None,
                  A_eq=A_eq.tocsr(), b_eq=np.ones(len(Rs)), bounds=[(0, None)] * nv, method="highs")
    if res.status != 0 or res.x[-1] > p + 1e-7:
        return None
    fam: dict = {R: [] for R in Rs}
    for (R, B), z in zip(var, res.x[:-1]):
        if z > 1e-12:
            fam[R].append((float(z), B))
    for R in Rs:
        tot = sum(q for q, _ in fam[R])
        fam[R] = [(q / tot, B) for q, B in fam[R]]
    return fam


def build_matroid_rota_map(M: MatroidOracle, X, Y, p: float = 0.5, bases: bool = False,
                           budget: int = 50_000) -> RotaMap:
    """(p, p)-uniform map S(R) = R, T(R) = B_R between two independent sets (or bases) of M.

    At p = 1/2 the load condition is exactly the requirement that every x be
    covered by at most (bases: exactly) 2^(|Y \\ X| - 1) of the sets B_R.
    """
    domain = MatroidBaseDomain(M) if bases else MatroidDomain(M)
    X, Y = domain.universe.check(X), domain.universe.check(Y)
    if not (domain.is_feasible(X) and domain.is_feasible(Y)):
        raise ExchangeError("X and Y must be feasible in the matroid domain")
    ys, xs = sorted(Y - X), sorted(X - Y)
    if len(ys) > MAX_ROTA:
        raise ExchangeError(f"family search limited to |Y \\ X| <= {MAX_ROTA}")
    dist = activation_distribution(ys, p)
    weights = {R: w for R, w in dist}
    cands = {R: _candidates(domain, X, R, xs, bases) for R, _ in dist}
    empty = [R for R, c in cands.items() if not c]
    if empty:
        raise ExchangeError(f"no feasible removal set for R={sorted(empty[0])}")
    sigma = _single_exchange_matching(M, X, ys, xs)

    def preferred(R):
        return frozenset(sigma[y] for y in R if y in sigma)

    fam = _search(cands, weights, xs, p, preferred, budget)
    if fam is not None:
        return RotaMap(domain, X, Y, {R: [(1.0, B)] for R, B in fam.items()}, p, True)
    lp = _lp_family(cands, weights, xs, p)
    if lp is None:
        raise ExchangeError("no removal family meets the load condition; this contradicts the Rota exchange property")
    return RotaMap(domain, X, Y, lp, p, False)
