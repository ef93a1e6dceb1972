"""Path multisets over the exchange graph of a k-exchange certificate, and the map built from them.

The multiset comes from non-backtracking walks of ``H = 2h`` vertices in the
exchange graph padded to a k-regular graph by infinite dummy trees hung off
every vertex of degree below k. A walk's real part is a contiguous segment,
so each segment is kept with the number of padded walks that project onto it.
Every vertex then sits at every label in exactly ``k (k-1)^(H-2)`` walks.
When the exchange graph has cycles short enough for a walk to revisit a
vertex, the multiplicities are instead found by an integer program over
simple labeled paths.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from ..domains import KExchangeCertificate
from .base import ExchangeError, ExchangeMap, _generator


class PathConstructionError(ExchangeError):
    pass


def n_paths(k: int, H: int) -> int:
    """Number of paths through each (vertex, label) pair: k (k-1)^(H-2)."""
    if H < 2:
        raise ValueError("need at least two labels")
    return k * (k - 1) ** (H - 2)


def exchange_graph(cert: KExchangeCertificate) -> dict:
    """Bipartite graph on (X \\ Y) | (Y \\ X) with an edge (x, y) whenever x is in T_y."""
    adj = {v: set() for v in cert.removed | cert.added}
    for y, T in cert.collection.items():
        for x in T:
            adj[x].add(y)
            adj[y].add(x)
    return {v: tuple(sorted(nb)) for v, nb in adj.items()}


@dataclass
class PathMultiset:
    adj: dict
    added: frozenset  # the Y \ X side of the graph
    k: int
    h: int
    paths: list  # (vertex tuple, first label); repeated entries are multiplicity
    colors: list
    method: str

    @property
    def H(self) -> int:
        return 2 * self.h

    @property
    def n(self) -> int:
        return n_paths(self.k, self.H)

    @property
    def num_colors(self) -> int:
        return 2 * self.h * self.h * self.n

    def label(self, v, i: int) -> int:
        verts, start = self.paths[i]
        return start + verts.index(v) if v in verts else 0

    def added_part(self, i: int) -> frozenset:
        return frozenset(v for v in self.paths[i][0] if v in self.added)

    def check_properties(self) -> dict:
        """Check the three labeled-path properties and the coloring directly."""
        H, k = self.H, self.k
        simple = consecutive = interior = True
        counts: Counter = Counter()
        for verts, start in self.paths:
            if len(set(verts)) != len(verts):
                simple = False
            if start < 1 or start + len(verts) - 1 > H:
                consecutive = False
            if any(b not in self.adj[a] for a, b in zip(verts, verts[1:])):
                consecutive = False
            for j, v in enumerate(verts):
                lab = start + j
                counts[v, lab] += 1
                if len(self.adj[v]) == k and lab not in (1, H):
                    if sum(u in self.adj[v] for u in verts) < 2:
                        interior = False
        exact = all(counts[v, i] == self.n for v in self.adj for i in range(1, H + 1))
        exact = exact and set(counts) <= {(v, i) for v in self.adj for i in range(1, H + 1)}
        proper = max(self.colors, default=0) < self.num_colors
        by_vertex = defaultdict(set)
        for i, c in enumerate(self.colors):
            for y in self.added_part(i):
                if c in by_vertex[y]:
                    proper = False
                by_vertex[y].add(c)
        return {
            "labels_consecutive": simple and consecutive,
            "interior_two_neighbors": interior,
            "exact_counts": exact,
            "proper_coloring": proper,
        }

    def verify(self) -> bool:
        return all(self.check_properties().values())


def _walks(adj: dict, H: int):
    """All non-backtracking walks of 1..H vertices, as vertex tuples."""
    out = []
    stack = [(v,) for v in sorted(adj)]
    while stack:
        w = stack.pop()
        out.append(w)
        if len(w) < H:
            for u in adj[w[-1]]:
                if len(w) >= 2 and u == w[-2]:
                    continue
                stack.append(w + (u,))
    return sorted(out)


def _padded_multiplicity(adj, k, H, walk, start) -> int:
    end = start + len(walk) - 1
    d_first = k - len(adj[walk[0]])
    d_last = k - len(adj[walk[-1]])
    if len(walk) == 1 and start > 1 and end < H:
        return d_first * (d_first - 1) * (k - 1) ** (start - 2) * (k - 1) ** (H - end - 1)
    left = 1 if start == 1 else d_first * (k - 1) ** (start - 2)
    right = 1 if end == H else d_last * (k - 1) ** (H - end - 1)
    return left * right


def _padded_paths(adj, k, H):
    out = []
    for w in _walks(adj, H):
        for start in range(1, H - len(w) + 2):
            m = _padded_multiplicity(adj, k, H, w, start)
            if m:
                out.append((w, start, m))
    return out


def _integer_paths(adj, k, H):
    """Multiplicities for simple labeled paths by integer programming."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    cands = []
    for w in _walks(adj, H):
        if len(set(w)) != len(w):
            continue
        for start in range(1, H - len(w) + 2):
            ok = True
            for j, v in enumerate(w):
                if len(adj[v]) == k and start + j not in (1, H) and sum(u in adj[v] for u in w) < 2:
                    ok = False
                    break
            if ok:
                cands.append((w, start))
    rows = {(v, i): r for r, (v, i) in enumerate((v, i) for v in sorted(adj) for i in range(1, H + 1))}
    A = np.zeros((len(rows), len(cands)))
    for j, (w, start) in enumerate(cands):
        for t, v in enumerate(w):
            A[rows[v, start + t], j] = 1
    target = n_paths(k, H)
    res = milp(
        c=np.ones(len(cands)),
        constraints=LinearConstraint(A, target, target),
        integrality=np.ones(len(cands)),
        bounds=Bounds(0, target),
    )
    if res.status != 0:
        raise PathConstructionError("no multiset of simple labeled paths meets the exact counts")
    return [(w, s, int(round(m))) for (w, s), m in zip(cands, res.x) if round(m) > 0]


def _greedy_coloring(parts: list[frozenset]) -> list[int]:
    colors = []
    used_at = defaultdict(set)  # vertex -> colors of earlier sets containing it
    for S in parts:
        taken = set().union(*(used_at[y] for y in S)) if S else set()
        c = 0
        while c in taken:
            c += 1
        colors.append(c)
        for y in S:
            used_at[y].add(c)
    return colors


def build_path_multiset(cert: KExchangeCertificate, h: int) -> PathMultiset:
    if h < 1:
        raise ValueError("h must be a positive integer")
    k = cert.k
    if k < 2:
        raise PathConstructionError("path construction needs k >= 2")
    adj = exchange_graph(cert)
    if any(len(nb) > k for nb in adj.values()):
        raise PathConstructionError("exchange graph degree exceeds k")
    H = 2 * h
    weighted = _padded_paths(adj, k, H)
    method = "padded-walks"
    if any(len(set(w)) != len(w) for w, _, _ in weighted):
        weighted = _integer_paths(adj, k, H)
        method = "integer-program"
    paths = [(w, s) for w, s, m in weighted for _ in range(m)]
    added = cert.added
    parts = [frozenset(v for v in w if v in added) for w, _ in paths]
    pm = PathMultiset(adj, added, k, h, paths, _greedy_coloring(parts), method)
    if not pm.verify():
        raise PathConstructionError(f"path multiset failed verification: {pm.check_properties()}")
    return pm


class PathExchangeMap(ExchangeMap):
    """Draw a color class uniformly, then keep each of its sets S_i whose members
    are all active, thinned with probability p^(h - |S_i|)."""

    kind = "path-k-exchange"

    def __init__(self, cert: KExchangeCertificate, pm: PathMultiset, p: float):
        super().__init__(cert.domain, cert.X, cert.Y)
        self.cert, self.pm, self.p = cert, pm, float(p)
        self.h, self.k = pm.h, pm.k
        classes = defaultdict(set)
        for i, c in enumerate(pm.colors):
            S = pm.added_part(i)
            if S:
                if len(S) > pm.h:
                    raise PathConstructionError("a path meets Y \\ X more than h times")
                classes[c].add((S, cert.removal(S)))
        self.num_classes = pm.num_colors
        self.classes = [tuple(sorted(classes.get(c, ()), key=lambda st: sorted(st[0])))
                        for c in range(self.num_classes)]
        self.signatures = Counter(self.classes)

    def keep_probability(self, S) -> float:
        return self.p ** (self.h - len(S))

    def outcomes(self, R):
        R = frozenset(R)
        merged = defaultdict(float)
        for sig, count in self.signatures.items():
            base = count / self.num_classes
            eligible = [(S, T) for S, T in sig if S <= R]
            qs = [self.keep_probability(S) for S, _ in eligible]
            for picks in np.ndindex(*([2] * len(eligible))):
                w = base
                S_out: frozenset = frozenset()
                T_out: frozenset = frozenset()
                for (S, T), q, b in zip(eligible, qs, picks):
                    if b:
                        w *= q
                        S_out |= S
                        T_out |= T
                    else:
                        w *= 1.0 - q
                if w > 0:
                    merged[S_out, T_out] += w
        return [(w, S, T) for (S, T), w in sorted(merged.items(), key=lambda kv: (sorted(kv[0][0]), sorted(kv[0][1])))]

    def sample(self, R, rng):
        gen = _generator(rng)
        R = frozenset(R)
        sig = self.classes[int(gen.integers(self.num_classes))]
        S_out: frozenset = frozenset()
        T_out: frozenset = frozenset()
        for S, T in sig:
            if S <= R and gen.random() < self.keep_probability(S):
                S_out |= S
                T_out |= T
        return S_out, T_out

    def target_uniformity(self) -> tuple[float, float]:
        a = self.p ** self.h / self.h
        return a, a * (self.k - 1 + 1 / self.h)


def build_path_exchange_map(cert: KExchangeCertificate, pm: PathMultiset, p: float) -> PathExchangeMap:
    return PathExchangeMap(cert, pm, p)


def path_uniformity(p: float, h: int, k: int) -> tuple[float, float]:
    a = p**h / h
    return a, a * (k - 1 + 1 / h)


def table_uniformity(p: float, epsilon: float, k: int) -> tuple[float, float]:
    """The k-exchange entry as tabulated: p^(1/eps) eps^2 / 3 and that times (k - 1 + eps)."""
    a = p ** (1 / epsilon) * epsilon**2 / 3
    return a, a * (k - 1 + epsilon)

