"""The simple exchange maps: trivial k-exchange, all-or-nothing, composition, and the circle map for light knapsack items."""
from __future__ import annotations

import itertools
from collections import defaultdict

from ..domains import Domain, IntersectionDomain, KExchangeCertificate, KnapsackDomain, MatroidDomain
from .base import ExchangeError, ExchangeMap, _generator


class TrivialKExchangeMap(ExchangeMap):
    """S(R) = R, T(R) = union of the certificate's removal sets over R."""

    kind = "trivial-k-exchange"
    identity_S = True

    def __init__(self, cert: KExchangeCertificate):
        super().__init__(cert.domain, cert.X, cert.Y)
        self.cert = cert
        self.k = cert.k

    def outcomes(self, R):
        return [(1.0, frozenset(R), self.cert.removal(R))]


def build_trivial_k_exchange_map(cert: KExchangeCertificate) -> TrivialKExchangeMap:
    return TrivialKExchangeMap(cert)


class AllOrNothingMap(ExchangeMap):
    """S(R) = R; T(R) is empty for empty R and all of X \\ Y otherwise.

    Valid for any downward-closed domain because the exchanged set is
    ``(X & Y) | R``, a subset of Y.
    """

    kind = "knapsack-heavy"
    identity_S = True

    def __init__(self, domain: Domain, X, Y, k: int):
        super().__init__(domain, X, Y)
        if len(self.X) > k or len(self.Y) > k:
            raise ExchangeError(f"cardinality bound {k} violated: |X|={len(self.X)}, |Y|={len(self.Y)}")
        self.k = k

    def outcomes(self, R):
        R = frozenset(R)
        return [(1.0, R, frozenset(self.removed) if R else frozenset())]


def build_knapsack_heavy_map(domain: Domain, X, Y, k: int) -> AllOrNothingMap:
    return AllOrNothingMap(domain, X, Y, k)


class ComposedMap(ExchangeMap):
    """Shared S, union of the component removal sets; component draws are independent."""

    kind = "composition"
    identity_S = True

    def __init__(self, maps, domain: Domain):
        first = maps[0]
        super().__init__(domain, first.X, first.Y)
        self.maps = tuple(maps)
        self.enumerable = all(m.enumerable for m in self.maps)

    def outcomes(self, R):
        R = frozenset(R)
        merged: dict = defaultdict(float)
        for combo in itertools.product(*(m.outcomes(R) for m in self.maps)):
            q = 1.0
            T: frozenset = frozenset()
            for qi, S, Ti in combo:
                q *= qi
                T |= Ti
            merged[T] += q
        return [(q, R, T) for T, q in sorted(merged.items(), key=lambda kv: sorted(kv[0]))]

    def sample(self, R, rng):
        T: frozenset = frozenset()
        for m in self.maps:
            T |= m.sample(R, rng)[1]
        return frozenset(R), T


def compose_maps(maps, domain: Domain | None = None) -> ExchangeMap:
    maps = list(maps)
    if not maps:
        raise ExchangeError("need at least one map")
    X, Y = maps[0].X, maps[0].Y
    if any(m.X != X or m.Y != Y for m in maps):
        raise ExchangeError("component maps must share (X, Y)")
    if not all(getattr(m, "identity_S", False) for m in maps):
        raise ExchangeError("component maps must share S(R) = R")
    if len(maps) == 1 and domain is None:
        return maps[0]
    if domain is None:
        if not all(isinstance(m.domain, MatroidDomain) for m in maps):
            raise ExchangeError("pass the intersection domain explicitly for non-matroid components")
        domain = IntersectionDomain([m.domain.matroid for m in maps])
    return ComposedMap(maps, domain)


def _circular_overlap(a: float, c: float, u: float, length: float, circ: float) -> float:
    """Length of [a, a+c) intersected with the arc [u, u+length) on a circle of circumference ``circ``."""
    total = 0.0
    for shift in (-circ, 0.0, circ):
        lo = max(a, u + shift)
        hi = min(a + c, u + shift + length)
        total += max(0.0, hi - lo)
    return min(total, c)


class KnapsackLightMap(ExchangeMap):
    """Circle map for knapsacks without heavy items; lands in the 2-fold union of the domain.

    Items of ``X \\ Y`` are laid end to end as arcs on a circle whose
    circumference is the capacity left over by ``X & Y``. An arc of length
    ``c(R)`` is placed uniformly at random and each item is removed with
    probability equal to the covered fraction of its own arc.
    """

    kind = "knapsack-light"
    gamma = 2
    enumerable = False
    identity_S = True

    def __init__(self, domain: KnapsackDomain, X, Y, heavy_threshold: float = 1 / 3):
        super().__init__(domain, X, Y)
        heavy = [e for e in self.X | self.Y if domain.sizes[e] > heavy_threshold + 1e-12]
        if heavy:
            raise ExchangeError(f"heavy items present: {sorted(heavy)}")
        if not (domain.is_feasible(self.X) and domain.is_feasible(self.Y)):
            raise ExchangeError("X and Y must be feasible")
        self.circumference = max(0.0, 1.0 - domain.load(self.X & self.Y))
        self.arcs = {}
        pos = 0.0
        for x in self.removed:
            self.arcs[x] = (pos, domain.sizes[x])
            pos += domain.sizes[x]

    def removal_probabilities(self, R, u: float) -> dict:
        length = min(self.domain.load(R), self.circumference)
        if length <= 0 or self.circumference <= 0:
            return {x: 0.0 for x in self.arcs}
        return {
            x: _circular_overlap(a, c, u, length, self.circumference) / c
            for x, (a, c) in self.arcs.items()
        }

    def sample(self, R, rng):
        gen = _generator(rng)
        R = frozenset(R)
        u = gen.random() * self.circumference
        probs = self.removal_probabilities(R, u)
        coins = gen.random(len(self.arcs))
        T = frozenset(x for (x, q), v in zip(sorted(probs.items()), coins) if v < q)
        return R, T


def build_knapsack_light_map(domain: KnapsackDomain, X, Y) -> KnapsackLightMap:
    return KnapsackLightMap(domain, X, Y)
