"""Exchange maps between two feasible sets, and their exact / sampled certification.

A map is described by ``outcomes(R)``: the finite distribution of
``(probability, S, T)`` triples it produces for an activated set ``R`` of
``Y \\ X``. Maps with continuous internal randomness only implement
``sample``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import RandomSource, sorted_ids
from ..domains import Domain
from ..objectives import Objective

TOL = 1e-9
MAX_EXACT = 12


class ExchangeError(ValueError):
    pass


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class ExchangeMap:
    kind = "abstract"
    gamma = 1
    enumerable = True

    def __init__(self, domain: Domain, X, Y):
        self.domain = domain
        self.X = domain.universe.check(X)
        self.Y = domain.universe.check(Y)

    @property
    def added(self) -> tuple[int, ...]:
        return tuple(sorted(self.Y - self.X))

    @property
    def removed(self) -> tuple[int, ...]:
        return tuple(sorted(self.X - self.Y))

    def outcomes(self, R: frozenset) -> list[tuple[float, frozenset, frozenset]]:
        raise ExchangeError(f"{self.kind} map has no finite outcome distribution")

    def sample(self, R: frozenset, rng) -> tuple[frozenset, frozenset]:
        outs = self.outcomes(R)
        if len(outs) == 1:
            return outs[0][1], outs[0][2]
        u = _generator(rng).random()
        acc = 0.0
        for q, S, T in outs:
            acc += q
            if u < acc:
                return S, T
        return outs[-1][1], outs[-1][2]

    def exchanged(self, S, T) -> frozenset:
        return (self.X | S) - T

    def is_well_formed(self, R, S, T) -> bool:
        if not (S <= R and R <= set(self.added) and T <= set(self.removed)):
            return False
        return self.domain.in_relaxed(self.exchanged(S, T), self.gamma)

    def __repr__(self):
        return f"<{type(self).__name__} X={sorted_ids(self.X)} Y={sorted_ids(self.Y)}>"


def _probs_for(elements, p) -> dict:
    if np.isscalar(p):
        return {y: float(p) for y in elements}
    if isinstance(p, dict):
        return {y: float(p[y]) for y in elements}
    return {y: float(p[y]) for y in elements}


def activation_distribution(elements, p) -> list[tuple[frozenset, float]]:
    """All subsets R of ``elements`` with their product-Bernoulli probabilities."""
    elements = tuple(sorted(elements))
    if len(elements) > MAX_EXACT:
        raise ExchangeError(f"exact enumeration limited to |Y \\ X| <= {MAX_EXACT}")
    probs = _probs_for(elements, p)
    out = []
    for bits in itertools.product((0, 1), repeat=len(elements)):
        w = 1.0
        for y, b in zip(elements, bits):
            w *= probs[y] if b else 1.0 - probs[y]
        out.append((frozenset(y for y, b in zip(elements, bits) if b), w))
    return out


def sample_activation_subset(elements, p, gen: np.random.Generator) -> frozenset:
    probs = _probs_for(elements, p)
    u = gen.random(len(elements))
    return frozenset(y for y, ui in zip(sorted(elements), u) if ui < probs[y])


@dataclass
class UniformityReport:
    kind: str
    alpha_hat: float
    beta_hat: float
    method: str
    samples: int = 0
    radius: float = 0.0
    vacuous: bool = False
    violations: int = 0
    alpha_by: dict = field(default_factory=dict)
    beta_by: dict = field(default_factory=dict)

    def to_row(self) -> dict:
        return {
            "kind": self.kind,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "method": self.method,
            "samples": self.samples,
            "radius": self.radius,
            "vacuous": self.vacuous,
            "violations": self.violations,
        }


def _summarize(m: ExchangeMap, a: dict, b: dict, method, samples=0, violations=0) -> UniformityReport:
    vacuous = not m.added
    alpha = min(a.values()) if a else 1.0
    beta = max(b.values()) if b else 0.0
    radius = 0.0
    if method == "monte-carlo" and samples:
        worst = [alpha, beta]
        radius = max(3.0 * math.sqrt(q * (1 - q) / samples) for q in worst)
    return UniformityReport(m.kind, alpha, beta, method, samples, radius, vacuous, violations, a, b)


def certify_uniformity(m: ExchangeMap, p, method: str = "exact", samples: int = 100_000,
                       rng=None, check: bool = True) -> UniformityReport:
    """Estimate min_y P(y in S(R)) and max_x P(x in T(R)) under Bernoulli activation of R.

    The exact method enumerates every R and every internal outcome; the
    Monte-Carlo method reports a 3-sigma radius. Well-formedness of every
    enumerated or sampled exchange is counted in ``violations``.
    """
    a = {y: 0.0 for y in m.added}
    b = {x: 0.0 for x in m.removed}
    violations = 0
    if method == "exact":
        if not m.enumerable:
            raise ExchangeError(f"{m.kind} map has continuous randomness; use method='monte-carlo'")
        for R, w in activation_distribution(m.added, p):
            for q, S, T in m.outcomes(R):
                if check and not m.is_well_formed(R, S, T):
                    violations += 1
                for y in S:
                    a[y] += w * q
                for x in T:
                    b[x] += w * q
        return _summarize(m, a, b, "exact", violations=violations)
    if method != "monte-carlo":
        raise ExchangeError(f"unknown certification method {method!r}")
    gen = _generator(rng if rng is not None else 0)
    ca = dict.fromkeys(a, 0)
    cb = dict.fromkeys(b, 0)
    for _ in range(samples):
        R = sample_activation_subset(m.added, p, gen)
        S, T = m.sample(R, gen)
        if check and not m.is_well_formed(R, S, T):
            violations += 1
        for y in S:
            ca[y] += 1
        for x in T:
            cb[x] += 1
    a = {y: c / samples for y, c in ca.items()}
    b = {x: c / samples for x, c in cb.items()}
    return _summarize(m, a, b, "monte-carlo", samples, violations)


def expected_gain(m: ExchangeMap, f: Objective, p) -> float:
    """Exact E[f(X | S(R) - T(R)) - f(X)]."""
    rows, weights = [], []
    for R, w in activation_distribution(m.added, p):
        for q, S, T in m.outcomes(R):
            rows.append(m.exchanged(S, T))
            weights.append(w * q)
    F = np.zeros((len(rows), f.n), dtype=bool)
    for i, Z in enumerate(rows):
        F[i, list(Z)] = True
    return float(np.asarray(weights) @ f.values(F)) - f.value(m.X)


def gain_lower_bound(f: Objective, X, Y, alpha: float, beta: float, objective_kind: str) -> float:
    if objective_kind == "linear":
        return alpha * f.value(Y) - max(alpha, beta) * f.value(X)
    if objective_kind == "submodular":
        return alpha * f.value(X | Y) - (alpha + beta) * f.value(X)
    raise ValueError(f"objective kind must be 'linear' or 'submodular', got {objective_kind!r}")


def verify_gain_bound(m: ExchangeMap, f: Objective, objective_kind: str, p) -> float:
    """Excess of the exact expected gain over the lower bound at the certified (alpha, beta)."""
    if not m.enumerable:
        raise ExchangeError(f"{m.kind} map: expected gain is not exactly computable")
    if objective_kind == "linear" and not f.is_linear:
        raise ValueError("the linear gain bound needs a linear objective")
    rep = certify_uniformity(m, p, "exact", check=False)
    bound = gain_lower_bound(f, m.X, m.Y, rep.alpha_hat, rep.beta_hat, objective_kind)
    return expected_gain(m, f, p) - bound
