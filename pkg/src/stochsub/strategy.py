"""Query strategies: the round-based optimistic/pessimistic strategy, the
one-query-per-round local search baseline, and the light/heavy knapsack
combination.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .core import ActivationScenario, KnowledgeState, QueryTranscript, sorted_ids
from .domains import Domain, KnapsackDomain, MatchingDomain, SetPackingDomain
from .objectives import Objective, RestrictedObjective
from .solvers import Solver, SolverError, local_search_iterations, omniscient_optimum, solve

TOL = 1e-9


@dataclass(frozen=True)
class StrategyConfig:
    epsilon: float
    delta: float
    objective_kind: str = "linear"
    alpha: float = 1.0
    beta: float = 1.0
    eta: float = 1.0
    N_override: int | None = None

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
        if self.objective_kind not in ("linear", "submodular"):
            raise ValueError(f"objective_kind must be 'linear' or 'submodular', got {self.objective_kind!r}")
        if min(self.alpha, self.beta, self.eta) <= 0:
            raise ValueError("alpha, beta and eta must be positive")
        if self.N_override is not None and self.N_override < 1:
            raise ValueError("N_override must be at least 1")

    def guarantee(self, gamma: int = 1) -> float:
        """Approximation factor promised with probability at least 1 - delta."""
        spread = max(self.alpha, self.beta) if self.objective_kind == "linear" else self.alpha + self.beta
        return (1 - self.epsilon) * self.alpha * self.eta / (gamma * spread)


def compute_round_count(cfg: StrategyConfig) -> int:
    if cfg.N_override is not None:
        return cfg.N_override
    a, b = cfg.alpha, cfg.beta
    spread = max(a, b) if cfg.objective_kind == "linear" else a + b
    numer = 16 * math.log(1 / min(cfg.delta, cfg.epsilon))
    return max(1, math.ceil(numer / (a * min(2.0, spread) * cfg.eta * cfg.epsilon)))


def optimistic_objective(f: Objective, ks: KnowledgeState) -> RestrictedObjective:
    return RestrictedObjective(f, ks.known_active | ks.unknown)


def pessimistic_objective(f: Objective, ks: KnowledgeState) -> RestrictedObjective:
    return RestrictedObjective(f, ks.known_active)


@dataclass
class StrategyReport:
    rounds_used: int
    queries_total: int
    queries_per_round: list
    realized_value: float
    omniscient_value: float
    final_solution: frozenset
    N: int = 0
    transcript: QueryTranscript | None = field(default=None, repr=False)
    round_solutions: list = field(default_factory=list, repr=False)

    @property
    def ratio(self) -> float:
        if self.omniscient_value <= TOL:
            return 1.0
        return self.realized_value / self.omniscient_value

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "rounds_used": self.rounds_used,
            "queries_total": self.queries_total,
            "queries_per_round": list(self.queries_per_round),
            "realized": self.realized_value,
            "omniscient": self.omniscient_value,
            "ratio": self.ratio,
            "final_solution": sorted_ids(self.final_solution),
        }


def realized_value(f: Objective, X, scenario: ActivationScenario, queried) -> float:
    return f.value(frozenset(X) & scenario.active & frozenset(queried))


def run_algorithm1(f: Objective, D: Domain, solver: Solver, scenario: ActivationScenario,
                   cfg: StrategyConfig, rng=None, early_exit: bool = True) -> StrategyReport:
    """Solve the optimistic problem, query the solution, repeat; finish on the pessimistic problem.

    Each round queries only the not-yet-queried members of the optimistic
    solution. When the optimistic solution has no unknown members the
    optimistic and pessimistic problems agree on it and the loop stops early.
    ``rng`` is accepted for interface symmetry; every step here is deterministic.
    """
    N = compute_round_count(cfg)
    tr = QueryTranscript(D.n)
    per_round, sols = [], []
    for _ in range(N):
        ks = tr.knowledge_state()
        Y = solve(solver, optimistic_objective(f, ks), D, avoid=ks.known_inactive)
        sols.append(Y)
        fresh = Y & ks.unknown
        if not fresh and early_exit:
            break
        tr.apply_round(fresh, scenario)
        per_round.append(len(fresh))
    ks = tr.knowledge_state()
    X = solve(solver, pessimistic_objective(f, ks), D, avoid=ks.known_inactive | ks.unknown)
    _, opt = omniscient_optimum(f, D, scenario.active)
    return StrategyReport(
        rounds_used=tr.adaptivity,
        queries_total=tr.queries_total,
        queries_per_round=per_round,
        realized_value=realized_value(f, X, scenario, tr.queried),
        omniscient_value=opt,
        final_solution=X,
        N=N,
        transcript=tr,
        round_solutions=sols,
    )


def run_adaptive_local_search(f: Objective, D: Domain, scenario: ActivationScenario, k: int,
                              epsilon_ls: float, rng=None) -> StrategyReport:
    """Local search that queries each candidate insertion before committing to it.

    Moves are ranked by the value they would reach if the inserted element is
    active (everything already in the solution is known active). An inactive
    candidate is discarded and the next-best move tried; one query per round.
    """
    if not isinstance(D, (MatchingDomain, SetPackingDomain)):
        raise SolverError(f"k-exchange local search not supported on {D.kind!r}")

    tr = QueryTranscript(D.n)
    limit = local_search_iterations(D.max_cardinality(), epsilon_ls)
    X: frozenset = frozenset()
    fx = f.value(X)
    steps = 0
    while steps < limit:
        ks = tr.knowledge_state()
        members = sorted(X)
        moves = []
        for e in sorted(set(range(D.n)) - X - ks.known_inactive):
            for r in range(min(k, len(members)) + 1):
                for T in itertools.combinations(members, r):
                    Z = (X | {e}) - frozenset(T)
                    if D.is_feasible(Z):
                        moves.append((f.value(Z), e, Z))
        best = None
        for val, e, Z in moves:
            if val > fx + TOL and (best is None or val > best[0] + TOL):
                best = (val, e, Z)
        if best is None:
            break
        val, e, Z = best
        if e not in tr.revealed:
            tr.apply_round({e}, scenario)
        if tr.revealed[e]:
            X, fx = Z, val
            steps += 1
    _, opt = omniscient_optimum(f, D, scenario.active)
    return StrategyReport(
        rounds_used=tr.adaptivity,
        queries_total=tr.queries_total,
        queries_per_round=[1] * tr.adaptivity,
        realized_value=realized_value(f, X, scenario, tr.queried),
        omniscient_value=opt,
        final_solution=X,
        N=limit,
        transcript=tr,
    )


def heavy_light_split(sizes, threshold: float = 1 / 3) -> tuple[list[int], list[int]]:
    light = [e for e, c in enumerate(sizes) if c <= threshold]
    heavy = [e for e, c in enumerate(sizes) if c > threshold]
    return light, heavy


def run_knapsack_combined(f: Objective, sizes, scenario: ActivationScenario, cfg: StrategyConfig,
                          rng=None, solver: Solver | None = None) -> StrategyReport:
    """Run the round-based strategy on light items and on heavy items side by side; keep the better.

    ``cfg`` supplies epsilon, delta, eta and the objective kind. The light run
    uses uniformity (p, p); the heavy run uses (p, 1 - (1-p)^2) because at most
    two heavy items fit. p is the smallest activation probability.
    """
    solver = solver or Solver("brute-force")
    D = KnapsackDomain(sizes)
    light, heavy = heavy_light_split(D.sizes)
    p = scenario.p_min
    runs = []
    for part, beta in ((light, p), (heavy, 1 - (1 - p) ** 2)):
        if not part:
            continue
        sub_cfg = StrategyConfig(cfg.epsilon, cfg.delta, cfg.objective_kind, p, beta, cfg.eta, cfg.N_override)
        sub_f = RestrictedObjective(f, part)
        sub_D = _SubKnapsack(D, part)
        runs.append(run_algorithm1(sub_f, sub_D, solver, scenario, sub_cfg, rng))
    _, opt = omniscient_optimum(f, D, scenario.active)
    if not runs:
        return StrategyReport(0, 0, [], 0.0, opt, frozenset())
    best = max(runs, key=lambda r: r.realized_value)
    queried = frozenset().union(*(r.transcript.queried for r in runs))
    per_round = [sum(r.queries_per_round[t] for r in runs if t < len(r.queries_per_round))
                 for t in range(max(len(r.queries_per_round) for r in runs))]
    return StrategyReport(
        rounds_used=max(r.rounds_used for r in runs),
        queries_total=len(queried),
        queries_per_round=per_round,
        realized_value=realized_value(f, best.final_solution, scenario, queried),
        omniscient_value=opt,
        final_solution=best.final_solution,
        N=max(r.N for r in runs),
    )


class _SubKnapsack(KnapsackDomain):
    """Knapsack over the full ground set where only ``part`` may be used."""

    def __init__(self, base: KnapsackDomain, part):
        super().__init__(base.sizes)
        self.part = frozenset(part)
        self.kind = base.kind

    def is_feasible(self, X):
        return frozenset(X) <= self.part and super().is_feasible(X)
