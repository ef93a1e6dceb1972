"""Seeded instance generators, trial orchestration and batch map certification.

Every random choice flows from one 64-bit seed through ``RandomSource``
children, so a (config, seed) pair fixes every emitted byte apart from the
wall-time field of the summary.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import RandomSource, sample_activation, sorted_ids, uniform_probs
from .domains import (
    Domain,
    IntersectionDomain,
    KnapsackDomain,
    MatchingDomain,
    MatroidDomain,
    PartitionMatroid,
    domain_from_dict,
    k_exchange_certificate,
    verify_matroid_axioms,
)
from .exchange import (
    ExchangeError,
    build_knapsack_heavy_map,
    build_knapsack_light_map,
    build_matroid_rota_map,
    build_path_exchange_map,
    build_path_multiset,
    build_trivial_k_exchange_map,
    certify_uniformity,
    compose_maps,
    verify_gain_bound,
)
from .objectives import (
    CoverageObjective,
    LinearObjective,
    Objective,
    check_axioms,
    objective_from_dict,
    verify_covering_complement_lemma,
    verify_covering_lemma,
)
from .solvers import solver_from_dict
from .strategy import StrategyConfig, run_adaptive_local_search, run_algorithm1, run_knapsack_combined

MAX_ELEMENTS = 22
CSV_COLUMNS = ("trial", "seed", "domain", "objective", "p", "epsilon", "delta", "N",
               "rounds_used", "queries_total", "realized", "omniscient", "ratio")
STRATEGIES = ("algorithm1", "adaptive-local-search", "knapsack-combined")
HEAVY = 1 / 3


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# instance generation


def _gen(rng) -> np.random.Generator:
    return rng.generator if isinstance(rng, RandomSource) else np.random.default_rng(rng)


def _uniform(gen, lo_hi, size=None):
    lo, hi = lo_hi
    return gen.uniform(lo, hi, size)


def _check_cap(n: int):
    if n > MAX_ELEMENTS:
        raise ConfigError(f"instance has {n} elements; the cap is {MAX_ELEMENTS}")


def random_graph_matching(gen, n_vertices: int, edge_prob: float, weight_range=(1.0, 10.0)):
    pairs = list(itertools.combinations(range(n_vertices), 2))
    if not pairs:
        raise ConfigError("need at least two vertices")
    while True:
        keep = gen.random(len(pairs)) < edge_prob
        if keep.any():
            break
    edges = [e for e, k in zip(pairs, keep) if k]
    _check_cap(len(edges))
    return MatchingDomain(edges), LinearObjective(_uniform(gen, weight_range, len(edges)))


def random_partition_matroid(gen, n: int, blocks: int = 3, capacity_range=(1, 2), weight_range=(1.0, 10.0)):
    _check_cap(n)
    label = gen.integers(blocks, size=n)
    parts = [[e for e in range(n) if label[e] == b] for b in range(blocks)]
    caps = [int(gen.integers(capacity_range[0], capacity_range[1] + 1)) for _ in range(blocks)]
    M = PartitionMatroid(parts, caps, n=n)
    return MatroidDomain(M), LinearObjective(_uniform(gen, weight_range, n))


def random_knapsack(gen, n: int, size_range=(0.05, 0.6), weight_range=(1.0, 10.0),
                    heavy_fraction: float | None = None, heavy_range=(0.34, 0.6)):
    """Sizes drawn from ``size_range``; with ``heavy_fraction`` that share is
    redrawn above 1/3 and the rest kept at or below it."""
    _check_cap(n)
    if heavy_fraction is None:
        sizes = _uniform(gen, size_range, n)
    else:
        n_heavy = int(round(heavy_fraction * n))
        light_hi = min(size_range[1], HEAVY)
        sizes = np.concatenate([_uniform(gen, heavy_range, n_heavy),
                                _uniform(gen, (size_range[0], light_hi), n - n_heavy)])
        sizes = sizes[gen.permutation(n)]
    sizes = np.minimum(sizes, 1.0)
    return KnapsackDomain([float(c) for c in sizes]), LinearObjective(_uniform(gen, weight_range, n))


def random_coverage(gen, n: int, items: int = 8, density: float = 0.3, weight_range=(1.0, 10.0)):
    inc = gen.random((n, items)) < density
    sets = [sorted(int(i) for i in np.flatnonzero(row)) for row in inc]
    return CoverageObjective(sets, [float(w) for w in _uniform(gen, weight_range, items)])


DOMAIN_GENERATORS = {
    "random-graph-matching": random_graph_matching,
    "random-partition-matroid": random_partition_matroid,
    "random-knapsack": random_knapsack,
}


def _call(fn, gen, spec: dict):
    args = {k: v for k, v in spec.items() if k not in ("generator", "kind")}
    try:
        return fn(gen, **args)
    except TypeError as exc:
        raise ConfigError(f"{spec.get('generator')}: {exc}") from None


def generate_instance(spec: dict, rng) -> tuple[Domain, Objective]:
    """Build a (domain, objective) pair from a spec.

    ``spec`` is either a bare domain generator spec (its default objective is
    a random linear one) or ``{"domain": ..., "objective": ...}`` where each
    part is a generator spec or a fixed instance in dict form.
    """
    gen = _gen(rng)
    if "domain" not in spec:
        spec = {"domain": spec}
    dspec = spec["domain"]
    if "generator" in dspec:
        fn = DOMAIN_GENERATORS.get(dspec["generator"])
        if fn is None:
            raise ConfigError(f"unknown domain generator {dspec['generator']!r}")
        D, f = _call(fn, gen, dspec)
    else:
        D = domain_from_dict(dspec)
        f = LinearObjective(np.ones(D.n))
    _check_cap(D.n)
    ospec = spec.get("objective")
    if ospec is not None:
        if ospec.get("generator") == "random-coverage":
            f = _call(random_coverage, gen, {**ospec, "n": D.n})
        elif ospec.get("generator") == "random-linear":
            f = LinearObjective(_uniform(gen, ospec.get("weight_range", (1.0, 10.0)), D.n))
        elif "generator" in ospec:
            raise ConfigError(f"unknown objective generator {ospec['generator']!r}")
        else:
            f = objective_from_dict(ospec)
    if f.n != D.n:
        raise ConfigError(f"objective has {f.n} elements but the domain has {D.n}")
    return D, f


# --------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    instance: dict
    p: float | list = 0.5
    epsilon: float = 0.25
    delta: float = 0.25
    strategy: str = "algorithm1"
    solver: dict | str = "brute-force"
    trials: int = 1
    seed: int = 0
    fixed_instance: bool = False
    alpha: float | None = None
    beta: float | None = None
    eta: float | None = None
    N_override: int | None = None
    k: int | None = None
    epsilon_ls: float = 0.1
    threshold: float | None = None
    out: str | None = None
    format: str = "csv"
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        ps = [self.p] if np.isscalar(self.p) else list(self.p)
        if not ps or any(not 0 < q <= 1 for q in ps):
            raise ConfigError("activation probabilities must lie in (0, 1]")
        for name in ("epsilon", "delta"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie strictly inside (0, 1)")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        self.solver_obj = solver_from_dict(self.solver)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        if "instance" not in d:
            raise ConfigError("config needs an 'instance' entry")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        return cls.from_dict(data)


@dataclass
class AggregateSummary:
    trials: int
    mean_ratio: float
    min_ratio: float
    threshold: float
    success_probability: float
    mean_queries: float
    mean_rounds: float
    wall_time: float = field(default=0.0, compare=False)

    @classmethod
    def from_rows(cls, rows: list[dict], threshold: float, wall_time: float = 0.0) -> "AggregateSummary":
        ratios = np.array([r["ratio"] for r in rows], dtype=float)
        return cls(
            trials=len(rows),
            mean_ratio=float(ratios.mean()),
            min_ratio=float(ratios.min()),
            threshold=float(threshold),
            success_probability=float(np.mean(ratios >= threshold - 1e-9)),
            mean_queries=float(np.mean([r["queries_total"] for r in rows])),
            mean_rounds=float(np.mean([r["rounds_used"] for r in rows])),
            wall_time=wall_time,
        )


def _probs(cfg: ExperimentConfig, n: int) -> tuple[float, ...]:
    if np.isscalar(cfg.p):
        return uniform_probs(n, float(cfg.p))
    if len(cfg.p) != n:
        raise ConfigError(f"got {len(cfg.p)} probabilities for {n} elements")
    return tuple(float(q) for q in cfg.p)


def default_uniformity(D: Domain, p: float) -> tuple[float, float]:
    """(alpha, beta) of the simplest exchange map available for the domain kind."""
    if isinstance(D, MatroidDomain) or D.kind in ("matroid-base", "cardinality", "knapsack"):
        return p, p
    return p, p * D.system_k()


def objective_kind(f: Objective) -> str:
    return "linear" if f.is_linear else "submodular"


def strategy_config(cfg: ExperimentConfig, D: Domain, f: Objective, p_min: float) -> StrategyConfig:
    a, b = default_uniformity(D, p_min)
    eta = cfg.eta if cfg.eta is not None else cfg.solver_obj.declared_eta(D)
    return StrategyConfig(cfg.epsilon, cfg.delta, objective_kind(f),
                          cfg.alpha if cfg.alpha is not None else a,
                          cfg.beta if cfg.beta is not None else b,
                          eta, cfg.N_override)


def success_threshold(cfg: ExperimentConfig, scfg: StrategyConfig | None, k: int | None) -> float:
    if cfg.threshold is not None:
        return cfg.threshold
    if cfg.strategy == "knapsack-combined":
        return (1 - cfg.epsilon) / 5
    if cfg.strategy == "adaptive-local-search":
        return (1 - cfg.epsilon_ls) / (k + 1)
    return scfg.guarantee()


def _run_trial(cfg: ExperimentConfig, root: RandomSource, fixed, t: int) -> tuple[dict, float]:
    trial_rng = root.child(t)
    D, f = fixed if fixed is not None else generate_instance(cfg.instance, trial_rng.child("instance"))
    scenario = sample_activation(_probs(cfg, D.n), trial_rng.child("activation"))
    scfg = strategy_config(cfg, D, f, scenario.p_min)
    k = cfg.k
    if k is None and cfg.strategy == "adaptive-local-search":
        k = D.system_k()
    if cfg.strategy == "algorithm1":
        rep = run_algorithm1(f, D, cfg.solver_obj, scenario, scfg, trial_rng.child("strategy"))
    elif cfg.strategy == "adaptive-local-search":
        rep = run_adaptive_local_search(f, D, scenario, k, cfg.epsilon_ls, trial_rng.child("strategy"))
    else:
        if not isinstance(D, KnapsackDomain):
            raise ConfigError("knapsack-combined needs a knapsack instance")
        rep = run_knapsack_combined(f, D.sizes, scenario, scfg, trial_rng.child("strategy"))
    row = {
        "trial": t,
        "seed": trial_rng.derived_seed(),
        "domain": D.kind,
        "objective": f.kind,
        "p": scenario.p_min,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "N": rep.N,
        "rounds_used": rep.rounds_used,
        "queries_total": rep.queries_total,
        "realized": rep.realized_value,
        "omniscient": rep.omniscient_value,
        "ratio": rep.ratio,
    }
    return row, success_threshold(cfg, scfg, k)


def run_experiment(cfg: ExperimentConfig) -> tuple[AggregateSummary, list[dict]]:
    start = time.perf_counter()
    root = RandomSource(int(cfg.seed))
    fixed = generate_instance(cfg.instance, root.child("instance")) if cfg.fixed_instance else None
    if cfg.threads == 1:
        results = [_run_trial(cfg, root, fixed, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(lambda t: _run_trial(cfg, root, fixed, t), range(cfg.trials)))
    rows = [r for r, _ in results]
    # per-trial thresholds differ only through p_min; the summary records the loosest one
    threshold = min(th for _, th in results)
    return AggregateSummary.from_rows(rows, threshold, time.perf_counter() - start), rows


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: list[dict], summary: AggregateSummary | None = None) -> str:
    payload = {"rows": rows}
    if summary is not None:
        s = asdict(summary)
        s.pop("wall_time")
        payload["summary"] = s
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# map certification


MAP_KINDS = ("trivial-k-exchange", "path-k-exchange", "matroid-rota", "composition",
             "knapsack-heavy", "knapsack-light")
CERTIFY_COLUMNS = ("pair", "kind", "X", "Y", "alpha_hat", "beta_hat", "method", "samples", "radius",
                   "vacuous", "violations", "gain_slack")


def _pairs(D: Domain, gen, count: int):
    fam = D.enumerate_feasible()
    out = []
    for _ in range(count):
        X = fam[int(gen.integers(len(fam)))]
        Y = fam[int(gen.integers(len(fam)))]
        out.append((X, Y))
    return out


def _build_map(kind: str, D: Domain, X, Y, p: float, cfg: dict, gen):
    if kind == "trivial-k-exchange":
        return build_trivial_k_exchange_map(k_exchange_certificate(D, X, Y))
    if kind == "path-k-exchange":
        cert = k_exchange_certificate(D, X, Y)
        return build_path_exchange_map(cert, build_path_multiset(cert, int(cfg.get("h", 1))), p)
    if kind == "matroid-rota":
        return build_matroid_rota_map(D.matroid, X, Y, p)
    if kind == "composition":
        return compose_maps([build_matroid_rota_map(M, X, Y, p) for M in D.matroids], D)
    if kind == "knapsack-heavy":
        return build_knapsack_heavy_map(D, X, Y, 2)
    if kind == "knapsack-light":
        return build_knapsack_light_map(D, X, Y)
    raise ConfigError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")


def _certify_instance(kind: str, spec: dict, gen) -> tuple[Domain, Objective]:
    if kind == "composition":
        n = spec.get("n", 8)
        mats = []
        for _ in range(spec.get("matroids", 2)):
            Dm, _ = random_partition_matroid(gen, n, spec.get("blocks", 3), tuple(spec.get("capacity_range", (1, 2))))
            mats.append(Dm.matroid)
        D = IntersectionDomain(mats)
        return D, LinearObjective(_uniform(gen, (1.0, 10.0), n))
    return generate_instance(spec, gen)


def certify_maps_command(cfg: dict) -> list[dict]:
    """Certify uniformity (and the gain bound, where exact) of one map kind on sampled (X, Y) pairs."""
    kind = cfg.get("map", "trivial-k-exchange")
    if kind not in MAP_KINDS:
        raise ConfigError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")
    p = float(cfg.get("p", 0.5))
    pairs = int(cfg.get("pairs", cfg.get("trials", 20)))
    root = RandomSource(int(cfg.get("seed", 0)))
    gen = root.child("instance").generator
    D, f = _certify_instance(kind, cfg.get("instance", {}), gen)
    method = "monte-carlo" if kind == "knapsack-light" else cfg.get("method", "exact")
    rows = []
    for i, (X, Y) in enumerate(_pairs(D, root.child("pairs").generator, pairs)):
        m = _build_map(kind, D, X, Y, p, cfg, gen)
        rep = certify_uniformity(m, p, method, int(cfg.get("samples", 20000)), root.child(i))
        slack = verify_gain_bound(m, f, objective_kind(f), p) if m.enumerable else float("nan")
        rows.append({"pair": i, "X": " ".join(map(str, sorted_ids(X))), "Y": " ".join(map(str, sorted_ids(Y))),
                     **rep.to_row(), "gain_slack": slack})
    return rows


# --------------------------------------------------------------------------
# property suites


def check_command(cfg: dict) -> list[dict]:
    """Run axiom and lemma checks on seeded instances; one row per check."""
    root = RandomSource(int(cfg.get("seed", 0)))
    count = int(cfg.get("instances", cfg.get("trials", 10)))
    rows = []

    def record(name, i, ok, detail=""):
        rows.append({"check": name, "instance": i, "ok": bool(ok), "detail": detail})

    for i in range(count):
        gen = root.child(i).generator
        D, f = generate_instance(cfg.get("instance", {"generator": "random-graph-matching",
                                                     "n_vertices": 5, "edge_prob": 0.7}), gen)
        if D.n <= 15:
            rep = check_axioms(f)
            record("objective-axioms", i, rep.ok, str(rep))
            for q in (0.2, 0.5, 0.8):
                m = np.full(f.n, q)
                s1 = verify_covering_lemma(f, m)
                s2 = verify_covering_complement_lemma(f, m)
                record(f"covering-lemma@{q}", i, s1 >= -1e-9, repr(s1))
                record(f"covering-complement@{q}", i, s2 >= -1e-9, repr(s2))
        if isinstance(D, MatroidDomain):
            record("matroid-axioms", i, verify_matroid_axioms(D.matroid))
        if D.kind in ("matching", "k-set-packing"):
            fam = D.enumerate_feasible()
            X, Y = fam[int(gen.integers(len(fam)))], fam[int(gen.integers(len(fam)))]
            cert = k_exchange_certificate(D, X, Y)
            record("k-exchange-certificate", i, cert.verify())
            for h in (1, 2):
                try:
                    pm = build_path_multiset(cert, h)
                except ExchangeError as exc:
                    record(f"path-multiset@h={h}", i, False, str(exc))
                    continue
                record(f"path-multiset@h={h}", i, pm.verify(), pm.method)
    return rows
