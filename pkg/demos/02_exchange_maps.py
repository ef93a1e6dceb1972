# Certify the uniformity of each exchange map by exact enumeration (or sampling
# for the circle map) and compare with its closed-form (alpha, beta).
# Run: python demos/02_exchange_maps.py
from stochsub import KnapsackDomain, MatchingDomain, PartitionMatroid, UniformMatroid, k_exchange_certificate
from stochsub.exchange import (
    build_knapsack_heavy_map,
    build_knapsack_light_map,
    build_matroid_rota_map,
    build_path_exchange_map,
    build_path_multiset,
    build_trivial_k_exchange_map,
    certify_uniformity,
    compose_maps,
    path_uniformity,
)

p = 0.5


def show(label, rep, target):
    print(f"{label:<28} alpha={rep.alpha_hat:.4f} beta={rep.beta_hat:.4f}  target {target}  "
          f"violations={rep.violations}")


# a 4-cycle plus a pendant edge; X and Y are the two perfect matchings of the cycle
D = MatchingDomain([(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
cert = k_exchange_certificate(D, {0, 2}, {1, 3})
show("trivial 2-exchange", certify_uniformity(build_trivial_k_exchange_map(cert), p), (p, 2 * p))

# longer paths shrink alpha; the guaranteed alpha/beta = h / (h(k-1) + 1) climbs toward 1/(k-1)
for h in (1, 2, 3):
    pm = build_path_multiset(cert, h)
    a, b = path_uniformity(p, h, 2)
    rep = certify_uniformity(build_path_exchange_map(cert, pm, p), p)
    show(f"path map h={h} ({pm.method})", rep, (round(a, 4), round(b, 4)))
    print(f"{'':<28} alpha/beta = {rep.alpha_hat / rep.beta_hat:.3f} (guaranteed >= {a / b:.3f})")

show("matroid (uniform bases)",
     certify_uniformity(build_matroid_rota_map(UniformMatroid(6, 3), {0, 1, 2}, {3, 4, 5}, p, bases=True), p),
     (p, p))

M1 = PartitionMatroid([[0, 1, 2], [3, 4, 5]], [1, 2])
M2 = PartitionMatroid([[0, 1], [3, 4], [5]], [1, 1, 1], n=6)
maps = [build_matroid_rota_map(M, {0, 3}, {1, 4, 5}, p) for M in (M1, M2)]
show("two-matroid composition", certify_uniformity(compose_maps(maps), p), (p, 2 * p))

K = KnapsackDomain([0.5, 0.5, 0.4, 0.45])
show("heavy items, all-or-nothing", certify_uniformity(build_knapsack_heavy_map(K, {0, 1}, {2, 3}, 2), p),
     (p, 1 - (1 - p) ** 2))

L = KnapsackDomain([0.2] * 7)
rep = certify_uniformity(build_knapsack_light_map(L, {0, 1, 2, 3}, {4, 5, 6}), p, "monte-carlo", 50_000, rng=1)
show("light items, circle map", rep, (p, p * 0.6))
print(f"{'':<28} (Monte-Carlo, 3-sigma radius {rep.radius:.4f}; exchanges land in two knapsacks)")
