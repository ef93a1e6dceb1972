"""Exchange maps and their certification."""
from .base import (
    ExchangeError,
    ExchangeMap,
    UniformityReport,
    activation_distribution,
    certify_uniformity,
    expected_gain,
    gain_lower_bound,
    verify_gain_bound,
)
from .maps import (
    AllOrNothingMap,
    ComposedMap,
    KnapsackLightMap,
    TrivialKExchangeMap,
    build_knapsack_heavy_map,
    build_knapsack_light_map,
    build_trivial_k_exchange_map,
    compose_maps,
)
from .paths import (
    PathConstructionError,
    PathExchangeMap,
    PathMultiset,
    build_path_exchange_map,
    build_path_multiset,
    exchange_graph,
    n_paths,
    path_uniformity,
    table_uniformity,
)
from .rota import RotaMap, build_matroid_rota_map
