"""Scale-free percolation in continuum space: exact simulation with reference integrals and estimators."""

from .errors import (
    ConfigError,
    DegenerateTailError,
    DivergenceError,
    InsufficientDataError,
    InvalidParameterError,
    SfpercError,
)
from .graphgen import (
    ModelParams,
    PairRandom,
    WeightedGraph,
    adjoin_point,
    build_graph,
    build_graph_cell,
    build_graph_naive,
    edge_prob,
)
from .pointprocess import BoxGeometry, PointSet, Topology, build_cell_grid, distance, sample_ppp
from .seeds import derive_seed
from .theory import Regime, RegimeReport, annealed_mean_degree, annealed_variance_degree, c0, c1, classify_regime
from .weights import WeightLaw, WeightVector, psi, sample_weights

__version__ = "0.1.0"

__all__ = [
    "BoxGeometry", "ConfigError", "DegenerateTailError", "DivergenceError", "InsufficientDataError",
    "InvalidParameterError", "ModelParams", "PairRandom", "PointSet", "Regime", "RegimeReport", "SfpercError",
    "Topology", "WeightLaw", "WeightVector", "WeightedGraph", "adjoin_point", "annealed_mean_degree",
    "annealed_variance_degree", "build_cell_grid", "build_graph", "build_graph_cell", "build_graph_naive", "c0",
    "c1", "classify_regime", "derive_seed", "distance", "edge_prob", "psi", "sample_ppp", "sample_weights",
]
