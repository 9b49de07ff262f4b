"""Listwise large-margin ranking surrogates, a perceptron-like online ranker,
a regularized batch trainer and brute-force verification utilities."""

from ._accel import BACKEND
from .measures import MAP, NDCG, RankingMeasure
from .metrics import ideal_dcg, map_score, ndcg, ndcg_at_k, permutation_from_scores
from .query import QueryInstance
from .surrogate import (
    SlamConfig,
    SlamWeights,
    slam_loss,
    slam_loss_and_grad,
    slam_subgradient_params,
    slam_subgradient_scores,
    v_max_ratio,
    weights_for,
    weights_map,
    weights_ndcg,
    weights_ndcg_at_k,
)
from .data import Dataset, SyntheticSpec, generate_synthetic, parse_ranking_file

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "MAP",
    "NDCG",
    "RankingMeasure",
    "ideal_dcg",
    "map_score",
    "ndcg",
    "ndcg_at_k",
    "permutation_from_scores",
    "QueryInstance",
    "SlamConfig",
    "SlamWeights",
    "slam_loss",
    "slam_loss_and_grad",
    "slam_subgradient_params",
    "slam_subgradient_scores",
    "v_max_ratio",
    "weights_for",
    "weights_map",
    "weights_ndcg",
    "weights_ndcg_at_k",
    "Dataset",
    "SyntheticSpec",
    "generate_synthetic",
    "parse_ranking_file",
]
