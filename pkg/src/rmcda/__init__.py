"""Robust multi-criteria decision analysis.

Normalize a decision matrix, derive objective criteria weights, test how
stable each weighting method is under data perturbation, aggregate the most
stable methods by geometric mean and rank the alternatives.
"""

__version__ = "0.1.0"

from .aggregation import CategoricalSummary, aggregate_gm, categorize
from .core import (
    Category,
    Criterion,
    CriterionDomain,
    DecisionMatrix,
    MCDAError,
    NormalizedMatrix,
    RankMethod,
    RankResult,
    Scheme,
    Sense,
    WeightMethod,
    WeightVector,
    rank_from_scores,
    validate,
)
from .normalize import (
    normalize,
    normalize_linear_scale,
    normalize_minmax,
    normalize_rtopsis,
    normalize_vector,
)
from .ranking import rank_rtopsis, rank_saw, rank_topsis, rank_wp
from .robustness import (
    PerturbationConfig,
    cluster_methods,
    perturb,
    select_stable_methods,
    stability_sweep,
)
from .weighting import (
    weights_cov,
    weights_critic,
    weights_entropy,
    weights_merec,
    weights_sd,
)
