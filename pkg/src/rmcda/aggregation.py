"""Geometric-mean aggregation of weight vectors and per-category weight shares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Category,
    Criterion,
    DegenerateDataError,
    MCDAError,
    WeightMethod,
    WeightVector,
    make_weights,
)


def aggregate_gm(weight_vectors: Sequence[WeightVector]) -> WeightVector:
    """Per-criterion geometric mean, renormalized onto the simplex.

    Raw geometric means of simplex vectors sum to less than one, so the
    result is divided by its total.
    """
    if len(weight_vectors) < 2:
        raise MCDAError("geometric-mean aggregation needs at least 2 weight vectors")
    sizes = {len(v) for v in weight_vectors}
    if len(sizes) != 1:
        raise MCDAError(f"weight vectors differ in length: {sorted(sizes)}")
    labels = weight_vectors[0].labels
    if any(v.labels and labels and v.labels != labels for v in weight_vectors):
        raise MCDAError("weight vectors are labelled with different criteria")

    stack = np.array([v.weights for v in weight_vectors])
    if np.any(stack <= 0):
        raise DegenerateDataError("GM undefined at zero weight")
    # log domain keeps the product independent of input order
    raw = np.exp(np.mean(np.log(np.sort(stack, axis=0)), axis=0))
    return make_weights(raw, WeightMethod.AGGREGATED, labels)


@dataclass(frozen=True)
class CategoricalSummary:
    shares: dict[Category, float]  # percent
    max_min_ratio: float


def categorize(w: WeightVector, criteria: Sequence[Criterion]) -> CategoricalSummary:
    if len(criteria) != len(w):
        raise MCDAError(f"{len(criteria)} criteria given for {len(w)} weights")
    shares = {}
    for cat in Category:
        members = [j for j, c in enumerate(criteria) if c.category is cat]
        if members:
            shares[cat] = 100.0 * float(np.sum(w.weights[members]))
    values = list(shares.values())
    lo = min(values)
    ratio = float("inf") if lo == 0 else max(values) / lo
    return CategoricalSummary(shares, ratio)
