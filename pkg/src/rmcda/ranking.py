"""Alternative ranking with SAW, WP, TOPSIS and R-TOPSIS."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import (
    CriterionDomain,
    DecisionMatrix,
    DegenerateDataError,
    IncompatibleMethodError,
    MCDAError,
    NormalizedMatrix,
    RankMethod,
    RankResult,
    Scheme,
    Sense,
    WeightVector,
    rank_from_scores,
)
from .normalize import default_domains, normalize_rtopsis, rtopsis_variant


def _weights_for(N: NormalizedMatrix, w: WeightVector) -> np.ndarray:
    if len(w) != N.shape[1]:
        raise MCDAError(f"{len(w)} weights given for {N.shape[1]} criteria")
    if w.labels and w.labels != N.criterion_ids:
        raise MCDAError("weight labels do not match the matrix criteria")
    return w.weights


def _require_folded(N: NormalizedMatrix, method: str) -> None:
    if not N.scheme.folds_sense:
        raise IncompatibleMethodError(
            f"{method} needs a sense-folded normalization (vector, linear, minmax), "
            f"got {N.scheme.value}"
        )


def rank_saw(N: NormalizedMatrix, w: WeightVector) -> RankResult:
    """Weighted sum of normalized values."""
    _require_folded(N, "SAW")
    v = N.values @ _weights_for(N, w)
    return RankResult(RankMethod.SAW, N.alternatives, v, rank_from_scores(v))


def rank_wp(N: NormalizedMatrix, w: WeightVector) -> RankResult:
    """Weighted product, rescaled so the best alternative scores exactly 1."""
    _require_folded(N, "WP")
    weights = _weights_for(N, w)
    if np.any(N.values <= 0):
        i, j = (int(v) for v in np.argwhere(N.values <= 0)[0])
        raise IncompatibleMethodError(f"WP undefined at zero normalized value ({i},{j})")
    p = np.prod(N.values ** weights, axis=1)
    v = p / p.max()
    return RankResult(RankMethod.WP, N.alternatives, v, rank_from_scores(v), {"products": p})


def _closeness(y: np.ndarray, pis: np.ndarray, nis: np.ndarray):
    s_plus = np.sqrt(np.sum((pis - y) ** 2, axis=1))
    s_minus = np.sqrt(np.sum((y - nis) ** 2, axis=1))
    return s_plus, s_minus, s_minus / (s_plus + s_minus)


def rank_topsis(
    N: NormalizedMatrix, w: WeightVector, senses: Sequence[Sense] | None = None
) -> RankResult:
    """Relative closeness to the data-driven positive and negative ideal points.

    With ``senses=None`` a sense-folded matrix is treated as all-benefit (cost
    columns were already inverted) and an unfolded one uses its criteria's
    senses. Explicit ``senses`` are applied literally.
    """
    weights = _weights_for(N, w)
    if senses is None:
        if N.scheme.folds_sense:
            senses = [Sense.BENEFIT] * N.shape[1]
        else:
            senses = [c.sense for c in N.criteria]
    if len(senses) != N.shape[1]:
        raise MCDAError(f"{len(senses)} senses given for {N.shape[1]} criteria")
    benefit = np.array([Sense(s) is Sense.BENEFIT for s in senses])

    y = N.values * weights
    hi, lo = y.max(axis=0), y.min(axis=0)
    pis = np.where(benefit, hi, lo)
    nis = np.where(benefit, lo, hi)
    if np.array_equal(pis, nis):
        raise DegenerateDataError("indistinguishable alternatives: A+ equals A- on every criterion")
    s_plus, s_minus, c = _closeness(y, pis, nis)
    detail = {"weighted": y, "pis": pis, "nis": nis, "s_plus": s_plus, "s_minus": s_minus}
    return RankResult(RankMethod.TOPSIS, N.alternatives, c, rank_from_scores(c), detail)


def rank_rtopsis(
    X: DecisionMatrix,
    w: WeightVector,
    domains: Sequence[CriterionDomain] | None = None,
    variant: Scheme | str = Scheme.RTOPSIS_MAX,
) -> RankResult:
    """TOPSIS against ideal points fixed by the criterion domains.

    Both the normalization and the ideal points depend only on the domains, so
    each alternative's closeness is computed from its own row alone: adding or
    removing alternatives never moves anyone else's score.

    Ideal points are the weighted images of the domain bounds under the chosen
    normalization: ``w`` for the upper bound and ``(d1/d2) w`` (Max) or ``0``
    (Max-Min) for the lower one. Benefit criteria aim at the upper bound, cost
    criteria at the lower.
    """
    variant = rtopsis_variant(variant)
    if domains is None:
        domains = default_domains(X)
    N = normalize_rtopsis(X, domains, variant)
    weights = _weights_for(N, w)
    lower = np.array([d.lower for d in domains])
    upper = np.array([d.upper for d in domains])
    floor = lower / upper if variant is Scheme.RTOPSIS_MAX else np.zeros_like(lower)

    y = N.values * weights
    top, bottom = weights, floor * weights
    benefit = X.benefit_mask
    pis = np.where(benefit, top, bottom)
    nis = np.where(benefit, bottom, top)
    s_plus, s_minus, c = _closeness(y, pis, nis)
    detail = {
        "weighted": y, "pis": pis, "nis": nis, "s_plus": s_plus, "s_minus": s_minus,
        "variant": variant.value,
        "domains": [(d.lower, d.upper) for d in domains],
    }
    return RankResult(RankMethod.RTOPSIS, X.alternatives, c, rank_from_scores(c), detail)


def mean_ranks(results: Sequence[RankResult]) -> tuple[np.ndarray, np.ndarray]:
    """Mean rank per alternative across methods and the final rank it implies."""
    if not results:
        raise MCDAError("no rank results to combine")
    mean = np.mean([r.ranks for r in results], axis=0)
    return mean, rank_from_scores(mean, higher_is_better=False)
