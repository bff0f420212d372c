"""Objective criteria weighting: SD, COV, Entropy, CRITIC and MEREC.

Each public function takes a :class:`NormalizedMatrix` and returns a
:class:`WeightVector` whose diagnostics carry the method's intermediates.
The ``*_scores`` kernels return the un-normalized per-criterion scores for
arrays shaped ``(..., m, n)``; the stability sweep calls them on batches.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import (
    DegenerateDataError,
    IncompatibleMethodError,
    MCDAError,
    NormalizedMatrix,
    WeightMethod,
    WeightVector,
    make_weights,
    parse_enum,
)


def _centered(n: np.ndarray) -> np.ndarray:
    return n - n.mean(axis=-2, keepdims=True)


def _constant(n: np.ndarray) -> np.ndarray:
    # exact test; centring a constant column can leave ulp-sized residue
    return np.all(n == n[..., :1, :], axis=-2)


def sd_scores(n: np.ndarray) -> np.ndarray:
    return np.std(n, axis=-2, ddof=1)


def cov_scores(n: np.ndarray) -> np.ndarray:
    return np.std(n, axis=-2, ddof=1) / np.mean(n, axis=-2)


def _proportions(n: np.ndarray) -> np.ndarray:
    return n / np.sum(n, axis=-2, keepdims=True)


def _entropy(p: np.ndarray) -> np.ndarray:
    m = p.shape[-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    return -plogp.sum(axis=-2) / np.log(m)


def entropy_scores(n: np.ndarray) -> np.ndarray:
    return np.where(_constant(n), 0.0, 1.0 - _entropy(_proportions(n)))


def pearson(n: np.ndarray) -> np.ndarray:
    """Criterion-by-criterion Pearson correlation; zero-variance pairs get r = 0."""
    z = _centered(n)
    ss = np.sqrt(np.sum(z * z, axis=-2, keepdims=True))
    flat = _constant(n)[..., None, :] | (ss == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(flat, 0.0, z / ss)
    r = np.swapaxes(u, -1, -2) @ u
    k = r.shape[-1]
    idx = np.arange(k)
    r[..., idx, idx] = 1.0
    return np.clip(r, -1.0, 1.0)


def critic_scores(n: np.ndarray) -> np.ndarray:
    return sd_scores(n) * np.sum(1.0 - pearson(n), axis=-1)


def _merec_parts(n: np.ndarray):
    crit = n.shape[-1]
    logs = np.abs(np.log(n))
    total = logs.sum(axis=-1)
    baseline = np.log1p(total / crit)
    removed = np.log1p((total[..., None] - logs) / crit)
    effects = np.abs(removed - baseline[..., None]).sum(axis=-2)
    return baseline, removed, effects


def merec_scores(n: np.ndarray) -> np.ndarray:
    return _merec_parts(n)[2]


SCORE_KERNELS: dict[WeightMethod, Callable[[np.ndarray], np.ndarray]] = {
    WeightMethod.SD: sd_scores,
    WeightMethod.COV: cov_scores,
    WeightMethod.ENTROPY: entropy_scores,
    WeightMethod.CRITIC: critic_scores,
    WeightMethod.MEREC: merec_scores,
}


def _need_rows(N: NormalizedMatrix, method: str) -> None:
    if N.shape[0] < 2:
        raise MCDAError(f"{method} needs at least 2 alternatives")


def weights_sd(N: NormalizedMatrix) -> WeightVector:
    _need_rows(N, "SD")
    s = sd_scores(N.values)
    if not s.sum() > 0:
        raise DegenerateDataError("no dispersion: every criterion is constant")
    return make_weights(
        s, WeightMethod.SD, N.criterion_ids, std=s, mean=N.values.mean(axis=0)
    )


def weights_cov(N: NormalizedMatrix) -> WeightVector:
    _need_rows(N, "COV")
    mean = N.values.mean(axis=0)
    for j in np.nonzero(mean <= 0)[0]:
        raise DegenerateDataError(f"COV undefined: column {N.criteria[j].id} has zero mean")
    s = sd_scores(N.values)
    cv = s / mean
    if not cv.sum() > 0:
        raise DegenerateDataError("no dispersion: every criterion is constant")
    return make_weights(cv, WeightMethod.COV, N.criterion_ids, std=s, mean=mean, cv=cv)


def weights_entropy(N: NormalizedMatrix) -> WeightVector:
    """Shannon-entropy weights with the ``0 ln 0 = 0`` convention."""
    _need_rows(N, "Entropy")
    sums = N.values.sum(axis=0)
    for j in np.nonzero(sums <= 0)[0]:
        raise DegenerateDataError(f"Entropy undefined: column {N.criteria[j].id} sums to zero")
    p = _proportions(N.values)
    e = np.where(_constant(N.values), 1.0, _entropy(p))
    # a near-uniform column can land a few ulps above 1
    d = np.clip(1.0 - e, 0.0, None)
    if not d.sum() > 0:
        raise DegenerateDataError("no information: every criterion is uniformly distributed")
    return make_weights(
        d, WeightMethod.ENTROPY, N.criterion_ids, proportions=p, entropy=e, diversification=d
    )


def weights_critic(N: NormalizedMatrix) -> WeightVector:
    _need_rows(N, "CRITIC")
    s = sd_scores(N.values)
    r = pearson(N.values)
    c = s * np.sum(1.0 - r, axis=-1)
    if not c.sum() > 0:
        raise DegenerateDataError("no contrast: CRITIC information content is zero everywhere")
    return make_weights(
        c, WeightMethod.CRITIC, N.criterion_ids,
        std=s, mean=N.values.mean(axis=0), correlation=r, information=c,
    )


def weights_merec(N: NormalizedMatrix) -> WeightVector:
    """Removal-effect weights.

    The aggregate score of alternative ``i`` is ``ln(1 + mean_j |ln n_ij|)``,
    taken over criteria; dropping criterion ``j`` keeps the same divisor.
    Removal effects are summed over alternatives.
    """
    if np.any(N.values <= 0):
        i, j = (int(v) for v in np.argwhere(N.values <= 0)[0])
        raise IncompatibleMethodError(
            f"MEREC undefined for non-positive normalized value at ({i},{j}); "
            "min-max normalization produces exact zeros and is incompatible with MEREC"
        )
    baseline, removed, effects = _merec_parts(N.values)
    if not effects.sum() > 0:
        raise DegenerateDataError("no removal effect: every normalized value equals 1")
    return make_weights(
        effects, WeightMethod.MEREC, N.criterion_ids,
        baseline_scores=baseline, removal_scores=removed, removal_effects=effects,
    )


WEIGHTING = {
    WeightMethod.SD: weights_sd,
    WeightMethod.COV: weights_cov,
    WeightMethod.ENTROPY: weights_entropy,
    WeightMethod.CRITIC: weights_critic,
    WeightMethod.MEREC: weights_merec,
}


def compute_weights(N: NormalizedMatrix, method: WeightMethod | str) -> WeightVector:
    if not isinstance(method, WeightMethod):
        method = parse_enum(WeightMethod, method)
    if method not in WEIGHTING:
        raise MCDAError(f"{method.value} is not an objective weighting method")
    return WEIGHTING[method](N)
