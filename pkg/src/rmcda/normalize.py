"""Sense-aware normalization schemes and the fixed-domain R-TOPSIS variants.

The ``*_kernel`` functions operate on arrays shaped ``(..., m, n)`` so the
stability sweep can push a whole batch of perturbed matrices through at once.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import (
    CriterionDomain,
    DecisionMatrix,
    DegenerateDataError,
    DomainError,
    MCDAError,
    NormalizedMatrix,
    Scheme,
)


def vector_kernel(x: np.ndarray, benefit: np.ndarray) -> np.ndarray:
    ratio = x / np.sqrt(np.sum(x * x, axis=-2, keepdims=True))
    return np.where(benefit, ratio, 1.0 - ratio)


def linear_scale_kernel(x: np.ndarray, benefit: np.ndarray) -> np.ndarray:
    hi = np.max(x, axis=-2, keepdims=True)
    lo = np.min(x, axis=-2, keepdims=True)
    return np.where(benefit, x / hi, lo / x)


def minmax_kernel(x: np.ndarray, benefit: np.ndarray) -> np.ndarray:
    hi = np.max(x, axis=-2, keepdims=True)
    lo = np.min(x, axis=-2, keepdims=True)
    span = hi - lo
    return np.where(benefit, (x - lo) / span, (hi - x) / span)


KERNELS = {
    Scheme.VECTOR: vector_kernel,
    Scheme.LINEAR_SCALE: linear_scale_kernel,
    Scheme.MINMAX: minmax_kernel,
}


def _wrap(matrix: DecisionMatrix, values: np.ndarray, scheme: Scheme) -> NormalizedMatrix:
    # ulp-level spill past the unit interval (e.g. 1 - x/||x|| for a lone row)
    values = np.clip(values, 0.0, 1.0)
    return NormalizedMatrix(matrix.alternatives, matrix.criteria, values, scheme)


def normalize_vector(matrix: DecisionMatrix) -> NormalizedMatrix:
    """Divide by the column's Euclidean norm; cost columns become ``1 - x/||x||``."""
    matrix.require_valid()
    norms = np.linalg.norm(matrix.values, axis=0)
    for j in np.nonzero(norms == 0)[0]:
        raise DegenerateDataError(f"column {matrix.criteria[j].id} has zero Euclidean norm")
    return _wrap(matrix, vector_kernel(matrix.values, matrix.benefit_mask), Scheme.VECTOR)


def normalize_linear_scale(matrix: DecisionMatrix) -> NormalizedMatrix:
    """Benefit: ``x / max``. Cost: ``min / x``."""
    matrix.require_valid()
    return _wrap(
        matrix, linear_scale_kernel(matrix.values, matrix.benefit_mask), Scheme.LINEAR_SCALE
    )


def normalize_minmax(matrix: DecisionMatrix) -> NormalizedMatrix:
    """Affine map of each column onto [0, 1], reversed for cost columns."""
    matrix.require_valid()
    x = matrix.values
    for j in np.nonzero(x.max(axis=0) == x.min(axis=0))[0]:
        raise DegenerateDataError(
            f"degenerate column for min-max: {matrix.criteria[j].id} is constant"
        )
    return _wrap(matrix, minmax_kernel(x, matrix.benefit_mask), Scheme.MINMAX)


def normalize(matrix: DecisionMatrix, scheme: Scheme | str) -> NormalizedMatrix:
    scheme = Scheme(scheme)
    if scheme is Scheme.VECTOR:
        return normalize_vector(matrix)
    if scheme is Scheme.LINEAR_SCALE:
        return normalize_linear_scale(matrix)
    if scheme is Scheme.MINMAX:
        return normalize_minmax(matrix)
    raise MCDAError(f"scheme {scheme.value} needs criterion domains; use normalize_rtopsis")


def default_domains(matrix: DecisionMatrix, headroom: float = 1.1) -> list[CriterionDomain]:
    """Zero floor and ``headroom`` times the observed column maximum as ceiling."""
    return [CriterionDomain(0.0, headroom * float(top)) for top in matrix.values.max(axis=0)]


def check_domains(matrix: DecisionMatrix, domains: Sequence[CriterionDomain]) -> None:
    if len(domains) != matrix.values.shape[1]:
        raise DomainError(
            f"{len(domains)} domains given for {matrix.values.shape[1]} criteria"
        )
    for j, d in enumerate(domains):
        column = matrix.values[:, j]
        for i in np.nonzero((column < d.lower) | (column > d.upper))[0]:
            raise DomainError(
                f"value {column[i]!r} at ({i},{j}) lies outside domain "
                f"[{d.lower!r}, {d.upper!r}] of {matrix.criteria[j].id}"
            )


def rtopsis_kernel(x: np.ndarray, lower: np.ndarray, upper: np.ndarray, variant: Scheme):
    if variant is Scheme.RTOPSIS_MAX:
        return x / upper
    return (x - lower) / (upper - lower)


def normalize_rtopsis(
    matrix: DecisionMatrix,
    domains: Sequence[CriterionDomain] | None = None,
    variant: Scheme | str = Scheme.RTOPSIS_MAX,
) -> NormalizedMatrix:
    """Normalize against fixed per-criterion domains instead of the observed data.

    Sense is *not* folded in here; it only enters when the ideal points are set.
    ``variant`` accepts ``Scheme.RTOPSIS_MAX`` / ``Scheme.RTOPSIS_MAXMIN`` or the
    short tokens ``"max"`` / ``"maxmin"``.
    """
    variant = rtopsis_variant(variant)
    if domains is None:
        domains = default_domains(matrix)
    check_domains(matrix, domains)
    lower = np.array([d.lower for d in domains])
    upper = np.array([d.upper for d in domains])
    values = rtopsis_kernel(matrix.values, lower, upper, variant)
    return NormalizedMatrix(matrix.alternatives, matrix.criteria, values, variant)


def rtopsis_variant(token: Scheme | str) -> Scheme:
    if isinstance(token, Scheme):
        if token.folds_sense:
            raise MCDAError(f"{token.value} is not an R-TOPSIS normalization")
        return token
    t = token.strip().lower().replace("_", "-")
    if t in ("max", Scheme.RTOPSIS_MAX.value):
        return Scheme.RTOPSIS_MAX
    if t in ("maxmin", "max-min", Scheme.RTOPSIS_MAXMIN.value):
        return Scheme.RTOPSIS_MAXMIN
    raise MCDAError(f"unknown R-TOPSIS variant {token!r} (expected max or maxmin)")
