"""Monte Carlo stability of weighting methods and Ward clustering of the methods.

Reproducibility contract: the noise for iteration ``t`` of method ``M`` at grid
level ``e`` is drawn from ``numpy.random.default_rng([master_seed, M_index,
e, t])`` where ``M_index`` is the method's position in
:data:`~rmcda.core.OBJECTIVE_METHODS`. Every cell of the sweep is therefore
independent of scheduling and of which other methods are requested.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    OBJECTIVE_METHODS,
    DecisionMatrix,
    DegenerateDataError,
    IncompatibleMethodError,
    MCDAError,
    Scheme,
    WeightMethod,
    parse_enum,
)
from .normalize import KERNELS, normalize
from .weighting import SCORE_KERNELS, compute_weights

DEFAULT_SEED = 20250101
NOISE_MODEL = "multiplicative-uniform"


def default_epsilon_grid() -> tuple[float, ...]:
    return tuple(k / 100 for k in range(1, 26))


def epsilon_grid(lo: float, hi: float, step: float) -> tuple[float, ...]:
    count = int(round((hi - lo) / step)) + 1
    if count < 1:
        raise MCDAError(f"empty epsilon grid [{lo}, {hi}] step {step}")
    return tuple(round(lo + k * step, 12) for k in range(count))


@dataclass(frozen=True)
class PerturbationConfig:
    epsilon_grid: tuple[float, ...] = field(default_factory=default_epsilon_grid)
    iterations_per_level: int = 1000
    master_seed: int = DEFAULT_SEED
    noise_model: str = NOISE_MODEL

    def __post_init__(self):
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        if not self.epsilon_grid:
            raise MCDAError("epsilon grid is empty")
        if any(not 0 < e < 1 for e in self.epsilon_grid):
            raise MCDAError("every perturbation level must lie in (0, 1)")
        if self.iterations_per_level < 1:
            raise MCDAError("iterations_per_level must be >= 1")
        if self.master_seed < 0:
            raise MCDAError("master_seed must be non-negative")
        if self.noise_model != NOISE_MODEL:
            raise MCDAError(f"unsupported noise model {self.noise_model!r}")


def _noise(seed, epsilon: float, shape) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-epsilon, epsilon, size=shape)


def perturb(matrix: DecisionMatrix, epsilon: float, seed) -> DecisionMatrix:
    """Multiply every entry by ``1 + u`` with ``u ~ Uniform(-epsilon, epsilon)``.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; the sweep
    passes ``(master_seed, method_index, level_index, iteration)``.
    """
    if not 0 <= epsilon < 1:
        raise MCDAError(f"epsilon must lie in [0, 1), got {epsilon}")
    u = _noise(seed, epsilon, matrix.values.shape)
    return matrix.with_values(matrix.values * (1.0 + u))


@dataclass(frozen=True)
class StabilityRecord:
    method: WeightMethod
    epsilon: float
    score: float
    mean_relative_change: float
    lower: float
    upper: float


@dataclass(frozen=True)
class MethodSummary:
    mean: float
    median: float
    std: float
    variance: float
    min: float
    max: float

    @classmethod
    def of(cls, scores: Sequence[float]) -> "MethodSummary":
        s = np.asarray(scores, dtype=float)
        ddof = 1 if s.size > 1 else 0
        return cls(
            mean=float(s.mean()), median=float(np.median(s)),
            std=float(s.std(ddof=ddof)), variance=float(s.var(ddof=ddof)),
            min=float(s.min()), max=float(s.max()),
        )


@dataclass(frozen=True)
class StabilityReport:
    records: tuple[StabilityRecord, ...]
    scheme: Scheme
    config: PerturbationConfig
    baseline: dict[WeightMethod, np.ndarray] = field(default_factory=dict)

    @property
    def methods(self) -> tuple[WeightMethod, ...]:
        seen: dict[WeightMethod, None] = {}
        for r in self.records:
            seen.setdefault(r.method)
        return tuple(seen)

    def records_for(self, method: WeightMethod) -> list[StabilityRecord]:
        return [r for r in self.records if r.method is method]

    def summary(self) -> dict[WeightMethod, MethodSummary]:
        return {
            m: MethodSummary.of([r.score for r in self.records_for(m)]) for m in self.methods
        }


def as_methods(methods: Iterable[WeightMethod | str]) -> list[WeightMethod]:
    out = []
    for m in methods:
        m = m if isinstance(m, WeightMethod) else parse_enum(WeightMethod, m)
        if m not in OBJECTIVE_METHODS:
            raise MCDAError(f"{m.value} is not an objective weighting method")
        if m not in out:
            out.append(m)
    # canonical order keeps reports independent of how methods were listed
    return sorted(out, key=OBJECTIVE_METHODS.index)


def check_compatible(methods: Iterable[WeightMethod], scheme: Scheme) -> None:
    if scheme is Scheme.MINMAX and WeightMethod.MEREC in methods:
        raise IncompatibleMethodError(
            "MEREC is incompatible with min-max normalization: min-max maps every "
            "column extreme to exactly 0 and MEREC takes logarithms of normalized values"
        )
    if not scheme.folds_sense:
        raise IncompatibleMethodError(
            f"stability analysis needs a sense-folding scheme, got {scheme.value}"
        )


def _sweep_cell(x, benefit, kernel, scorer, w0, seeds, epsilon):
    noise = np.stack([_noise(s, epsilon, x.shape) for s in seeds])
    with np.errstate(all="ignore"):
        scores = scorer(kernel(x * (1.0 + noise), benefit))
        w = scores / scores.sum(axis=-1, keepdims=True)
    if not np.all(np.isfinite(w)):
        raise DegenerateDataError(f"weights became undefined under perturbation epsilon={epsilon}")
    return np.mean(np.abs(w - w0) / w0, axis=-1)


def stability_sweep(
    matrix: DecisionMatrix,
    methods: Iterable[WeightMethod | str] = OBJECTIVE_METHODS,
    scheme: Scheme | str = Scheme.VECTOR,
    cfg: PerturbationConfig | None = None,
    workers: int = 1,
) -> StabilityReport:
    """Score how much each method's weights move when the raw data is perturbed.

    For each level ``epsilon`` the raw matrix is perturbed, renormalized with
    ``scheme`` and reweighted; the per-iteration disturbance is the mean over
    criteria of ``|w' - w| / w``. The record's score is ``1 / (1 + mu)`` with
    ``mu`` the mean disturbance over iterations, and its bounds are the 2.5 and
    97.5 percentiles of the per-iteration scores.
    """
    cfg = cfg or PerturbationConfig()
    scheme = Scheme(scheme)
    methods = as_methods(methods)
    if not methods:
        raise MCDAError("no weighting methods requested")
    check_compatible(methods, scheme)
    matrix.require_valid()

    N0 = normalize(matrix, scheme)
    baseline = {m: compute_weights(N0, m).weights for m in methods}
    for m, w0 in baseline.items():
        for j in np.nonzero(w0 <= 0)[0]:
            raise DegenerateDataError(
                f"{m.value} gives zero baseline weight to {matrix.criteria[j].id}; "
                "relative weight change is undefined"
            )

    x = np.array(matrix.values)
    benefit = matrix.benefit_mask
    kernel = KERNELS[scheme]
    cells = list(itertools.product(methods, enumerate(cfg.epsilon_grid)))

    def run(cell):
        m, (e_idx, eps) = cell
        m_idx = OBJECTIVE_METHODS.index(m)
        seeds = [(cfg.master_seed, m_idx, e_idx, t) for t in range(cfg.iterations_per_level)]
        return _sweep_cell(x, benefit, kernel, SCORE_KERNELS[m], baseline[m], seeds, eps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            changes = list(pool.map(run, cells))
    else:
        changes = [run(c) for c in cells]

    records = []
    for (m, (_, eps)), mu_iter in zip(cells, changes):
        mu = float(np.mean(mu_iter))
        per_iter = 1.0 / (1.0 + mu_iter)
        lo, hi = np.percentile(per_iter, [2.5, 97.5])
        records.append(StabilityRecord(m, eps, 1.0 / (1.0 + mu), mu, float(lo), float(hi)))
    for arr in baseline.values():
        arr.flags.writeable = False
    return StabilityReport(tuple(records), scheme, cfg, baseline)


# -- clustering -------------------------------------------------------------

@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class ClusterResult:
    methods: tuple[WeightMethod, ...]
    features: np.ndarray  # (mean stability, stability variance) per method
    standardized: np.ndarray
    merges: tuple[Merge, ...]  # scipy-style ids: leaves 0..n-1, merge t -> n+t
    k: int
    labels: tuple[int, ...]
    silhouettes: np.ndarray
    silhouette_avg: float
    silhouette_by_k: dict[int, float] = field(default_factory=dict)

    def clusters(self) -> list[list[WeightMethod]]:
        groups: dict[int, list[WeightMethod]] = {}
        for m, lab in zip(self.methods, self.labels):
            groups.setdefault(lab, []).append(m)
        return [groups[k] for k in sorted(groups)]


def standardize(features: np.ndarray) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    sd = f.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    return np.where(sd > 0, (f - f.mean(axis=0)) / safe, 0.0)


def ward_linkage(points: np.ndarray) -> list[Merge]:
    """Agglomerative Ward clustering on Euclidean distance.

    Heights follow the Lance-Williams recurrence, so two singletons merge at
    their Euclidean distance.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    active = {i: 1 for i in range(n)}
    dist = {}
    for a, b in itertools.combinations(range(n), 2):
        dist[(a, b)] = float(np.linalg.norm(pts[a] - pts[b]))

    def d(a, b):
        return dist[(a, b) if a < b else (b, a)]

    merges = []
    for step in range(n - 1):
        a, b = min(
            itertools.combinations(sorted(active), 2), key=lambda p: (d(*p), p)
        )
        h = d(a, b)
        new = n + step
        na, nb = active.pop(a), active.pop(b)
        for c, nc in active.items():
            total = na + nb + nc
            sq = ((na + nc) * d(a, c) ** 2 + (nb + nc) * d(b, c) ** 2 - nc * h ** 2) / total
            dist[(c, new)] = float(np.sqrt(max(sq, 0.0)))
        active[new] = na + nb
        merges.append(Merge(a, b, h, na + nb))
    return merges


def cut_tree(merges: Sequence[Merge], n: int, k: int) -> tuple[int, ...]:
    """Flat labels after applying the first ``n - k`` merges.

    Labels are numbered by the first leaf of each cluster.
    """
    if not 1 <= k <= n:
        raise MCDAError(f"k must lie in [1, {n}], got {k}")
    members = {i: [i] for i in range(n)}
    for t, mg in enumerate(merges[: n - k]):
        members[n + t] = members.pop(mg.left) + members.pop(mg.right)
    groups = sorted(members.values(), key=min)
    labels = [0] * n
    for lab, group in enumerate(groups):
        for leaf in group:
            labels[leaf] = lab
    return tuple(labels)


def silhouette_samples(points: np.ndarray, labels: Sequence[int]) -> np.ndarray:
    """Per-point silhouette; singletons (and the one-cluster case) score 0."""
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    dmat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    out = np.zeros(len(pts))
    uniq = np.unique(labels)
    if len(uniq) < 2:
        return out
    for i in range(len(pts)):
        own = labels == labels[i]
        if own.sum() < 2:
            continue
        a = dmat[i, own].sum() / (own.sum() - 1)
        b = min(dmat[i, labels == other].mean() for other in uniq if other != labels[i])
        out[i] = 0.0 if max(a, b) == 0 else (b - a) / max(a, b)
    return out


def cluster_methods(report: StabilityReport, k: int | None = None) -> ClusterResult:
    """Ward-cluster the methods on standardized (mean, variance) of their scores.

    ``k=None`` picks whichever of 2 or 3 clusters has the larger average
    silhouette (smaller k on ties).
    """
    methods = report.methods
    n = len(methods)
    if n < 2:
        raise MCDAError("clustering needs at least 2 methods")
    summary = report.summary()
    features = np.array([[summary[m].mean, summary[m].variance] for m in methods])
    z = standardize(features)
    merges = ward_linkage(z)

    by_k = {}
    for cand in (2, 3):
        if cand < n:
            by_k[cand] = float(silhouette_samples(z, cut_tree(merges, n, cand)).mean())
    if k is None:
        k = max(by_k, key=lambda c: (by_k[c], -c)) if by_k else 2
    if not 1 <= k <= n:
        raise MCDAError(f"k must lie in [1, {n}], got {k}")
    labels = cut_tree(merges, n, k)
    sil = silhouette_samples(z, labels)
    features.flags.writeable = False
    z.flags.writeable = False
    sil.flags.writeable = False
    return ClusterResult(
        methods, features, z, tuple(merges), k, labels, sil, float(sil.mean()), by_k
    )


def select_stable_methods(result: ClusterResult, report: StabilityReport) -> list[WeightMethod]:
    """Members of the cluster with the highest average mean stability, best first."""
    summary = report.summary()
    best = max(
        result.clusters(), key=lambda group: np.mean([summary[m].mean for m in group])
    )
    return sorted(best, key=lambda m: (-summary[m].mean, OBJECTIVE_METHODS.index(m)))
