"""Domain model shared by every stage of the analysis.

All containers are frozen dataclasses holding read-only numpy arrays, so a
matrix or weight vector can be handed to several stages (or threads) without
defensive copies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class MCDAError(ValueError):
    """Base class for every error raised by this package."""


class ValidationError(MCDAError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DegenerateDataError(MCDAError):
    """The data carries no usable information for the requested computation."""


class IncompatibleMethodError(MCDAError):
    """A method cannot be applied to data produced by a given scheme."""


class DomainError(MCDAError):
    """A value lies outside its declared criterion domain."""


class Sense(str, enum.Enum):
    BENEFIT = "benefit"
    COST = "cost"


class Category(str, enum.Enum):
    ENVIRONMENT = "environment"
    COST = "cost"
    PERFORMANCE = "performance"


class Scheme(str, enum.Enum):
    VECTOR = "vector"
    LINEAR_SCALE = "linear"
    MINMAX = "minmax"
    RTOPSIS_MAX = "rtopsis-max"
    RTOPSIS_MAXMIN = "rtopsis-maxmin"

    @property
    def folds_sense(self) -> bool:
        """True when cost columns have already been inverted (higher is better)."""
        return self in (Scheme.VECTOR, Scheme.LINEAR_SCALE, Scheme.MINMAX)


class WeightMethod(str, enum.Enum):
    SD = "SD"
    COV = "COV"
    ENTROPY = "Entropy"
    CRITIC = "CRITIC"
    MEREC = "MEREC"
    AGGREGATED = "GM"


# canonical order; the index of a method here seeds its perturbation streams
OBJECTIVE_METHODS = (
    WeightMethod.SD,
    WeightMethod.COV,
    WeightMethod.ENTROPY,
    WeightMethod.CRITIC,
    WeightMethod.MEREC,
)


class RankMethod(str, enum.Enum):
    SAW = "SAW"
    WP = "WP"
    TOPSIS = "TOPSIS"
    RTOPSIS = "R-TOPSIS"


def parse_enum(kind: type[enum.Enum], token: str):
    """Case-insensitive lookup of an enum member by value or name."""
    t = token.strip().lower()
    for member in kind:
        if t == member.value.lower() or t == member.name.lower():
            return member
    choices = ", ".join(m.value for m in kind)
    raise MCDAError(f"unknown {kind.__name__} {token!r} (expected one of: {choices})")


def _frozen(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise MCDAError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Criterion:
    id: str
    name: str
    sense: Sense
    category: Category
    unit: str = ""

    def __post_init__(self):
        if not isinstance(self.sense, Sense):
            object.__setattr__(self, "sense", parse_enum(Sense, str(self.sense)))
        if not isinstance(self.category, Category):
            object.__setattr__(self, "category", parse_enum(Category, str(self.category)))


@dataclass(frozen=True)
class DecisionMatrix:
    """Raw performance values, one row per alternative and one column per criterion.

    Construction only checks that ``values`` is two-dimensional; call
    :func:`validate` (or :meth:`require_valid`) for the full set of rules.
    """

    alternatives: tuple[str, ...]
    criteria: tuple[Criterion, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "values", _frozen(self.values, 2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def criterion_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.criteria)

    @property
    def benefit_mask(self) -> np.ndarray:
        return np.array([c.sense is Sense.BENEFIT for c in self.criteria])

    def require_valid(self) -> "DecisionMatrix":
        problems = validate(self)
        if problems:
            raise ValidationError(problems)
        return self

    def with_values(self, values) -> "DecisionMatrix":
        return DecisionMatrix(self.alternatives, self.criteria, values)

    def subset(self, rows: Sequence[int]) -> "DecisionMatrix":
        rows = list(rows)
        return DecisionMatrix(
            tuple(self.alternatives[i] for i in rows), self.criteria, self.values[rows]
        )


@dataclass(frozen=True)
class NormalizedMatrix:
    alternatives: tuple[str, ...]
    criteria: tuple[Criterion, ...]
    values: np.ndarray
    scheme: Scheme

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        object.__setattr__(self, "values", _frozen(self.values, 2))
        if self.values.shape != (len(self.alternatives), len(self.criteria)):
            raise MCDAError(
                f"normalized grid {self.values.shape} does not match "
                f"{len(self.alternatives)} alternatives x {len(self.criteria)} criteria"
            )
        if not np.all(np.isfinite(self.values)):
            raise MCDAError("normalized matrix contains non-finite values")
        tol = 1e-12
        if self.values.size and (self.values.min() < -tol or self.values.max() > 1 + tol):
            raise MCDAError("normalized values must lie within [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def criterion_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.criteria)


@dataclass(frozen=True)
class WeightDiagnostics:
    """Intermediate quantities of the weighting method that produced a vector.

    Only the fields used by that method are set; the rest stay ``None``.
    """

    max_min_ratio: float
    std: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    cv: Optional[np.ndarray] = None
    proportions: Optional[np.ndarray] = None
    entropy: Optional[np.ndarray] = None
    diversification: Optional[np.ndarray] = None
    correlation: Optional[np.ndarray] = None
    information: Optional[np.ndarray] = None
    baseline_scores: Optional[np.ndarray] = None
    removal_scores: Optional[np.ndarray] = None
    removal_effects: Optional[np.ndarray] = None

    def populated(self) -> dict[str, np.ndarray]:
        out = {}
        for name in self.__dataclass_fields__:
            if name == "max_min_ratio":
                continue
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def max_min_ratio(weights: np.ndarray) -> float:
    lo = float(np.min(weights))
    return float("inf") if lo == 0 else float(np.max(weights)) / lo


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    method: WeightMethod
    diagnostics: WeightDiagnostics
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        w = _frozen(self.weights, 1)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.labels and len(self.labels) != w.size:
            raise MCDAError("weight labels do not match weight count")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise MCDAError(f"weights must be non-negative and sum to 1 (sum={w.sum()!r})")

    def __len__(self) -> int:
        return self.weights.size


def make_weights(raw: np.ndarray, method: WeightMethod, labels=(), **diagnostics) -> WeightVector:
    """Normalize ``raw`` onto the simplex and wrap it with its diagnostics."""
    w = np.asarray(raw, dtype=float) / np.sum(raw)
    for key, value in diagnostics.items():
        if isinstance(value, np.ndarray):
            value.flags.writeable = False
    diag = WeightDiagnostics(max_min_ratio=max_min_ratio(w), **diagnostics)
    return WeightVector(w, method, diag, labels)


@dataclass(frozen=True)
class RankResult:
    method: RankMethod
    alternatives: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray
    # ideal points, separations, weighted matrix, domains (R-TOPSIS)
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "scores", _frozen(self.scores, 1))
        ranks = np.array(self.ranks, dtype=int)
        ranks.flags.writeable = False
        object.__setattr__(self, "ranks", ranks)

    def best(self) -> str:
        return self.alternatives[int(np.argmin(self.ranks))]


@dataclass(frozen=True)
class CriterionDomain:
    lower: float
    upper: float

    def __post_init__(self):
        if not (self.lower < self.upper):
            raise DomainError(f"domain lower bound {self.lower} must be below upper {self.upper}")
        if not self.upper > 0:
            raise DomainError(f"domain upper bound must be positive, got {self.upper}")


def validate(matrix: DecisionMatrix) -> list[str]:
    """Return one message per broken DecisionMatrix rule; empty means valid."""
    problems: list[str] = []
    m, n = matrix.values.shape
    if m < 2:
        problems.append(f"m >= 2 required (got {m} alternative{'s' if m != 1 else ''})")
    if n < 1:
        problems.append("n >= 1 required (no criteria)")
    if m != len(matrix.alternatives):
        problems.append(f"grid has {m} rows but {len(matrix.alternatives)} alternative labels")
    if n != len(matrix.criteria):
        problems.append(f"grid has {n} columns but {len(matrix.criteria)} criteria")

    seen: set[str] = set()
    for c in matrix.criteria:
        if c.id in seen:
            problems.append(f"duplicate criterion id {c.id!r}")
        seen.add(c.id)
    if len(set(matrix.alternatives)) != len(matrix.alternatives):
        problems.append("duplicate alternative labels")

    for i, j in zip(*np.nonzero(~np.isfinite(matrix.values))):
        problems.append(f"non-finite value at ({i},{j})")
    with np.errstate(invalid="ignore"):
        bad = np.isfinite(matrix.values) & (matrix.values <= 0)
    for i, j in zip(*np.nonzero(bad)):
        problems.append(f"non-positive value at ({i},{j})")
    return problems


def rank_from_scores(scores, higher_is_better: bool = True) -> np.ndarray:
    """Competition ("min") ranking: 1 is best and tied scores share the smaller rank."""
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise MCDAError("no scores")
    if not np.all(np.isfinite(s)):
        raise MCDAError("scores must be finite")
    key = -s if higher_is_better else s
    # rank = 1 + number of strictly better entries
    return 1 + (key[None, :] < key[:, None]).sum(axis=1)
