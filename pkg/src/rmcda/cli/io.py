"""Readers and writers for every on-disk artifact.

Decision-matrix CSV layout (one self-describing file)::

    criterion,C1,C2,...
    sense,cost,benefit,...
    category,environment,performance,...
    unit,DALY,kg,...
    name,Human Health,Mass,...        (optional)
    S0,1.33,30.23,...
    ...

Normalized matrices use the same layout preceded by a ``scheme,<name>`` row.
Machine files write floats with 17 significant digits so they re-read
bit-exactly.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..aggregation import CategoricalSummary
from ..core import (
    Category,
    Criterion,
    CriterionDomain,
    DecisionMatrix,
    MCDAError,
    NormalizedMatrix,
    RankResult,
    Scheme,
    Sense,
    ValidationError,
    WeightDiagnostics,
    WeightMethod,
    WeightVector,
    max_min_ratio,
    parse_enum,
    validate,
)
from ..robustness import (
    ClusterResult,
    PerturbationConfig,
    StabilityRecord,
    StabilityReport,
)


class ParseError(MCDAError):
    def __init__(self, path, line: int, column: int | None, message: str):
        self.path, self.line, self.column = str(path), line, column
        where = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{path}: {where}: {message}")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path, rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _read_rows(path) -> list[list[str]]:
    path = Path(path)
    if not path.exists():
        raise MCDAError(f"missing file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh)]


def _number(path, line: int, col: int, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(path, line, col, f"non-numeric cell {text!r}") from None
    return value


# -- decision matrices ------------------------------------------------------

_HEADER_KEYS = ("criterion", "sense", "category", "unit")


def _parse_header(path, rows: list[list[str]], start: int):
    """Parse the criterion/sense/category/unit(/name) block beginning at ``start``."""
    if len(rows) < start + 4:
        raise ParseError(path, len(rows) + 1, None, "malformed header: file ends inside the header")
    for offset, key in enumerate(_HEADER_KEYS):
        row = rows[start + offset]
        if not row or row[0].strip().lower() != key:
            raise ParseError(
                path, start + offset + 1, 1,
                f"malformed header: expected row key {key!r}, got {row[0] if row else ''!r}",
            )
    ids_row = rows[start]
    n = len(ids_row) - 1
    if n < 1:
        raise ParseError(path, start + 1, None, "malformed header: no criterion ids")
    for offset in range(1, 4):
        if len(rows[start + offset]) != n + 1:
            raise ParseError(
                path, start + offset + 1, None,
                f"malformed header: expected {n} cells after the row key, "
                f"got {len(rows[start + offset]) - 1}",
            )
    body = start + 4
    names = None
    if len(rows) > body and rows[body] and rows[body][0].strip().lower() == "name":
        if len(rows[body]) != n + 1:
            raise ParseError(path, body + 1, None, f"malformed header: expected {n} names")
        names = [c.strip() for c in rows[body][1:]]
        body += 1

    criteria = []
    seen = {}
    for j in range(n):
        col = j + 2
        cid = ids_row[j + 1].strip()
        if not cid:
            raise ParseError(path, start + 1, col, "empty criterion id")
        if cid in seen:
            raise ParseError(path, start + 1, col, f"duplicate criterion id {cid!r} (first in column {seen[cid]})")
        seen[cid] = col
        sense_tok = rows[start + 1][j + 1].strip()
        cat_tok = rows[start + 2][j + 1].strip()
        try:
            sense = Sense(sense_tok.lower())
        except ValueError:
            raise ParseError(
                path, start + 2, col, f"unknown sense token {sense_tok!r} (expected benefit or cost)"
            ) from None
        try:
            category = Category(cat_tok.lower())
        except ValueError:
            raise ParseError(
                path, start + 3, col,
                f"unknown category token {cat_tok!r} (expected environment, cost or performance)",
            ) from None
        unit = rows[start + 3][j + 1].strip()
        criteria.append(Criterion(cid, names[j] if names else cid, sense, category, unit))
    return criteria, body


def _parse_body(path, rows, body: int, n: int):
    labels, values = [], []
    seen = {}
    for i in range(body, len(rows)):
        row = rows[i]
        line = i + 1
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != n + 1:
            raise ParseError(path, line, None, f"expected a label and {n} values, got {len(row)} cells")
        label = row[0].strip()
        if not label:
            raise ParseError(path, line, 1, "empty alternative label")
        if label in seen:
            raise ParseError(path, line, 1, f"duplicate alternative {label!r} (first on line {seen[label]})")
        seen[label] = line
        labels.append(label)
        values.append([_number(path, line, j + 2, row[j + 1].strip()) for j in range(n)])
    return labels, np.array(values, dtype=float).reshape(len(labels), n)


def _header_rows(criteria: Sequence[Criterion]):
    yield ["criterion", *[c.id for c in criteria]]
    yield ["sense", *[c.sense.value for c in criteria]]
    yield ["category", *[c.category.value for c in criteria]]
    yield ["unit", *[c.unit for c in criteria]]
    yield ["name", *[c.name for c in criteria]]


def load_matrix(path) -> DecisionMatrix:
    """Parse a decision-matrix CSV and apply full validation."""
    rows = _read_rows(path)
    criteria, body = _parse_header(path, rows, 0)
    labels, values = _parse_body(path, rows, body, len(criteria))
    matrix = DecisionMatrix(tuple(labels), tuple(criteria), values)
    problems = validate(matrix)
    if problems:
        raise ValidationError([f"{path}: {p}" for p in problems])
    return matrix


def write_matrix(path, matrix: DecisionMatrix) -> Path:
    rows = list(_header_rows(matrix.criteria))
    rows += [[a, *map(fmt, row)] for a, row in zip(matrix.alternatives, matrix.values)]
    return _write_rows(path, rows)


def write_normalized(path, N: NormalizedMatrix) -> Path:
    rows = [["scheme", N.scheme.value], *_header_rows(N.criteria)]
    rows += [[a, *map(fmt, row)] for a, row in zip(N.alternatives, N.values)]
    return _write_rows(path, rows)


def load_normalized(path) -> NormalizedMatrix:
    rows = _read_rows(path)
    if not rows or len(rows[0]) != 2 or rows[0][0].strip().lower() != "scheme":
        raise ParseError(path, 1, 1, "malformed header: expected 'scheme,<name>' row")
    try:
        scheme = Scheme(rows[0][1].strip().lower())
    except ValueError:
        raise ParseError(path, 1, 2, f"unknown scheme {rows[0][1]!r}") from None
    criteria, body = _parse_header(path, rows, 1)
    labels, values = _parse_body(path, rows, body, len(criteria))
    try:
        return NormalizedMatrix(tuple(labels), tuple(criteria), values, scheme)
    except MCDAError as exc:
        raise MCDAError(f"{path}: {exc}") from None


# -- weights ----------------------------------------------------------------

def write_weights(path, vectors: Sequence[WeightVector], criterion_ids: Sequence[str]) -> Path:
    rows = [["criterion", *[v.method.value for v in vectors]]]
    for j, cid in enumerate(criterion_ids):
        rows.append([cid, *[fmt(v.weights[j]) for v in vectors]])
    return _write_rows(path, rows)


def load_weights(path) -> dict[WeightMethod, WeightVector]:
    rows = [r for r in _read_rows(path) if any(c.strip() for c in r)]
    if not rows or rows[0][0].strip().lower() != "criterion" or len(rows[0]) < 2:
        raise ParseError(path, 1, 1, "malformed header: expected 'criterion,<method>,...'")
    methods = []
    for col, tok in enumerate(rows[0][1:], start=2):
        try:
            methods.append(parse_enum(WeightMethod, tok))
        except MCDAError:
            raise ParseError(path, 1, col, f"unknown weighting method {tok!r}") from None
    ids = [r[0].strip() for r in rows[1:]]
    grid = np.array(
        [[_number(path, i + 2, j + 2, c) for j, c in enumerate(r[1:])] for i, r in enumerate(rows[1:])]
    ).reshape(len(ids), len(methods))
    out = {}
    for k, method in enumerate(methods):
        w = grid[:, k]
        try:
            out[method] = WeightVector(w, method, WeightDiagnostics(max_min_ratio(w)), ids)
        except MCDAError as exc:
            raise MCDAError(f"{path}: column {method.value}: {exc}") from None
    return out


# -- criterion domains ------------------------------------------------------

def load_domains(path, criteria: Sequence[Criterion]) -> dict[str, CriterionDomain]:
    rows = [r for r in _read_rows(path) if any(c.strip() for c in r)]
    if not rows or [c.strip().lower() for c in rows[0]] != ["criterion", "lower", "upper"]:
        raise ParseError(path, 1, 1, "malformed header: expected 'criterion,lower,upper'")
    known = {c.id for c in criteria}
    out = {}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError(path, i, None, "expected criterion,lower,upper")
        cid = row[0].strip()
        if cid not in known:
            raise ParseError(path, i, 1, f"unknown criterion id {cid!r}")
        out[cid] = CriterionDomain(_number(path, i, 2, row[1]), _number(path, i, 3, row[2]))
    return out


def write_domains(path, criteria: Sequence[Criterion], domains: Sequence[CriterionDomain]) -> Path:
    rows = [["criterion", "lower", "upper"]]
    rows += [[c.id, fmt(d.lower), fmt(d.upper)] for c, d in zip(criteria, domains)]
    return _write_rows(path, rows)


# -- stability --------------------------------------------------------------

STABILITY_COLUMNS = [
    "method", "epsilon", "S", "lo", "hi", "mean_relative_change", "scheme", "iterations", "seed",
]


def write_stability(path, report: StabilityReport) -> Path:
    cfg = report.config
    rows = [STABILITY_COLUMNS]
    for r in report.records:
        rows.append([
            r.method.value, fmt(r.epsilon), fmt(r.score), fmt(r.lower), fmt(r.upper),
            fmt(r.mean_relative_change), report.scheme.value, cfg.iterations_per_level,
            cfg.master_seed,
        ])
    return _write_rows(path, rows)


def load_stability(path) -> StabilityReport:
    rows = [r for r in _read_rows(path) if any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != STABILITY_COLUMNS:
        raise ParseError(path, 1, 1, "malformed header: expected " + ",".join(STABILITY_COLUMNS))
    records = []
    schemes, iterations, seeds, grid = set(), set(), set(), []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(STABILITY_COLUMNS):
            raise ParseError(path, i, None, f"expected {len(STABILITY_COLUMNS)} cells")
        try:
            method = parse_enum(WeightMethod, row[0])
        except MCDAError:
            raise ParseError(path, i, 1, f"unknown weighting method {row[0]!r}") from None
        eps, s, lo, hi, mu = (_number(path, i, c + 2, row[c + 1]) for c in range(5))
        records.append(StabilityRecord(method, eps, s, mu, lo, hi))
        schemes.add(row[6].strip())
        iterations.add(int(_number(path, i, 8, row[7])))
        seeds.add(int(_number(path, i, 9, row[8])))
        if eps not in grid:
            grid.append(eps)
    if len(schemes) != 1 or len(iterations) != 1 or len(seeds) != 1:
        raise MCDAError(f"{path}: mixed scheme/iterations/seed values across rows")
    cfg = PerturbationConfig(tuple(grid), iterations.pop(), seeds.pop())
    return StabilityReport(tuple(records), Scheme(schemes.pop()), cfg)


def write_stability_summary(path, report: StabilityReport) -> Path:
    rows = [["method", "mean", "median", "std", "variance", "min", "max"]]
    for m, s in report.summary().items():
        rows.append([m.value, *map(fmt, (s.mean, s.median, s.std, s.variance, s.min, s.max))])
    return _write_rows(path, rows)


# -- clustering -------------------------------------------------------------

def cluster_to_dict(result: ClusterResult, selected: Sequence[WeightMethod] = ()) -> dict:
    n = len(result.methods)
    members = {i: [result.methods[i].value] for i in range(n)}
    merges = []
    for t, mg in enumerate(result.merges):
        members[n + t] = members[mg.left] + members[mg.right]
        merges.append({
            "id": n + t, "left": mg.left, "right": mg.right, "height": mg.height,
            "size": mg.size, "members": members[n + t],
        })
    return {
        "methods": [m.value for m in result.methods],
        "features": {
            "columns": ["mean_stability", "stability_variance"],
            "raw": result.features.tolist(),
            "standardized": result.standardized.tolist(),
        },
        "merges": merges,
        "k": result.k,
        "labels": list(result.labels),
        "clusters": [[m.value for m in g] for g in result.clusters()],
        "silhouettes": dict(zip((m.value for m in result.methods), result.silhouettes.tolist())),
        "silhouette_avg": result.silhouette_avg,
        "silhouette_by_k": {str(k): v for k, v in result.silhouette_by_k.items()},
        "selected": [m.value for m in selected],
    }


def dump_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(payload), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def jsonable(obj):
    """Convert numpy containers and enums to plain JSON; non-finite floats become null."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k.value if isinstance(k, enum.Enum) else k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MCDAError(f"missing file: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


# -- categorical shares and ranks ------------------------------------------

def write_categorical(path, summaries: dict[WeightMethod, CategoricalSummary]) -> Path:
    methods = list(summaries)
    cats = [c for c in Category if any(c in s.shares for s in summaries.values())]
    rows = [["category", *[m.value for m in methods]]]
    for c in cats:
        rows.append([c.value, *[fmt(summaries[m].shares.get(c, 0.0)) for m in methods]])
    rows.append(["max/min", *[fmt(summaries[m].max_min_ratio) for m in methods]])
    return _write_rows(path, rows)


def write_scores(path, results: Sequence[RankResult]) -> Path:
    alts = results[0].alternatives
    rows = [["alternative", *[r.method.value for r in results]]]
    for i, a in enumerate(alts):
        rows.append([a, *[fmt(r.scores[i]) for r in results]])
    return _write_rows(path, rows)


def write_rank_table(path, results: Sequence[RankResult], mean: np.ndarray, final: np.ndarray) -> Path:
    alts = results[0].alternatives
    rows = [["alternative", *[r.method.value for r in results], "mean", "rank"]]
    for i, a in enumerate(alts):
        rows.append([a, *[int(r.ranks[i]) for r in results], fmt(mean[i]), int(final[i])])
    return _write_rows(path, rows)


def load_rank_table(path) -> dict[str, dict[str, float]]:
    rows = [r for r in _read_rows(path) if any(c.strip() for c in r)]
    if not rows or rows[0][0] != "alternative" or rows[0][-2:] != ["mean", "rank"]:
        raise ParseError(path, 1, 1, "malformed header: expected 'alternative,...,mean,rank'")
    header = rows[0]
    return {
        r[0]: {h: _number(path, i, j + 2, c) for j, (h, c) in enumerate(zip(header[1:], r[1:]))}
        for i, r in enumerate(rows[1:], start=2)
    }
