"""End-to-end orchestration: normalize, weigh, sweep, cluster, aggregate, rank."""

from __future__ import annotations

import datetime as _dt
import json
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import __version__
from ..aggregation import aggregate_gm, categorize
from ..core import (
    OBJECTIVE_METHODS,
    CriterionDomain,
    DecisionMatrix,
    IncompatibleMethodError,
    MCDAError,
    RankMethod,
    Scheme,
    WeightMethod,
    parse_enum,
)
from ..normalize import default_domains, normalize, rtopsis_variant
from ..ranking import mean_ranks, rank_rtopsis, rank_saw, rank_topsis, rank_wp
from ..robustness import (
    PerturbationConfig,
    as_methods,
    check_compatible,
    cluster_methods,
    epsilon_grid,
    select_stable_methods,
    stability_sweep,
)
from ..weighting import compute_weights
from . import io as rio

SCHEMA_VERSION = "1.0"
OUT_ENV = "RMCDA_OUT"
DEFAULT_OUT = "rmcda-out"

ARTIFACTS = {
    "normalized": "normalized.csv",
    "weights": "weights.csv",
    "stability": "stability.csv",
    "stability_summary": "stability_summary.csv",
    "linkage": "linkage.json",
    "categorical": "categorical.csv",
    "domains": "domains.csv",
    "scores": "scores.csv",
    "ranks": "ranks.csv",
    "report": "report.json",
}


def bundled_fixture() -> Path:
    return Path(str(resources.files("rmcda") / "data" / "fuselage.csv"))


def report_schema() -> dict:
    return json.loads((resources.files("rmcda") / "data" / "report.schema.json").read_text())


class PipelineError(MCDAError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


def parse_rank_methods(tokens: Sequence[str]) -> list[RankMethod]:
    return [t if isinstance(t, RankMethod) else parse_enum(RankMethod, t) for t in tokens]


@dataclass
class PipelineConfig:
    input: Path = field(default_factory=bundled_fixture)
    scheme: Scheme = Scheme.VECTOR
    methods: list[WeightMethod] = field(default_factory=lambda: list(OBJECTIVE_METHODS))
    rank_methods: list[RankMethod] = field(default_factory=lambda: list(RankMethod))
    domains: dict[str, tuple[float, float]] | None = None
    rtopsis_variant: Scheme = Scheme.RTOPSIS_MAX
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    aggregation: str | list[WeightMethod] = "auto"
    k: int | None = None
    out: Path = Path(DEFAULT_OUT)
    svg: bool = False
    workers: int = 1

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        raw = rio.load_json(path)
        base = Path(path).parent
        return cls().updated(raw, base)

    def updated(self, raw: dict, base: Path | None = None) -> "PipelineConfig":
        """Return a copy with the keys of ``raw`` (config-file vocabulary) applied."""
        known = {
            "input", "scheme", "methods", "rank_methods", "domains", "rtopsis_variant",
            "epsilon_grid", "epsilon_min", "epsilon_max", "epsilon_step", "iterations",
            "seed", "aggregation", "k", "out", "svg", "workers",
        }
        unknown = set(raw) - known
        if unknown:
            raise MCDAError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = replace(self)
        if raw.get("input") is not None:
            p = Path(raw["input"])
            cfg.input = p if p.is_absolute() or base is None else base / p
        if raw.get("scheme") is not None:
            cfg.scheme = parse_enum(Scheme, raw["scheme"])
        if raw.get("methods") is not None:
            cfg.methods = as_methods(_tokens(raw["methods"]))
        if raw.get("rank_methods") is not None:
            cfg.rank_methods = parse_rank_methods(_tokens(raw["rank_methods"]))
        if "domains" in raw:
            d = raw["domains"]
            cfg.domains = None if d is None else {str(k): (float(v[0]), float(v[1])) for k, v in d.items()}
        if raw.get("rtopsis_variant") is not None:
            cfg.rtopsis_variant = rtopsis_variant(raw["rtopsis_variant"])
        pc = cfg.perturbation
        grid = pc.epsilon_grid
        if raw.get("epsilon_grid") is not None:
            grid = tuple(raw["epsilon_grid"])
        if any(raw.get(k) is not None for k in ("epsilon_min", "epsilon_max", "epsilon_step")):
            grid = epsilon_grid(
                raw.get("epsilon_min") if raw.get("epsilon_min") is not None else grid[0],
                raw.get("epsilon_max") if raw.get("epsilon_max") is not None else grid[-1],
                raw.get("epsilon_step") if raw.get("epsilon_step") is not None else 0.01,
            )
        cfg.perturbation = PerturbationConfig(
            grid,
            int(raw["iterations"]) if raw.get("iterations") is not None else pc.iterations_per_level,
            int(raw["seed"]) if raw.get("seed") is not None else pc.master_seed,
        )
        if raw.get("aggregation") is not None:
            agg = raw["aggregation"]
            cfg.aggregation = "auto" if agg == "auto" else as_methods(_tokens(agg))
        if "k" in raw:
            cfg.k = None if raw["k"] in (None, "auto") else int(raw["k"])
        if raw.get("out") is not None:
            cfg.out = Path(raw["out"])
        if raw.get("svg") is not None:
            cfg.svg = bool(raw["svg"])
        if raw.get("workers") is not None:
            cfg.workers = int(raw["workers"])
        return cfg

    def check(self, matrix: DecisionMatrix | None = None) -> None:
        if not self.methods:
            raise MCDAError("no weighting methods requested")
        check_compatible(self.methods, self.scheme)
        if self.scheme is Scheme.MINMAX and RankMethod.WP in self.rank_methods:
            raise IncompatibleMethodError(
                "WP is incompatible with min-max normalization (every column has an exact zero)"
            )
        if self.aggregation != "auto":
            missing = [m.value for m in self.aggregation if m not in self.methods]
            if missing:
                raise MCDAError(f"aggregation uses methods that are not run: {', '.join(missing)}")
        if matrix is not None and self.domains:
            ids = set(matrix.criterion_ids)
            unknown = [c for c in self.domains if c not in ids]
            if unknown:
                raise MCDAError(f"domains reference unknown criteria: {', '.join(unknown)}")

    def to_dict(self) -> dict:
        pc = self.perturbation
        return {
            "input": str(self.input),
            "scheme": self.scheme.value,
            "methods": [m.value for m in self.methods],
            "rank_methods": [m.value for m in self.rank_methods],
            "domains": self.domains,
            "rtopsis_variant": self.rtopsis_variant.value,
            "epsilon_grid": list(pc.epsilon_grid),
            "iterations": pc.iterations_per_level,
            "seed": pc.master_seed,
            "noise_model": pc.noise_model,
            "aggregation": self.aggregation if self.aggregation == "auto"
            else [m.value for m in self.aggregation],
            "k": self.k,
            "svg": self.svg,
        }


def _tokens(value) -> list[str]:
    if isinstance(value, str):
        return [t for t in (s.strip() for s in value.split(",")) if t]
    return list(value)


def resolve_out(flag: str | None, cfg_out: Path | None = None) -> Path:
    """``--out`` beats the environment variable, which beats the config file."""
    if flag:
        return Path(flag)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg_out or DEFAULT_OUT)


def resolve_domains(matrix: DecisionMatrix, given: dict | None) -> list[CriterionDomain]:
    """Per-criterion domains; criteria absent from ``given`` get the default domain."""
    defaults = default_domains(matrix)
    given = given or {}
    return [
        CriterionDomain(*given[c.id]) if c.id in given else d
        for c, d in zip(matrix.criteria, defaults)
    ]


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and issubclass(exc_type, (MCDAError, OSError)) \
                and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, str(exc)) from exc
        return False


def run_pipeline(cfg: PipelineConfig, timestamp: str | None = None) -> dict:
    """Run every stage, write all artifacts under ``cfg.out`` and return the report.

    Raises :class:`PipelineError` tagged with the failing stage.
    """
    out = Path(cfg.out)
    with _Stage("config"):
        cfg.check()
    with _Stage("load"):
        matrix = rio.load_matrix(cfg.input)
        cfg.check(matrix)
    with _Stage("normalize"):
        N = normalize(matrix, cfg.scheme)
    with _Stage("weighting"):
        vectors = {m: compute_weights(N, m) for m in cfg.methods}

    report_stab = cluster = None
    selected: list[WeightMethod] = []
    with _Stage("stability"):
        report_stab = stability_sweep(matrix, cfg.methods, cfg.scheme, cfg.perturbation, cfg.workers)
    if len(cfg.methods) >= 2:
        with _Stage("cluster"):
            cluster = cluster_methods(report_stab, cfg.k)
            selected = select_stable_methods(cluster, report_stab)
    else:
        selected = list(cfg.methods)

    with _Stage("aggregate"):
        sources = selected if cfg.aggregation == "auto" else list(cfg.aggregation)
        if len(sources) >= 2:
            gm = aggregate_gm([vectors[m] for m in sources])
        else:
            # a single source is its own geometric mean
            only = vectors[sources[0]]
            gm = replace(only, method=WeightMethod.AGGREGATED)
        all_vectors = [*vectors.values(), gm]
        categorical = {v.method: categorize(v, matrix.criteria) for v in all_vectors}

    results = []
    domains = None
    with _Stage("rank"):
        for method in cfg.rank_methods:
            if method is RankMethod.SAW:
                results.append(rank_saw(N, gm))
            elif method is RankMethod.WP:
                results.append(rank_wp(N, gm))
            elif method is RankMethod.TOPSIS:
                results.append(rank_topsis(N, gm))
            else:
                domains = resolve_domains(matrix, cfg.domains)
                results.append(rank_rtopsis(matrix, gm, domains, cfg.rtopsis_variant))
        mean = final = None
        if results:
            mean, final = mean_ranks(results)

    with _Stage("write"):
        files = {}
        files["normalized"] = rio.write_normalized(out / ARTIFACTS["normalized"], N)
        files["weights"] = rio.write_weights(out / ARTIFACTS["weights"], all_vectors, matrix.criterion_ids)
        files["stability"] = rio.write_stability(out / ARTIFACTS["stability"], report_stab)
        files["stability_summary"] = rio.write_stability_summary(
            out / ARTIFACTS["stability_summary"], report_stab
        )
        if cluster is not None:
            files["linkage"] = rio.dump_json(
                out / ARTIFACTS["linkage"], rio.cluster_to_dict(cluster, selected)
            )
        files["categorical"] = rio.write_categorical(out / ARTIFACTS["categorical"], categorical)
        if results:
            if domains is not None:
                files["domains"] = rio.write_domains(out / ARTIFACTS["domains"], matrix.criteria, domains)
            files["scores"] = rio.write_scores(out / ARTIFACTS["scores"], results)
            files["ranks"] = rio.write_rank_table(out / ARTIFACTS["ranks"], results, mean, final)
        if cfg.svg:
            from . import svg

            files["stability_svg"] = svg.write_stability_svg(out / "stability.svg", report_stab)
            if cluster is not None:
                files["dendrogram_svg"] = svg.write_dendrogram_svg(out / "dendrogram.svg", cluster)

        report = build_report(
            cfg, matrix, N, vectors, gm, sources, report_stab, cluster, selected,
            categorical, results, mean, final, domains,
            sorted([*(p.name for p in files.values()), ARTIFACTS["report"]]),
            timestamp,
        )
        rio.dump_json(out / ARTIFACTS["report"], report)
    return report


def _weights_entry(v) -> dict:
    return {
        "weights": v.weights,
        "max_min_ratio": v.diagnostics.max_min_ratio,
        "diagnostics": v.diagnostics.populated(),
    }


def build_report(
    cfg, matrix, N, vectors, gm, sources, stab, cluster, selected,
    categorical, results, mean, final, domains, artifacts, timestamp=None,
) -> dict:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    summary = stab.summary()
    ranking = None
    if results:
        ranking = {
            "alternatives": list(results[0].alternatives),
            "methods": {
                r.method.value: {
                    "scores": r.scores,
                    "ranks": r.ranks,
                    "detail": {k: v for k, v in r.detail.items() if k != "weighted"},
                }
                for r in results
            },
            "mean_rank": mean,
            "final_rank": final,
        }
    return rio.jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "generated_at": timestamp,
        "seed": cfg.perturbation.master_seed,
        "config": cfg.to_dict(),
        "matrix": {
            "alternatives": list(matrix.alternatives),
            "criteria": [
                {"id": c.id, "name": c.name, "sense": c.sense, "category": c.category, "unit": c.unit}
                for c in matrix.criteria
            ],
            "values": matrix.values,
        },
        "normalized": {"scheme": N.scheme, "values": N.values},
        "weights": {m.value: _weights_entry(v) for m, v in vectors.items()},
        "stability": {
            "scheme": stab.scheme,
            "noise_model": stab.config.noise_model,
            "iterations": stab.config.iterations_per_level,
            "records": [
                {
                    "method": r.method, "epsilon": r.epsilon, "S": r.score,
                    "mean_relative_change": r.mean_relative_change, "lo": r.lower, "hi": r.upper,
                }
                for r in stab.records
            ],
            "summary": {m.value: vars(s) for m, s in summary.items()},
        },
        "clustering": None if cluster is None else rio.cluster_to_dict(cluster, selected),
        "selected_methods": [m.value for m in selected],
        "aggregated": {
            "sources": [m.value for m in sources],
            "weights": gm.weights,
            "max_min_ratio": gm.diagnostics.max_min_ratio,
        },
        "categorical": {
            m.value: {"shares": {c.value: v for c, v in s.shares.items()}, "max_min_ratio": s.max_min_ratio}
            for m, s in categorical.items()
        },
        "ranking": ranking,
        "rtopsis_domains": None if domains is None else [[d.lower, d.upper] for d in domains],
        "artifacts": artifacts,
    })


def format_table(header: Sequence[str], rows: Sequence[Sequence], digits: int = 4) -> str:
    """Plain-text table; floats rounded to ``digits`` decimals."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return f"{float(v):.{digits}f}"
        return str(v)

    grid = [list(map(str, header))] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in grid) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in grid]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
