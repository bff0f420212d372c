"""Command-line interface: ``rmcda run`` plus one subcommand per stage."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..aggregation import aggregate_gm, categorize
from ..core import (
    OBJECTIVE_METHODS,
    MCDAError,
    RankMethod,
    Scheme,
    WeightDiagnostics,
    WeightMethod,
    WeightVector,
    parse_enum,
)
from ..normalize import normalize
from ..ranking import mean_ranks, rank_rtopsis, rank_saw, rank_topsis, rank_wp
from ..robustness import (
    PerturbationConfig,
    as_methods,
    cluster_methods,
    epsilon_grid,
    select_stable_methods,
    stability_sweep,
)
from ..weighting import compute_weights
from . import io as rio
from .pipeline import (
    ARTIFACTS,
    PipelineConfig,
    PipelineError,
    bundled_fixture,
    format_table,
    parse_rank_methods,
    resolve_domains,
    resolve_out,
    run_pipeline,
)


def _csv_list(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _prior(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MCDAError(f"missing prior-stage artifact: expected {path} (produced by `rmcda {producer}`)")
    return path


def _add_sweep_flags(p):
    p.add_argument("--epsilon-min", type=float)
    p.add_argument("--epsilon-max", type=float)
    p.add_argument("--epsilon-step", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def _sweep_config(args) -> PerturbationConfig:
    base = PerturbationConfig()
    grid = base.epsilon_grid
    if args.epsilon_min is not None or args.epsilon_max is not None or args.epsilon_step is not None:
        grid = epsilon_grid(
            args.epsilon_min if args.epsilon_min is not None else grid[0],
            args.epsilon_max if args.epsilon_max is not None else grid[-1],
            args.epsilon_step if args.epsilon_step is not None else 0.01,
        )
    return PerturbationConfig(
        grid,
        args.iterations if args.iterations is not None else base.iterations_per_level,
        args.seed if args.seed is not None else base.master_seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmcda",
        description="Robust multi-criteria decision analysis: normalization, objective "
        "weighting, stability analysis, weight aggregation and ranking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline")
    run.add_argument("--input", help="decision-matrix CSV (default: bundled fuselage case)")
    run.add_argument("--config", help="JSON config file; flags override its values")
    run.add_argument("--scheme", choices=["vector", "linear", "minmax"])
    run.add_argument("--methods", help="comma-separated weighting methods")
    run.add_argument("--rank-methods", help="comma-separated ranking methods ('' for none)")
    run.add_argument("--domains", help="CSV of criterion,lower,upper for R-TOPSIS")
    run.add_argument("--rtopsis-variant", choices=["max", "maxmin"])
    run.add_argument("--aggregate", help="'auto' or comma-separated methods to aggregate")
    run.add_argument("--k", type=int, help="cluster count (default: chosen by silhouette)")
    _add_sweep_flags(run)
    run.add_argument("--out")
    run.add_argument("--svg", action="store_true", default=None)

    p = sub.add_parser("normalize", help="normalize a decision matrix")
    p.add_argument("--input")
    p.add_argument("--scheme", default="vector", choices=["vector", "linear", "minmax"])
    p.add_argument("--out")

    p = sub.add_parser("weigh", help="objective weights from a normalized matrix")
    p.add_argument("--normalized", help=f"default: <out>/{ARTIFACTS['normalized']}")
    p.add_argument("--method", "--methods", dest="methods", default=",".join(m.value for m in OBJECTIVE_METHODS))
    p.add_argument("--out")

    p = sub.add_parser("stability", help="Monte Carlo stability sweep of weighting methods")
    p.add_argument("--input")
    p.add_argument("--scheme", default="vector", choices=["vector", "linear", "minmax"])
    p.add_argument("--method", "--methods", dest="methods", default=",".join(m.value for m in OBJECTIVE_METHODS))
    _add_sweep_flags(p)
    p.add_argument("--out")
    p.add_argument("--svg", action="store_true")

    p = sub.add_parser("cluster", help="Ward clustering of methods from a stability CSV")
    p.add_argument("--stability", help=f"default: <out>/{ARTIFACTS['stability']}")
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--svg", action="store_true")

    p = sub.add_parser("aggregate", help="geometric-mean aggregation of weight columns")
    p.add_argument("--weights", help=f"default: <out>/{ARTIFACTS['weights']}")
    p.add_argument("--method", "--methods", dest="methods", default="auto",
                   help=f"'auto' reads the selection from <out>/{ARTIFACTS['linkage']}")
    p.add_argument("--input", help="decision matrix supplying criterion categories "
                   f"(default: <out>/{ARTIFACTS['normalized']})")
    p.add_argument("--out")

    p = sub.add_parser("rank", help="rank alternatives with SAW, WP, TOPSIS, R-TOPSIS")
    p.add_argument("--normalized", help=f"default: <out>/{ARTIFACTS['normalized']}")
    p.add_argument("--weights", help=f"weights CSV (default: <out>/{ARTIFACTS['weights']}) or 'uniform'")
    p.add_argument("--weights-column", default="GM")
    p.add_argument("--method", "--methods", dest="methods", default="SAW,WP,TOPSIS,R-TOPSIS")
    p.add_argument("--input", help="raw decision matrix (required for R-TOPSIS)")
    p.add_argument("--domains")
    p.add_argument("--rtopsis-variant", default="max", choices=["max", "maxmin"])
    p.add_argument("--out")
    return parser


# -- subcommands -----------------------------------------------------------

def cmd_run(args) -> int:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {
        "input": args.input, "scheme": args.scheme, "methods": args.methods,
        "rank_methods": args.rank_methods, "rtopsis_variant": args.rtopsis_variant,
        "epsilon_min": args.epsilon_min, "epsilon_max": args.epsilon_max,
        "epsilon_step": args.epsilon_step, "iterations": args.iterations, "seed": args.seed,
        "aggregation": args.aggregate, "svg": args.svg, "workers": args.workers,
    }
    if args.k is not None:
        overrides["k"] = args.k
    cfg = cfg.updated({k: v for k, v in overrides.items() if v is not None})
    cfg.out = resolve_out(args.out, cfg.out if args.config else None)
    if args.domains:
        matrix = rio.load_matrix(cfg.input)
        cfg.domains = {k: (d.lower, d.upper) for k, d in rio.load_domains(args.domains, matrix.criteria).items()}

    report = run_pipeline(cfg)
    _print_run(report)
    print(f"\nartifacts written to {cfg.out}/")
    return 0


def _print_run(report: dict) -> None:
    ids = [c["id"] for c in report["matrix"]["criteria"]]
    methods = list(report["weights"])
    rows = [[cid, *[report["weights"][m]["weights"][j] for m in methods], report["aggregated"]["weights"][j]]
            for j, cid in enumerate(ids)]
    rows.append(["max/min", *[report["weights"][m]["max_min_ratio"] for m in methods],
                 report["aggregated"]["max_min_ratio"]])
    print("Criteria weights")
    print(format_table(["criterion", *methods, "GM"], rows))
    summ = report["stability"]["summary"]
    print("\nStability scores")
    print(format_table(
        ["method", "mean", "median", "std", "variance", "min", "max"],
        [[m, *(s[k] for k in ("mean", "median", "std", "variance", "min", "max"))] for m, s in summ.items()],
    ))
    print("\nSelected for aggregation:", ", ".join(report["aggregated"]["sources"]))
    rk = report["ranking"]
    if rk:
        names = list(rk["methods"])
        print("\nRanks")
        print(format_table(
            ["alternative", *names, "mean", "rank"],
            [[a, *[rk["methods"][n]["ranks"][i] for n in names], float(rk["mean_rank"][i]), rk["final_rank"][i]]
             for i, a in enumerate(rk["alternatives"])],
            digits=2,
        ))


def cmd_normalize(args) -> int:
    out = resolve_out(args.out)
    matrix = rio.load_matrix(args.input or bundled_fixture())
    N = normalize(matrix, parse_enum(Scheme, args.scheme))
    path = rio.write_normalized(out / ARTIFACTS["normalized"], N)
    print(format_table(["alternative", *N.criterion_ids],
                       [[a, *row] for a, row in zip(N.alternatives, N.values)]))
    print(f"\nwrote {path}")
    return 0


def cmd_weigh(args) -> int:
    out = resolve_out(args.out)
    N = rio.load_normalized(_prior(Path(args.normalized or out / ARTIFACTS["normalized"]), "normalize"))
    vectors = [compute_weights(N, m) for m in as_methods(_csv_list(args.methods))]
    path = rio.write_weights(out / ARTIFACTS["weights"], vectors, N.criterion_ids)
    rows = [[cid, *[v.weights[j] for v in vectors]] for j, cid in enumerate(N.criterion_ids)]
    rows.append(["max/min", *[v.diagnostics.max_min_ratio for v in vectors]])
    print(format_table(["criterion", *[v.method.value for v in vectors]], rows))
    print(f"\nwrote {path}")
    return 0


def cmd_stability(args) -> int:
    out = resolve_out(args.out)
    matrix = rio.load_matrix(args.input or bundled_fixture())
    report = stability_sweep(
        matrix, as_methods(_csv_list(args.methods)), parse_enum(Scheme, args.scheme),
        _sweep_config(args), args.workers or 1,
    )
    path = rio.write_stability(out / ARTIFACTS["stability"], report)
    rio.write_stability_summary(out / ARTIFACTS["stability_summary"], report)
    if args.svg:
        from .svg import write_stability_svg

        write_stability_svg(out / "stability.svg", report)
    print(format_table(
        ["method", "mean", "median", "std", "variance", "min", "max"],
        [[m.value, s.mean, s.median, s.std, s.variance, s.min, s.max] for m, s in report.summary().items()],
    ))
    print(f"\nwrote {path}")
    return 0


def cmd_cluster(args) -> int:
    out = resolve_out(args.out)
    report = rio.load_stability(_prior(Path(args.stability or out / ARTIFACTS["stability"]), "stability"))
    result = cluster_methods(report, args.k)
    selected = select_stable_methods(result, report)
    path = rio.dump_json(out / ARTIFACTS["linkage"], rio.cluster_to_dict(result, selected))
    if args.svg:
        from .svg import write_dendrogram_svg

        write_dendrogram_svg(out / "dendrogram.svg", result)
    for t, mg in enumerate(result.merges):
        print(f"merge {t + 1}: {mg.left} + {mg.right} at height {mg.height:.4f}")
    print("clusters:", " | ".join(", ".join(m.value for m in g) for g in result.clusters()))
    print("silhouette avg: %.4f" % result.silhouette_avg)
    print("selected:", ", ".join(m.value for m in selected))
    print(f"\nwrote {path}")
    return 0


def cmd_aggregate(args) -> int:
    out = resolve_out(args.out)
    weights_path = _prior(Path(args.weights or out / ARTIFACTS["weights"]), "weigh")
    vectors = rio.load_weights(weights_path)
    if args.methods == "auto":
        linkage = rio.load_json(_prior(out / ARTIFACTS["linkage"], "cluster"))
        chosen = as_methods(linkage["selected"])
    else:
        chosen = as_methods(_csv_list(args.methods))
    missing = [m.value for m in chosen if m not in vectors]
    if missing:
        raise MCDAError(f"{weights_path} has no column for {', '.join(missing)}")
    if args.input:
        criteria = rio.load_matrix(args.input).criteria
    else:
        criteria = rio.load_normalized(_prior(out / ARTIFACTS["normalized"], "normalize")).criteria
    gm = aggregate_gm([vectors[m] for m in chosen])
    keep = [v for m, v in vectors.items() if m is not WeightMethod.AGGREGATED]
    ids = gm.labels or tuple(c.id for c in criteria)
    path = rio.write_weights(out / ARTIFACTS["weights"], [*keep, gm], ids)
    summaries = {v.method: categorize(v, criteria) for v in [*keep, gm]}
    rio.write_categorical(out / ARTIFACTS["categorical"], summaries)
    rows = [[cid, *[vectors[m].weights[j] for m in chosen], gm.weights[j]] for j, cid in enumerate(ids)]
    rows.append(["max/min", *[vectors[m].diagnostics.max_min_ratio for m in chosen], gm.diagnostics.max_min_ratio])
    print(format_table(["criterion", *[m.value for m in chosen], "GM"], rows))
    print()
    cats = list(summaries[WeightMethod.AGGREGATED].shares)
    print(format_table(
        ["category", *[m.value for m in summaries]],
        [[c.value, *[s.shares.get(c, 0.0) for s in summaries.values()]] for c in cats]
        + [["max/min", *[s.max_min_ratio for s in summaries.values()]]],
        digits=2,
    ))
    print(f"\nwrote {path}")
    return 0


def cmd_rank(args) -> int:
    out = resolve_out(args.out)
    N = rio.load_normalized(_prior(Path(args.normalized or out / ARTIFACTS["normalized"]), "normalize"))
    if args.weights == "uniform":
        n = N.shape[1]
        w = WeightVector(np.full(n, 1.0 / n), WeightMethod.AGGREGATED, WeightDiagnostics(1.0), N.criterion_ids)
    else:
        vectors = rio.load_weights(_prior(Path(args.weights or out / ARTIFACTS["weights"]), "weigh"))
        column = parse_enum(WeightMethod, args.weights_column)
        if column not in vectors:
            raise MCDAError(f"weights file has no {column.value} column")
        w = vectors[column]
    methods = parse_rank_methods(_csv_list(args.methods))
    results = []
    domains = None
    for method in methods:
        if method is RankMethod.SAW:
            results.append(rank_saw(N, w))
        elif method is RankMethod.WP:
            results.append(rank_wp(N, w))
        elif method is RankMethod.TOPSIS:
            results.append(rank_topsis(N, w))
        else:
            if not args.input:
                raise MCDAError("R-TOPSIS needs the raw decision matrix: pass --input")
            matrix = rio.load_matrix(args.input)
            given = None
            if args.domains:
                given = {k: (d.lower, d.upper) for k, d in rio.load_domains(args.domains, matrix.criteria).items()}
            domains = resolve_domains(matrix, given)
            results.append(rank_rtopsis(matrix, w, domains, args.rtopsis_variant))
    if not results:
        raise MCDAError("no ranking methods requested")
    mean, final = mean_ranks(results)
    rio.write_scores(out / ARTIFACTS["scores"], results)
    path = rio.write_rank_table(out / ARTIFACTS["ranks"], results, mean, final)
    if domains is not None:
        rio.write_domains(out / ARTIFACTS["domains"], N.criteria, domains)
    print(format_table(
        ["alternative", *[f"{r.method.value} score" for r in results], *[r.method.value for r in results], "mean", "rank"],
        [[a, *[float(r.scores[i]) for r in results], *[int(r.ranks[i]) for r in results], float(mean[i]), int(final[i])]
         for i, a in enumerate(N.alternatives)],
    ))
    print(f"\nwrote {path}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "normalize": cmd_normalize,
    "weigh": cmd_weigh,
    "stability": cmd_stability,
    "cluster": cmd_cluster,
    "aggregate": cmd_aggregate,
    "rank": cmd_rank,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"rmcda: error {exc}", file=sys.stderr)
        return 1
    except (MCDAError, OSError) as exc:
        print(f"rmcda: error [{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
