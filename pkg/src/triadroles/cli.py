"""Command-line interface: ``triadroles <command> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .graph import load_edge_list, write_edge_list
from .pipeline import (F, RunConfig, StageError, load_input, load_sample, run_pipeline, stage_census,
                       stage_cluster, stage_powerlaw, stage_reduce, stage_roles, stage_sample,
                       stage_sample_eval, stage_stats)
from .sampling import METHODS
from .synth import PlantedRoleSpec, generate_planted, generate_powerlaw, write_ground_truth


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--config", help="JSON config file; command-line flags win")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="run directory")
    g.add_argument("--workers", type=int, help="worker processes (never changes results)")
    g.add_argument("--radius", type=int, choices=(1, 2), help="ego-network radius")


def _input(p):
    p.add_argument("--input", help="edge list (src dst [extra...])")
    p.add_argument("--delimiter", help="field delimiter (default: whitespace)")
    p.add_argument("--columns", help="src,dst column indexes, e.g. 1,2")


def _sampling(p):
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--phi", type=float)
    p.add_argument("--ffs-p", dest="ffs_p", type=float)
    p.add_argument("--induce", action="store_true", default=None, help="FFS: keep all induced edges")
    p.add_argument("--reps", type=int)


def _cluster(p):
    p.add_argument("--k-min", dest="k_min", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--restarts", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triadroles", description="Social role discovery from conditional triad censuses")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="summary statistics and degree distributions")
    _common(p); _input(p)

    p = sub.add_parser("fit-powerlaw", help="power-law fits of degree distributions")
    _common(p); _input(p)
    p.add_argument("--which", choices=("in", "out", "both"), default="both")
    p.add_argument("--bootstraps", type=int)

    p = sub.add_parser("sample", help="draw the analysis sample")
    _common(p); _input(p); _sampling(p)

    p = sub.add_parser("sample-eval", help="KS comparison of samplers and census stability")
    _common(p); _input(p); _sampling(p)
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--phi-grid", dest="phi_grid", type=_floats)
    p.add_argument("--stability-n", dest="stability_n", type=int, default=20, help="FFS samples for stability (0: skip)")

    p = sub.add_parser("census", help="conditional triad census of the saved sample")
    _common(p)
    p.add_argument("--graph", help="edge list to use instead of the saved sample")

    p = sub.add_parser("reduce", help="PCA of the census matrix")
    _common(p)
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("cluster", help="k-means sweep over k")
    _common(p); _cluster(p)

    p = sub.add_parser("roles", help="central users, structures and role report")
    _common(p)
    p.add_argument("--central-space", dest="central_space", choices=("embedded", "census"))
    p.add_argument("--formats", help="comma list of dot,graphml")

    p = sub.add_parser("pipeline", help="run every stage")
    _common(p); _input(p); _sampling(p); _cluster(p)
    p.add_argument("--threshold", type=float)
    p.add_argument("--bootstraps", type=int)
    p.add_argument("--central-space", dest="central_space", choices=("embedded", "census"))
    p.add_argument("--formats", help="comma list of dot,graphml")
    p.add_argument("--no-powerlaw", dest="no_powerlaw", action="store_true")

    p = sub.add_parser("synth", help="generate synthetic graphs")
    _common(p)
    p.add_argument("kind", choices=("planted", "powerlaw"))
    p.add_argument("--brokers", type=int, default=100)
    p.add_argument("--groups", type=int, default=3)
    p.add_argument("--clique-size", dest="clique_size", type=int, default=6)
    p.add_argument("--spokes", type=int, default=4)
    p.add_argument("--extra-cliques", dest="extra_cliques", type=int, default=0)
    p.add_argument("--rewire", type=float, default=0.0)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--alpha", type=float, default=2.5)
    return parser


def _config(args) -> RunConfig:
    names = {f.name for f in dataclasses.fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    if isinstance(overrides.get("columns"), str):
        overrides["columns"] = tuple(int(c) for c in overrides["columns"].split(","))
    if isinstance(overrides.get("formats"), str):
        overrides["formats"] = tuple(f for f in overrides["formats"].split(",") if f)
    if args.config:
        return RunConfig.from_json(args.config, **overrides)
    return RunConfig(**overrides)


_NEEDS_INPUT = ("pipeline", "stats", "fit-powerlaw", "sample", "sample-eval")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    try:
        cfg = _config(args)
        if cmd in _NEEDS_INPUT and not cfg.input:
            raise ValueError("--input is required")
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stage = cmd
    try:
        if cmd == "pipeline":
            run_pipeline(cfg, with_powerlaw=not args.no_powerlaw)
        elif cmd == "stats":
            print(stage_stats(load_input(cfg), out))
        elif cmd == "fit-powerlaw":
            which = ("in", "out") if args.which == "both" else (args.which,)
            print(stage_powerlaw(load_input(cfg), out, cfg.bootstraps, cfg.seed, which, cfg.workers))
        elif cmd == "sample":
            s = stage_sample(load_input(cfg), out, cfg)
            print(f"sample: {s.node_count} nodes, {s.edge_count} edges -> {out / F['sample_edges']}")
        elif cmd == "sample-eval":
            methods = tuple(m for m in args.methods.split(",") if m)
            stage_sample_eval(load_input(cfg), out, cfg, methods, args.phi_grid, args.stability_n)
        elif cmd == "census":
            s = load_edge_list(args.graph) if args.graph else load_sample(out)
            cm = stage_census(s, out, cfg.radius, cfg.workers)
            print(f"census: {len(cm)} egos, {cm.excluded.size} excluded -> {out / F['census']}")
        elif cmd == "reduce":
            emb = stage_reduce(out, cfg.threshold)
            print(f"retained {emb.retained} components ({emb.cum_variance:.3f} of variance)")
        elif cmd == "cluster":
            sw = stage_cluster(out, cfg.k_min, cfg.k_max, cfg.restarts, cfg.seed, cfg.workers)
            print(f"chosen k = {sw.chosen_k}, mean centroid silhouette = {sw.mean_silhouette[sw.chosen_k]:.3f}")
        elif cmd == "roles":
            rep = stage_roles(load_sample(out), out, cfg)
            for r in rep["roles"]:
                print(f"role {r['role_id']}: {r['proportion']:.3%} central user {r['central_user']}")
        elif cmd == "synth":
            if args.kind == "planted":
                spec = PlantedRoleSpec(args.brokers, args.groups, args.clique_size, args.spokes,
                                       args.extra_cliques, args.rewire, cfg.seed)
                g, truth = generate_planted(spec)
                write_ground_truth(truth, out / "ground_truth.csv")
            else:
                g = generate_powerlaw(args.n, args.alpha, cfg.seed)
            write_edge_list(g, out / "graph.tsv")
            print(f"{args.kind}: {g.node_count} nodes, {g.edge_count} edges -> {out / 'graph.tsv'}")
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"error: stage '{stage}' failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
