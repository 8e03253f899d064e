"""``echosim`` command line: generate, run, measure, experiment.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
Environment: ``ECHOSIM_OUTDIR`` (default output directory), ``ECHOSIM_WORKERS``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, netgen
from ._accel import backend_name
from .experiments import SCALES, ExperimentConfig, run_replications
from .graph import AdaptiveDigraph
from .measures import bc_hom, bimodality_coefficient, density_map, neighbor_mean, write_coefficients
from .model import ALIGNED, CONTROVERSIAL, ModelParams, OpinionState, Simulation, init_state
from .presets import PRESETS

log = logging.getLogger("echosim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(outdir: Path, command: str, config: dict, seed, files, timings: dict, extra=None) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "backend": backend_name(),
        "files": {Path(f).name: sha256_file(f) for f in sorted(map(str, files))},
        "timings": timings,
    }
    if extra:
        manifest.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o))


def _outdir(args) -> Path:
    out = Path(args.outdir or os.environ.get("ECHOSIM_OUTDIR") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _network_spec(args) -> dict:
    if args.model == "er":
        return {"model": "er", "p": args.p}
    return {"model": "sf", "lambda": args.lam, "kmin": args.kmin}


def _add_network_args(p, required=True):
    p.add_argument("--model", choices=("er", "sf"), default="er" if not required else None, required=required)
    p.add_argument("--n", type=int, default=None, required=required)
    p.add_argument("--p", type=float, default=1.6e-3, help="ER edge probability")
    p.add_argument("--lambda", dest="lam", type=float, default=2.43, help="power-law exponent")
    p.add_argument("--kmin", type=int, default=3)


def cmd_generate(args) -> int:
    if args.n is None or args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.model == "er" and not 0.0 <= args.p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    if args.model == "sf" and (args.lam <= 2 or args.kmin < 1):
        raise UsageError("--lambda must exceed 2 and --kmin be >= 1")
    out = _outdir(args)
    t0 = time.perf_counter()
    spec = _network_spec(args)
    g = netgen.generate(spec, args.n, np.random.default_rng(args.seed))
    edges = out / args.name
    g.write_edgelist(edges)
    sidecar = edges.with_suffix(edges.suffix + ".json")
    netgen.write_sidecar(sidecar, n=args.n, seed=args.seed, edges=g.edge_count, **spec)
    print(f"{g.edge_count} edges -> {edges}")
    log.info("generated in %.2fs", time.perf_counter() - t0)
    return 0


def cmd_run(args) -> int:
    if not 0.0 <= args.phi <= math.pi:
        raise UsageError(f"--phi {args.phi} outside [0, pi]")
    if args.iterations < 0:
        raise UsageError("--iterations must be >= 0")
    if args.delta <= 0:
        raise UsageError("--delta must be positive")
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    rng = np.random.default_rng(seed)
    out = _outdir(args)
    t0 = time.perf_counter()

    if args.opinions:
        state = OpinionState.read_csv(args.opinions, aligned_stubborn=args.stubborn_posting == ALIGNED)
    else:
        state = None
    if args.graph:
        graph = AdaptiveDigraph.read_edgelist(args.graph, n=state.n if state else args.n)
    else:
        if args.model is None or (args.n is None and state is None):
            raise UsageError("give --graph or a generator (--model and --n)")
        graph = netgen.generate(_network_spec(args), state.n if state else args.n, rng)
    if state is None:
        state = init_state(graph.n, rng, priority_fraction=args.priority_fraction,
                           stubborn_fraction=args.stubborn_fraction, stubborn_profile=args.profile,
                           stubborn_are_priority=args.ideologue, priority_posting=args.priority_posting,
                           stubborn_posting=args.stubborn_posting)
    if state.n != graph.n:
        raise ValueError(f"opinions cover {state.n} nodes but the graph has {graph.n}")

    params = ModelParams(phi=args.phi, delta=args.delta, iterations=args.iterations)
    t1 = time.perf_counter()
    sim = Simulation(state, graph, params, rng).run()
    t2 = time.perf_counter()
    op, ed = out / "opinions.csv", out / "edges.tsv"
    state.write_csv(op)
    graph.write_edgelist(ed)
    config = {"phi": args.phi, "delta": args.delta, "iterations": args.iterations, "n": graph.n,
              "graph": args.graph, "opinions": args.opinions}
    write_manifest(out, "run", config, seed, [op, ed],
                   {"setup_s": round(t1 - t0, 3), "run_s": round(t2 - t1, 3)}, {"stats": sim.stats.as_dict()})
    print(f"{args.iterations} events in {t2 - t1:.2f}s -> {out}")
    return 0


def cmd_measure(args) -> int:
    state = OpinionState.read_csv(args.opinions)
    graph = AdaptiveDigraph.read_edgelist(args.edges, n=state.n)
    out = _outdir(args)
    b = state.opinions
    keep = state.normal if args.normal_only else np.ones(state.n, dtype=bool)
    b_nn, has_out = neighbor_mean(graph, b)
    sel = keep & has_out
    rows = [("bc", bimodality_coefficient(b[keep]), int(keep.sum())),
            ("bc_hom", bc_hom(b[sel], b_nn[sel]), int(sel.sum()))]
    coef = out / "coefficients.csv"
    write_coefficients(coef, rows)
    dm = density_map(b[sel], b_nn[sel], args.bins)
    dm.write_csv(out / "density.csv")
    dm.write_pgm(out / "density.pgm")
    for name, value, n in rows:
        print(f"{name}\t{value:.6f}\tn={n}")
    return 0


def cmd_experiment(args) -> int:
    if args.seed is None:
        raise UsageError("experiment mode requires --seed")
    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
        out = _outdir(args)
        t0 = time.perf_counter()
        cell = run_replications(cfg.replace(master_seed=args.seed), args.workers)
        from .experiments import ResultTable
        table = ResultTable("config", [cell])
        res = out / "results.csv"
        res.write_text(table.to_csv())
        write_manifest(out, "experiment", cfg.to_dict(), args.seed, [res],
                       {"total_s": round(time.perf_counter() - t0, 3), "replications": table.wall_times()})
        print(f"-> {res}")
        return 0
    if args.preset not in PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from: {', '.join(PRESETS)}")
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.iterations is not None:
        overrides["iterations"] = args.iterations
    if args.n is not None:
        overrides["n"] = args.n
    out = _outdir(args)
    t0 = time.perf_counter()
    files, extra = PRESETS[args.preset](args.scale, args.seed, args.workers, overrides, mode=args.mode)
    written = []
    for name, text in sorted(files.items()):
        path = out / name
        path.write_text(text)
        written.append(path)
    config = {"preset": args.preset, "scale": args.scale, "mode": args.mode, "scale_params": SCALES[args.scale],
              "overrides": overrides}
    write_manifest(out, "experiment", config, args.seed, written,
                   {"total_s": round(time.perf_counter() - t0, 3)}, {"results": extra} if extra else None)
    for k, v in extra.items():
        print(f"{k}: {v}")
    print(f"{len(written)} files -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="echosim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="build an initial network")
    _add_network_args(g)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--outdir")
    g.add_argument("--name", default="edges.tsv")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="simulate from a graph file or a generated network")
    r.add_argument("--graph")
    r.add_argument("--opinions", help="initial snapshot CSV (id,opinion,priority,stubborn)")
    _add_network_args(r, required=False)
    r.set_defaults(model=None)
    r.add_argument("--phi", type=float, default=0.785)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--iterations", type=int, default=10**8)
    r.add_argument("--priority-fraction", type=float, default=0.0)
    r.add_argument("--stubborn-fraction", type=float, default=0.0)
    r.add_argument("--profile", choices=("extremist", "centrist"), default="extremist")
    r.add_argument("--ideologue", action="store_true", help="stubborn users are drawn among priority users")
    r.add_argument("--priority-posting", choices=(CONTROVERSIAL, ALIGNED), default=CONTROVERSIAL)
    r.add_argument("--stubborn-posting", choices=(CONTROVERSIAL, ALIGNED), default=ALIGNED)
    r.add_argument("--seed", type=int)
    r.add_argument("--outdir")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("measure", help="coefficients and density map of a snapshot")
    m.add_argument("--opinions", required=True)
    m.add_argument("--edges", required=True)
    m.add_argument("--normal-only", action="store_true")
    m.add_argument("--bins", type=int, default=50)
    m.add_argument("--outdir")
    m.set_defaults(func=cmd_measure)

    e = sub.add_parser("experiment", help="run a named study or a JSON config")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset")
    src.add_argument("--config", help="ExperimentConfig JSON document")
    e.add_argument("--scale", choices=tuple(SCALES), default="desk")
    e.add_argument("--mode", help="fig4/s5: stubborn|ideologue|both; fig3/s3: er|sf")
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int, default=None)
    e.add_argument("--replications", type=int)
    e.add_argument("--iterations", type=int)
    e.add_argument("--n", type=int)
    e.add_argument("--outdir")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(asctime)s %(name)s %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"echosim: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"echosim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
