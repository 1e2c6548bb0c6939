"""Command-line surface: sample, verify, oracle-check, enumerate, bench.

Machine-readable JSON lines go to stdout; human-oriented summaries go to
stderr.  Every report embeds the seed, k, a short graph hash, and the
package version, so any number in any report can be replayed.  Exit codes:
0 success, 1 failed verification checks, 2 bad input (arguments, graph
files, or a rejected (graph, k) instance).
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from collections import Counter
from dataclasses import dataclass
from statistics import median

from . import __version__
from .graph import (
    Graph,
    GraphParseError,
    InstanceRejectedError,
    graph_hash,
    load_graph_file,
    max_degree,
    validate_instance,
)
from .oracle import (
    chi_square_critical,
    coalescence_stats,
    drift_lower_bound,
    enumerate_colorings,
    random_bounded_degree_graph,
    scripted_trace_check,
    uniformity_test,
)
from .phases import generate_block
from .randomness import derive_trial_seed, parse_seed
from .sampler import apply_block, perfect_sample


@dataclass
class RunConfig:
    """Parsed invocation: one command plus its common knobs."""

    command: str
    graph_path: str | None
    fmt: str | None
    k: int | None
    seed: int
    n_samples: int
    trials: int
    jobs: int
    trace: bool
    output: str


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")


def _note(text: str) -> None:
    sys.stderr.write(text + "\n")


def _context(g: Graph, k: int, seed: int) -> dict:
    return {
        "graph_hash": graph_hash(g),
        "version": __version__,
        "n": g.n,
        "edges": g.m,
        "max_degree": max_degree(g),
        "k": k,
        "seed": seed,
    }


class _TraceEmitter:
    """Streams per-update records (vertex, kind, list sizes, X_t) to stderr."""

    def __init__(self, sample_index: int, block_index: int):
        self.sample_index = sample_index
        self.block_index = block_index

    def pre_update(self, step, kind, vertex, spruce_set, state) -> None:
        pass

    def post_update(self, step, kind, vertex, state) -> None:
        hist = Counter(state.sizes)
        sys.stderr.write(json.dumps({
            "sample": self.sample_index,
            "block": self.block_index,
            "step": step,
            "kind": kind,
            "vertex": vertex,
            "list_sizes": {str(sz): c for sz, c in sorted(hist.items())},
            "singletons": state.nsingle,
        }, separators=(",", ":")) + "\n")


def _traced_sample(g: Graph, k: int, seed: int, sample_index: int):
    validate_instance(g, k)
    i = 0
    while True:
        blk = generate_block(g, k, seed, i, keep_tuples=False,
                             observer=_TraceEmitter(sample_index, i))
        if blk.phi:
            break
        i += 1
    chi = blk.coloring
    for j in range(i - 1, -1, -1):
        chi = apply_block(generate_block(g, k, seed, j, keep_tuples=True), chi, g)
    return chi, i + 1


def _cmd_sample(cfg: RunConfig, g: Graph) -> int:
    base = _context(g, cfg.k, cfg.seed)
    if cfg.n_samples == 1:
        seeds = [cfg.seed]
    else:
        seeds = [derive_trial_seed(cfg.seed, i) for i in range(cfg.n_samples)]
    draw = _traced_sample if cfg.trace else perfect_sample
    if cfg.jobs > 1 and cfg.n_samples > 1 and not cfg.trace:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(cfg.jobs) as pool:
            results = pool.starmap(perfect_sample, [(g, cfg.k, s) for s in seeds])
    else:
        if cfg.trace:
            results = [draw(g, cfg.k, s, i) for i, s in enumerate(seeds)]
        else:
            results = [draw(g, cfg.k, s) for s in seeds]
    for i, (chi, blocks_used) in enumerate(results):
        _emit({**base, "sample_index": i, "sample_seed": seeds[i],
               "blocks_used": blocks_used, "coloring": list(chi)})
    _note(f"sampled {cfg.n_samples} coloring(s) of n={g.n}, k={cfg.k}")
    return 0


def _cmd_enumerate(cfg: RunConfig, g: Graph) -> int:
    count = len(enumerate_colorings(g, cfg.k))
    _emit({**_context(g, cfg.k, cfg.seed), "command": "enumerate", "count": count})
    _note(f"{count} proper {cfg.k}-colorings")
    return 0


def _cmd_oracle_check(cfg: RunConfig, g: Graph) -> int:
    report = scripted_trace_check(g, cfg.k, cfg.seed, updates=cfg.trials or 50)
    _emit({**_context(g, cfg.k, cfg.seed), "name": "exact-marginal-trace",
           "updates": report.updates_checked, "triples": report.triples_checked,
           "failures": report.failures[:20], "pass": report.ok})
    _note(f"exact-marginal trace: {report.triples_checked} triples, "
          f"{'ok' if report.ok else f'{len(report.failures)} FAILURES'}")
    return 0 if report.ok else 1


def _cmd_verify(cfg: RunConfig, g: Graph, drift_csv: str | None) -> int:
    base = _context(g, cfg.k, cfg.seed)
    ok = True

    uni = uniformity_test(g, cfg.k, cfg.n_samples, cfg.seed, jobs=cfg.jobs)
    crit = chi_square_critical(uni.df)
    passed = uni.chi_square < crit
    ok &= passed
    _emit({**base, "name": "chi-square-uniformity", "samples": uni.n_samples,
           "support": uni.support_size, "df": uni.df,
           "statistic": round(uni.chi_square, 3), "threshold": round(crit, 3),
           "tv_distance": round(uni.tv_distance, 6), "pass": passed})

    stats = coalescence_stats(g, cfg.k, cfg.trials, cfg.seed, jobs=cfg.jobs)
    passed = stats.phi_rate >= 0.45
    ok &= passed
    _emit({**base, "name": "single-block-phi-rate", "trials": stats.trials,
           "statistic": stats.phi_rate, "threshold": 0.45, "pass": passed})
    passed = stats.mean_blocks <= 2.2
    ok &= passed
    _emit({**base, "name": "mean-blocks-used", "trials": stats.trials,
           "statistic": stats.mean_blocks, "threshold": 2.2, "pass": passed})

    d = max_degree(g)
    worst = None
    drift_ok = True
    for x, entry in stats.drift_profile.items():
        if entry.count < 100:
            continue
        bound = drift_lower_bound(g.n, cfg.k, d, x)
        slack = entry.mean - (bound - 3.0 * entry.stderr)
        if worst is None or slack < worst:
            worst = slack
        if slack < 0:
            drift_ok = False
    ok &= drift_ok
    _emit({**base, "name": "coalescence-drift", "bins": len(stats.drift_profile),
           "statistic": worst, "threshold": 0.0, "pass": drift_ok})
    if drift_csv:
        with open(drift_csv, "w", encoding="utf-8") as fh:
            fh.write("x,count,mean_increment,stderr,lower_bound\n")
            for x, entry in sorted(stats.drift_profile.items()):
                fh.write(f"{x},{entry.count},{entry.mean:.6f},{entry.stderr:.6f},"
                         f"{drift_lower_bound(g.n, cfg.k, d, x):.6f}\n")
        _note(f"drift profile written to {drift_csv}")

    _note("verify: all checks passed" if ok else "verify: CHECKS FAILED")
    return 0 if ok else 1


def _cmd_bench(cfg: RunConfig, sizes, degrees, seeds_per_cell) -> int:
    rows = []
    for n in sizes:
        for d in degrees:
            graph = random_bounded_degree_graph(n, d, seed=cfg.seed ^ (n * 1000 + d))
            for k in (3 * d + 1, 4 * d):
                cell = []
                for s in range(seeds_per_cell):
                    seed = derive_trial_seed(cfg.seed, n * 10**6 + d * 10**4 + k * 10 + s)
                    t0 = time.perf_counter()
                    _, blocks = perfect_sample(graph, k, seed)
                    wall = time.perf_counter() - t0
                    cell.append((wall, blocks))
                    rows.append({"n": n, "delta": max_degree(graph), "k": k,
                                 "seed_index": s, "wall_s": round(wall, 4),
                                 "blocks_used": blocks})
                _emit({"name": "bench-cell", "version": __version__,
                       "graph_hash": graph_hash(graph), "seed": cfg.seed,
                       "n": n, "delta": max_degree(graph), "k": k,
                       "median_wall_s": round(median(w for w, _ in cell), 4),
                       "median_blocks": median(b for _, b in cell)})
                _note(f"bench n={n} delta={max_degree(graph)} k={k}: "
                      f"median {median(w for w, _ in cell):.3f}s over {seeds_per_cell} seeds")
    if cfg.output == "csv":
        sys.stdout.write("n,delta,k,seed_index,wall_s,blocks_used\n")
        for r in rows:
            sys.stdout.write(f"{r['n']},{r['delta']},{r['k']},{r['seed_index']},"
                             f"{r['wall_s']},{r['blocks_used']}\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="perfectcolor",
        description="Exactly uniform proper k-coloring sampler (requires k > 3*max_degree).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph_required=True, jobs=False):
        if graph_required:
            sp.add_argument("--graph", required=True, help="path to the graph file")
            sp.add_argument("--format", choices=("auto", "dimacs", "edgelist"),
                            default="auto", help="input format (default: sniff)")
            sp.add_argument("--k", type=int, required=True, help="number of colors")
        sp.add_argument("--seed", type=parse_seed, default=None,
                        help="master seed, decimal or 0x-hex (default: OS entropy, echoed)")
        if jobs:
            sp.add_argument("--jobs", type=int, default=1,
                            help="worker processes (default 1 for deterministic logs)")

    sp = sub.add_parser("sample", help="draw perfectly uniform colorings as JSON lines")
    common(sp, jobs=True)
    sp.add_argument("--n", type=int, default=1, dest="n_samples",
                    help="number of samples (each gets a derived seed, logged)")
    sp.add_argument("--trace", action="store_true",
                    help="emit per-update trace records to stderr")

    sp = sub.add_parser("verify", help="uniformity chi-square + coalescence statistics")
    common(sp, jobs=True)
    sp.add_argument("--samples", type=int, default=120_000, dest="n_samples",
                    help="perfect samples for the chi-square test")
    sp.add_argument("--trials", type=int, default=500,
                    help="single-block and full-run trials")
    sp.add_argument("--drift-csv", default=None, help="write the drift profile as CSV")

    sp = sub.add_parser("oracle-check", help="exact-marginal sweep on a scripted trace")
    common(sp)
    sp.add_argument("--updates", type=int, default=50, dest="trials",
                    help="number of scripted updates to check (default 50)")

    sp = sub.add_parser("enumerate", help="count proper k-colorings by brute force")
    common(sp)

    # bench stays single-process so its wall-clock numbers mean something
    sp = sub.add_parser("bench", help="wall-time table over an (n, degree, k) grid")
    common(sp, graph_required=False)
    sp.add_argument("--sizes", default="100,200,400,800",
                    help="comma-separated n values")
    sp.add_argument("--degrees", default="4,8", help="comma-separated degree caps")
    sp.add_argument("--seeds-per-cell", type=int, default=5)
    sp.add_argument("--output", choices=("json", "csv"), default="json")

    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    if args.seed is None:
        _note(f"seed not given; using OS entropy seed {seed}")
    cfg = RunConfig(
        command=args.command,
        graph_path=getattr(args, "graph", None),
        fmt=getattr(args, "format", None),
        k=getattr(args, "k", None),
        seed=seed,
        n_samples=getattr(args, "n_samples", 1),
        trials=getattr(args, "trials", 500),
        jobs=getattr(args, "jobs", 1),
        trace=getattr(args, "trace", False),
        output=getattr(args, "output", "json"),
    )
    try:
        if cfg.command == "bench":
            sizes = [int(x) for x in args.sizes.split(",") if x]
            degrees = [int(x) for x in args.degrees.split(",") if x]
            return _cmd_bench(cfg, sizes, degrees, args.seeds_per_cell)
        fmt = None if cfg.fmt in (None, "auto") else cfg.fmt
        g = load_graph_file(cfg.graph_path, fmt)
        validate_instance(g, cfg.k)
        if cfg.command == "sample":
            return _cmd_sample(cfg, g)
        if cfg.command == "enumerate":
            return _cmd_enumerate(cfg, g)
        if cfg.command == "oracle-check":
            return _cmd_oracle_check(cfg, g)
        if cfg.command == "verify":
            return _cmd_verify(cfg, g, args.drift_csv)
        raise AssertionError(f"unhandled command {cfg.command}")
    except (GraphParseError, InstanceRejectedError, FileNotFoundError, ValueError) as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
