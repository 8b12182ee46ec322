"""Command-line interface: ``kcycle find | schedule | bench | oracle | gen``.

Exit codes: 0 found / success, 1 not found, 2 input or usage error.  Every
flag can also be set through an environment variable ``KCYCLE_<FLAG>``
(for example ``KCYCLE_SEED=7``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels as K
from .detector import OracleGuardError, SearchConfig, brute_force_k_cycle, search_k_cycle
from .gen import MODELS, GenSpec, generate
from .graph import CyclePath, Graph, GraphError, degeneracy, read_edge_list, verify_cycle, write_edge_list
from .pipeline import StagePlan, plan_arrays, stage_plans
from .schedule import build_schedule

RECORDS_FORMAT = "kcycle-records"
RECORDS_VERSION = 1

EXIT_FOUND, EXIT_NOT_FOUND, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _env(name: str, default=None):
    return os.environ.get(f"KCYCLE_{name}", default)


def _env_int(name: str, default: int | None) -> int | None:
    raw = _env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"KCYCLE_{name} must be an integer, got {raw!r}") from None


def _env_bool(name: str) -> bool | None:
    raw = _env(name)
    if raw is None:
        return None
    return raw.strip().lower() in ("1", "true", "yes", "on")


class _Out:
    """Text or line-delimited JSON output with a versioned header."""

    def __init__(self, fmt: str, command: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout
        if fmt == "records":
            self.record({"format": RECORDS_FORMAT, "version": RECORDS_VERSION, "command": command})

    def record(self, obj: dict) -> None:
        print(json.dumps(obj, sort_keys=True), file=self.stream)

    def emit(self, text: str, obj: dict) -> None:
        if self.fmt == "records":
            self.record(obj)
        else:
            print(text, file=self.stream)


def _witness_labels(G: Graph, path: CyclePath) -> list[int]:
    return [int(G.labels[v]) for v in path.vertices]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_find(args) -> int:
    G = read_edge_list(args.path, args.directed)
    cfg = SearchConfig(trials=args.trials, seed=args.seed,
                       record_traces=args.trace_dir is not None, trace_dir=args.trace_dir)
    res = search_k_cycle(G, args.k, cfg)
    out = _Out(args.format, "find")
    if res.cycle is None:
        out.emit("NOT-FOUND", {"type": "result", "found": False, "k": args.k, "trials_run": res.trials_run})
        return EXIT_NOT_FOUND
    if not verify_cycle(G, res.cycle, args.k):
        raise AssertionError("refusing to print an unverified witness")
    labels = _witness_labels(G, res.cycle)
    out.emit(" ".join(map(str, labels)),
             {"type": "result", "found": True, "k": args.k, "cycle": labels,
              "trial": res.success_trial, "trials_run": res.trials_run})
    return EXIT_FOUND


def cmd_schedule(args) -> int:
    if args.k < 4:
        raise UsageError(f"the schedule needs k >= 4, got {args.k}")
    s = build_schedule(args.k)
    out = _Out(args.format, "schedule")
    for e in s.elements:
        out.emit(str(e), {"type": "element", "index": e.index, "t": e.t, "h": e.h, "r": e.r})
    return EXIT_FOUND


def cmd_oracle(args) -> int:
    G = read_edge_list(args.path, args.directed)
    path = brute_force_k_cycle(G, args.k, max_n=args.max_n)
    out = _Out(args.format, "oracle")
    if path is None:
        out.emit("NOT-FOUND", {"type": "result", "found": False, "k": args.k})
        return EXIT_NOT_FOUND
    if not verify_cycle(G, path, args.k):
        raise AssertionError("refusing to print an unverified witness")
    labels = _witness_labels(G, path)
    out.emit(" ".join(map(str, labels)), {"type": "result", "found": True, "k": args.k, "cycle": labels})
    return EXIT_FOUND


def cmd_gen(args) -> int:
    spec = GenSpec(n=args.n, d_target=args.d, model=args.model, directed=bool(args.directed),
                   planted_k=args.planted_k, seed=args.seed)
    G, witness = generate(spec)
    write_edge_list(G, args.out)
    if witness is not None and args.witness is not None:
        Path(args.witness).write_text(" ".join(map(str, witness.vertices)) + "\n")
    out = _Out(args.format, "gen")
    out.emit(f"wrote {args.out}: n={G.n} m={G.m}",
             {"type": "result", "path": str(args.out), "n": G.n, "m": G.m,
              "witness": None if witness is None else list(witness.vertices)})
    return EXIT_FOUND


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

@dataclass
class BenchRow:
    n: int
    m: int
    k: int
    d: int
    trials: int
    successes: int
    seconds_per_trial: float
    stage_seconds: list[float] = field(default_factory=list)


@dataclass
class BenchReport:
    seed: int
    rows: list[BenchRow]

    def ratios(self) -> list[float]:
        """Per-trial time of each row divided by the previous row's."""
        t = [r.seconds_per_trial for r in self.rows]
        return [b / a for a, b in zip(t, t[1:])]

    def text(self) -> str:
        head = f"{'n':>8} {'m':>8} {'k':>3} {'d':>3} {'trials':>7} {'hits':>5} {'ms/trial':>10}  per-stage ms"
        lines = [head]
        for r in self.rows:
            stages = " ".join(f"{1e3 * s:.2f}" for s in r.stage_seconds)
            lines.append(f"{r.n:>8} {r.m:>8} {r.k:>3} {r.d:>3} {r.trials:>7} {r.successes:>5} "
                         f"{1e3 * r.seconds_per_trial:>10.3f}  {stages}")
        return "\n".join(lines)


def _timed_trial(G: Graph, k: int, plans: list[StagePlan], seed: int) -> list[float]:
    """One trial driven from Python so each stage can be timed on its own.

    Mirrors ``_kernels.run_trial`` call for call.
    """
    s = np.uint64(seed)
    n, src, dst, labels = G.n, G.src, G.dst, G.labels
    colors = K.hash_colors(labels, s, 4 + k % 4)
    times = [0.0] * (len(plans) + 1)
    for i, plan in enumerate(plans):
        t0 = time.perf_counter()
        if src.shape[0] < plan.t:
            return times
        if plan.refine:
            colors = K.refine(colors, K.hash_choices(labels, s, plan.index, plan.nopt), plan.c3)
        else:
            keep = K.clean_mask(src, dst, colors, plan.table)
            src, dst = src[keep], dst[keep]
            ptr, idx = K.und_adj(n, src, dst, G.directed)
            _, pos, _ = K.degeneracy(n, ptr, idx)
            keys = K.hash_label_keys(ptr, idx, pos, labels, s, plan.index)
            first = K.first_from_keys(ptr, idx, pos, keys)
            win = K.hash_winners(labels, colors, plan.j, s, plan.index)
            keep = K.cleanup_mask(src, dst, win, pos, first)
            src, dst = src[keep], dst[keep]
            n, _, src, dst, colors, labels = K.contract(n, src, dst, colors, labels, win,
                                                        plan.buffer, plan.h, plan.r, G.directed)
        times[i] = time.perf_counter() - t0
    t0 = time.perf_counter()
    K.find_triangle(n, src, dst, colors, G.directed, True)
    times[-1] = time.perf_counter() - t0
    return times


def bench_row(G: Graph, k: int, trials: int, seed: int, profile_trials: int = 5) -> BenchRow:
    plans = stage_plans(build_schedule(k), G.directed)
    arrays = plan_arrays(plans)
    root = np.uint64(seed & K.MASK64)
    q0 = 4 + k % 4
    # compile and warm caches outside the timed region
    K.count_successes(G.n, G.src, G.dst, G.labels, G.directed, root, 0, 1, q0, *arrays)
    t0 = time.perf_counter()
    hits = int(K.count_successes(G.n, G.src, G.dst, G.labels, G.directed, root, 0, trials, q0, *arrays))
    per_trial = (time.perf_counter() - t0) / trials
    prof = np.zeros(len(plans) + 1)
    reps = max(1, min(profile_trials, trials))
    for i in range(reps):
        prof += _timed_trial(G, k, plans, int(K.trial_seed(root, i)))
    return BenchRow(G.n, G.m, k, degeneracy(G), trials, hits, per_trial, (prof / reps).tolist())


def run_bench(ns: Sequence[int], k: int, d: int, trials: int, seed: int = 0,
              directed: bool = False, model: str = "degenerate-random") -> BenchReport:
    rows = []
    for n in ns:
        G, _ = generate(GenSpec(n=n, d_target=d, model=model, directed=directed, seed=seed))
        rows.append(bench_row(G, k, trials, seed))
    return BenchReport(seed, rows)


def cmd_bench(args) -> int:
    report = run_bench(args.n, args.k, args.d, args.trials, args.seed, bool(args.directed), args.model)
    out = _Out(args.format, "bench")
    if args.format == "records":
        for row in report.rows:
            out.record({"type": "row", **asdict(row)})
    else:
        print(report.text())
        ratios = report.ratios()
        if ratios:
            print("per-doubling time ratios: " + " ".join(f"{x:.2f}" for x in ratios))
    return EXIT_FOUND


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, *, k_required: bool = True) -> None:
    k_env = _env_int("K", None)
    p.add_argument("--k", type=int, default=k_env, required=k_required and k_env is None,
                   help="cycle size (env KCYCLE_K)")
    p.add_argument("--seed", type=int, default=_env_int("SEED", 0), help="root seed (env KCYCLE_SEED)")
    p.add_argument("--format", choices=("text", "records"), default=_env("FORMAT", "text"),
                   help="output format (env KCYCLE_FORMAT)")


def _directed_flag(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--directed", dest="directed", action="store_true", default=_env_bool("DIRECTED"),
                   help="treat input as directed (env KCYCLE_DIRECTED)")
    g.add_argument("--undirected", dest="directed", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcycle", description="Find k-cycles in bounded-degeneracy graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find", help="randomized k-cycle search")
    p.add_argument("path", help="edge-list file")
    _common(p)
    _directed_flag(p)
    p.add_argument("--trials", type=int, default=_env_int("TRIALS", None),
                   help="trial budget, default 1000*2^k (env KCYCLE_TRIALS)")
    p.add_argument("--trace-dir", default=_env("TRACE_DIR"), help="write stage trace and coin log here")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("schedule", help="print the cycle-size schedule for k")
    p.add_argument("k", type=int, nargs="?", default=_env_int("K", None))
    p.add_argument("--format", choices=("text", "records"), default=_env("FORMAT", "text"))
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("oracle", help="exact search on small graphs")
    p.add_argument("path")
    _common(p)
    _directed_flag(p)
    p.add_argument("--max-n", type=int, default=None, help="raise the oracle's size guard")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="per-trial timing across graph sizes")
    _common(p, k_required=False)
    _directed_flag(p)
    p.add_argument("--n", type=int, nargs="+", default=[10_000, 20_000, 40_000, 80_000])
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--trials", type=int, default=_env_int("TRIALS", 100))
    p.add_argument("--model", choices=MODELS, default="degenerate-random")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a generated instance as an edge list")
    _common(p, k_required=False)
    _directed_flag(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--model", choices=MODELS, default="degenerate-random")
    p.add_argument("--planted-k", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--witness", default=None, help="sidecar file for the planted cycle")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"kcycle: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_FOUND
    if args.command == "bench" and args.k is None:
        args.k = 8
    if args.command == "schedule" and args.k is None:
        print("kcycle: schedule needs k", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (GraphError, OracleGuardError, UsageError, OSError, ValueError) as exc:
        print(f"kcycle: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
