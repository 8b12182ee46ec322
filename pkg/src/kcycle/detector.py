"""Amplified k-cycle search, the guided-coins harness, and exact oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .coins import CoinLog, HashCoins, RecordingCoins
from .graph import (
    CyclePath,
    Graph,
    anchor_hr_cyclic,
    find_triangle,
    hr_cyclic_colors,
    verify_cycle,
)
from .pipeline import (
    MinorSequence,
    plan_arrays,
    produce_minor_sequence,
    retrace_cycle,
    stage_plans,
)
from .schedule import build_schedule

ORACLE_MAX_N = 32


class OracleGuardError(ValueError):
    """The exact oracle refuses a graph larger than its guard."""


class GuidedRunError(AssertionError):
    """Guided coins failed to carry the planted cycle to the last stage."""


def default_trials(k: int) -> int:
    return 1000 * 2 ** k


@dataclass(frozen=True)
class SearchConfig:
    trials: int | None = None
    seed: int = 0
    record_traces: bool = False
    trace_dir: str | Path | None = None

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")

    def budget(self, k: int) -> int:
        return default_trials(k) if self.trials is None else int(self.trials)


@dataclass
class SearchResult:
    cycle: CyclePath | None
    trials_run: int
    success_trial: int | None = None
    sequence: MinorSequence | None = field(default=None, repr=False)

    @property
    def found(self) -> bool:
        return self.cycle is not None


def _check_k(k: int) -> None:
    if k < 3:
        raise ValueError(f"k must be at least 3, got {k}")


def _finish(G: Graph, k: int, path: CyclePath) -> CyclePath:
    if not verify_cycle(G, path, k):
        raise AssertionError(f"witness {path.vertices} is not a {k}-cycle")
    return path.canonical()


def search_k_cycle(G: Graph, k: int, cfg: SearchConfig | None = None) -> SearchResult:
    """Run trials ``0, 1, ...`` until one yields a coloured triangle; retrace it.

    Trial ``i`` draws all its coins from ``trial_seed(seed, i)``, so the
    winning trial and its witness are fixed by the seed alone.
    """
    cfg = cfg or SearchConfig()
    _check_k(k)
    if k > G.n or G.m < k:
        return SearchResult(None, 0)
    if k == 3:
        tri = find_triangle(G)
        return SearchResult(None if tri is None else _finish(G, 3, tri), 1, 0 if tri else None)
    budget = cfg.budget(k)
    plans = stage_plans(build_schedule(k), G.directed)
    arrays = plan_arrays(plans)
    root = np.uint64(cfg.seed & K.MASK64)
    hit = int(K.search(G.n, G.src, G.dst, G.labels, G.directed, root, 0, budget, 4 + k % 4, *arrays))
    if hit < 0:
        return SearchResult(None, budget)
    seed = int(K.trial_seed(root, hit))
    ms = produce_minor_sequence(G, k, HashCoins(seed), log_coins=cfg.record_traces)
    tri = ms.final_triangle()
    if tri is None:
        raise AssertionError(f"trial {hit} succeeded in the fast loop but not when recorded")
    path = _finish(G, k, retrace_cycle(ms, tri))
    if cfg.record_traces and cfg.trace_dir is not None:
        ms.write_trace(cfg.trace_dir, f"k{k}-seed{cfg.seed}-trial{hit}")
    return SearchResult(path, hit + 1, hit, ms)


def find_k_cycle(G: Graph, k: int, cfg: SearchConfig | None = None) -> CyclePath | None:
    return search_k_cycle(G, k, cfg).cycle


# ---------------------------------------------------------------------------
# guided coins
# ---------------------------------------------------------------------------

class GuidedCoins(HashCoins):
    """Hash coins, overridden on one cycle so that it survives every stage.

    The cycle is followed through each contraction via ``observe`` and kept
    anchored so that its colouring matches the current stage's type.
    """

    def __init__(self, planted: CyclePath, k: int, seed: int = 0):
        super().__init__(seed)
        self.k = k
        self.directed = planted.directed
        self.cycle = list(planted.vertices)
        self._pos = None
        self._colors = None

    def initial_colors(self, labels, q):
        colors = super().initial_colors(labels, q).copy()
        for v, c in zip(self.cycle, hr_cyclic_colors(self.k, 4, self.k % 4)):
            colors[v] = c
        self._colors = colors
        return colors

    def _pairs(self, colors, j):
        p = len(self.cycle)
        return [(self.cycle[w - 1], self.cycle[w]) for w in range(p)
                if colors[self.cycle[w]] == j and colors[self.cycle[w - 1]] == j - 1]

    def label_keys(self, plan, ptr, idx, pos, labels):
        keys = super().label_keys(plan, ptr, idx, pos, labels)
        self._pos = pos
        if plan.refine:
            return keys
        colors = self._colors
        for x, y in self._pairs(colors, plan.j):
            a, b = (x, y) if pos[x] < pos[y] else (y, x)
            for e in range(ptr[a], ptr[a + 1]):
                if pos[idx[e]] > pos[a]:
                    keys[e] = np.uint64(0) if idx[e] == b else (keys[e] >> np.uint64(1)) + np.uint64(1)
        return keys

    def winners(self, plan, labels, colors):
        win = super().winners(plan, labels, colors).copy()
        for x, y in self._pairs(colors, plan.j):
            a, b = (x, y) if self._pos[x] < self._pos[y] else (y, x)
            win[a], win[b] = 1, 0
        return win

    def refinement(self, plan, labels, colors):
        choice = super().refinement(plan, labels, colors).copy()
        target = hr_cyclic_colors(plan.t, 6, plan.t % 6)
        for v, c in zip(self.cycle, target):
            if colors[v] < 3:
                choice[v] = (c - colors[v]) // 3
        return choice

    def observe(self, plan, vmap, colors):
        nxt: list[int] = []
        for v in self.cycle:
            u = int(vmap[v])
            if not nxt or nxt[-1] != u:
                nxt.append(u)
        while len(nxt) > 1 and nxt[0] == nxt[-1]:
            nxt.pop()
        el = build_schedule(self.k).elements[plan.index]
        anchored = None
        if len(nxt) == el.t:
            anchored = anchor_hr_cyclic(colors, nxt, el.h, el.r, self.directed)
        if anchored is None:
            raise GuidedRunError(f"planted cycle lost after stage {plan.index}")
        self.cycle = anchored
        self._colors = colors


def guided_coins_log(G: Graph, k: int, planted: CyclePath, seed: int = 0) -> CoinLog:
    """A coin log under which ``planted`` survives to a coloured triangle."""
    if not verify_cycle(G, planted, k):
        raise ValueError("planted cycle is not a k-cycle of G")
    source = RecordingCoins(GuidedCoins(CyclePath(tuple(planted.vertices), G.directed), k, seed), k)
    produce_minor_sequence(G, k, source)
    return source.log


def guided_coins_run(G: Graph, k: int, planted: CyclePath, seed: int = 0) -> CyclePath:
    """Replay a guided coin log and retrace the resulting triangle."""
    if k == 3:
        tri = find_triangle(G)
        if tri is None:
            raise GuidedRunError("no triangle although one was planted")
        return _finish(G, 3, tri)
    log = guided_coins_log(G, k, planted, seed)
    ms = produce_minor_sequence(G, k, log)
    tri = ms.final_triangle()
    if tri is None:
        raise GuidedRunError("no coloured triangle in the last graph of a guided run")
    return _finish(G, k, retrace_cycle(ms, tri))


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def _guard(G: Graph, max_n: int | None) -> None:
    limit = ORACLE_MAX_N if max_n is None else max_n
    if G.n > limit:
        raise OracleGuardError(f"exact search refuses n={G.n} > {limit}")


def brute_force_k_cycle(G: Graph, k: int, max_n: int | None = None) -> CyclePath | None:
    """Exact search: DFS from each start over larger vertices only.

    Every cycle is found from its smallest vertex, so the first witness in
    DFS order is already rotated to the minimum.
    """
    _check_k(k)
    _guard(G, max_n)
    if k > G.n:
        return None
    out_nb = [G.out_neighbors(v).tolist() for v in range(G.n)]
    for s in range(G.n):
        path = [s]
        on = {s}

        def dfs(v: int) -> bool:
            if len(path) == k:
                return G.has_edge(v, s)
            for u in out_nb[v]:
                if u > s and u not in on:
                    # undirected cycles are found twice; keep the smaller direction
                    if not G.directed and len(path) == k - 1 and u < path[1]:
                        continue
                    path.append(u)
                    on.add(u)
                    if dfs(u):
                        return True
                    path.pop()
                    on.discard(u)
            return False

        if dfs(s):
            return CyclePath(tuple(path), G.directed)
    return None


def find_hr_cyclic_cycle(G: Graph, colors, t: int, h: int, r: int) -> list[int] | None:
    """Exact search for a ``t``-cycle whose colours follow the ``(h, r)``-cyclic pattern."""
    pattern = hr_cyclic_colors(t, h, r)
    colors = np.asarray(colors)
    out_nb = [G.out_neighbors(v).tolist() for v in range(G.n)]
    for s in np.flatnonzero(colors == pattern[0]).tolist():
        path = [s]
        on = {s}

        def dfs(v: int) -> bool:
            if len(path) == t:
                return G.has_edge(v, s)
            want = pattern[len(path)]
            for u in out_nb[v]:
                if colors[u] == want and u not in on:
                    path.append(u)
                    on.add(u)
                    if dfs(u):
                        return True
                    path.pop()
                    on.discard(u)
            return False

        if dfs(s):
            return path
    return None


def color_coding_baseline(G: Graph, k: int, trials: int = 1000, rng=0) -> CyclePath | None:
    """Random ``k``-colourings plus a colourful-path subset DP.

    ``rng`` is a seed or a :class:`numpy.random.Generator`.
    """
    _check_k(k)
    if k > G.n:
        return None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    optr, oidx = G._out
    for _ in range(trials):
        colors = gen.integers(0, k, size=G.n, dtype=np.int64)
        s, e = K.colorful_cycle(G.n, optr, oidx, colors, k)
        if s >= 0:
            path = _colorful_path(G, colors, k, int(s), int(e))
            return _finish(G, k, CyclePath(tuple(path), G.directed))
    return None


def _colorful_path(G: Graph, colors: np.ndarray, k: int, s: int, e: int) -> list[int]:
    """Recover a colourful path ``s .. e`` on ``k`` vertices by DFS."""
    path = [s]

    def dfs(v: int, used: int) -> bool:
        if len(path) == k:
            return v == e
        for u in G.out_neighbors(v).tolist():
            bit = 1 << int(colors[u])
            if used & bit:
                continue
            if (len(path) == k - 1) != (u == e):
                continue
            path.append(u)
            if dfs(u, used | bit):
                return True
            path.pop()
        return False

    if not dfs(s, 1 << int(colors[s])):
        raise AssertionError("colourful DP reported a path that DFS cannot find")
    return path
