"""Seeded instance generators: degenerate random graphs, grids, planted cycles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import CyclePath, Graph, build_graph

MODELS = ("degenerate-random", "grid", "cycle-plus-noise")

# sub-stream tags so that planting never shifts the base graph's draws
_BASE, _PLANT, _ORIENT = 1, 2, 3


@dataclass(frozen=True)
class GenSpec:
    n: int
    d_target: int = 3
    model: str = "degenerate-random"
    directed: bool = False
    planted_k: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.d_target < 1:
            raise ValueError("d_target must be at least 1")
        if self.planted_k is not None and not 3 <= self.planted_k <= self.n:
            raise ValueError(f"planted_k must lie in [3, n], got {self.planted_k}")


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed & (2**63 - 1), tag])


def _earlier_picks(n: int, d: int, rng: np.random.Generator, exact: bool) -> tuple[np.ndarray, np.ndarray]:
    """Edges from each vertex (in a random order) to at most ``d`` earlier ones."""
    order = rng.permutation(n)
    pos = np.arange(n)
    draws = rng.random((n, d))
    if exact:
        counts = np.minimum(pos, d)
    else:
        counts = np.minimum(pos, rng.integers(0, d + 1, size=n))
    picks = np.floor(draws * pos[:, None]).astype(np.int64)
    mask = np.arange(d)[None, :] < counts[:, None]
    later = np.repeat(pos, d).reshape(n, d)[mask]
    earlier = picks[mask]
    return order[later], order[earlier]


def _orient(a: np.ndarray, b: np.ndarray, directed: bool, seed: int):
    if not directed:
        return a, b
    flip = _rng(seed, _ORIENT).random(a.shape[0]) < 0.5
    return np.where(flip, b, a), np.where(flip, a, b)


def gen_degenerate(spec: GenSpec) -> Graph:
    """Each vertex, in a random order, joins up to ``d_target`` random earlier vertices.

    Picks are drawn with replacement and collapsed, so a vertex gets at most
    ``d_target`` earlier neighbours and the degeneracy is at most ``d_target``.
    """
    a, b = _earlier_picks(spec.n, spec.d_target, _rng(spec.seed, _BASE), exact=True)
    a, b = _orient(a, b, spec.directed, spec.seed)
    return build_graph(spec.n, np.stack([a, b], axis=1), spec.directed)


def gen_noise(spec: GenSpec) -> Graph:
    """Sparser variant: each vertex picks a uniform number in ``0..d_target``."""
    a, b = _earlier_picks(spec.n, spec.d_target, _rng(spec.seed, _BASE), exact=False)
    a, b = _orient(a, b, spec.directed, spec.seed)
    return build_graph(spec.n, np.stack([a, b], axis=1), spec.directed)


def gen_grid(rows: int, cols: int, directed: bool = False) -> Graph:
    """``rows x cols`` grid; vertex ``(i, j)`` is ``i * cols + j``.  Directed arcs point right and down."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs rows, cols >= 1")
    ids = np.arange(rows * cols).reshape(rows, cols)
    right = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    down = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    return build_graph(rows * cols, np.concatenate([right, down]), directed)


def plant_cycle(G: Graph, k: int, seed: int = 0) -> tuple[Graph, CyclePath]:
    """Add a ``k``-cycle through ``k`` random vertices in random cyclic order."""
    if not 3 <= k <= G.n:
        raise ValueError(f"cannot plant a {k}-cycle in a graph on {G.n} vertices")
    vs = _rng(seed, _PLANT).choice(G.n, size=k, replace=False)
    extra = np.stack([vs, np.roll(vs, -1)], axis=1)
    edges = np.concatenate([np.stack([G.src, G.dst], axis=1), extra])
    H = build_graph(G.n, edges, G.directed)
    return H, CyclePath(tuple(int(v) for v in vs), G.directed)


def generate(spec: GenSpec) -> tuple[Graph, CyclePath | None]:
    """Build the instance described by ``spec``; the witness is ``None`` if nothing was planted.

    The grid model lays ``n`` out as ``isqrt(n)`` rows of ``n // isqrt(n)``.
    """
    if spec.model == "grid":
        rows = max(1, math.isqrt(spec.n))
        G = gen_grid(rows, max(1, spec.n // rows), spec.directed)
    elif spec.model == "cycle-plus-noise":
        G = gen_noise(spec)
    else:
        G = gen_degenerate(spec)
    if spec.planted_k is None:
        return G, None
    return plant_cycle(G, spec.planted_k, spec.seed)
