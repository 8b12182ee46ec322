"""Static simple graphs, degeneracy machinery and cycle witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K


class GraphError(ValueError):
    """Invalid graph input (bad endpoint, self-loop, malformed edge list)."""


@dataclass(frozen=True, eq=False)
class Graph:
    """A finite simple graph on vertices ``0..n-1``.

    Edges live in canonical int64 arrays (see :mod:`kcycle._kernels`).
    ``labels`` are the stable external identifiers; a vertex produced by
    contraction carries the smallest label of the set it replaced, and
    indices are always sorted by label.
    """

    n: int
    directed: bool
    src: np.ndarray
    dst: np.ndarray
    labels: np.ndarray

    @classmethod
    def _from_canonical(cls, n, directed, src, dst, labels=None) -> Graph:
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        return cls(int(n), bool(directed), src, dst, labels)

    @property
    def m(self) -> int:
        return int(self.src.shape[0])

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    @cached_property
    def _und(self):
        return K.und_adj(self.n, self.src, self.dst, self.directed)

    @cached_property
    def _out(self):
        if not self.directed:
            return self._und
        return K.out_csr(self.n, self.src, self.dst)

    @cached_property
    def _in(self):
        if not self.directed:
            return self._und
        return K.in_csr(self.n, self.src, self.dst)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbours in the underlying undirected graph."""
        ptr, idx = self._und
        return idx[ptr[v]:ptr[v + 1]]

    def out_neighbors(self, v: int) -> np.ndarray:
        ptr, idx = self._out
        return idx[ptr[v]:ptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        ptr, idx = self._in
        return idx[ptr[v]:ptr[v + 1]]

    def degree(self, v: int) -> int:
        ptr, _ = self._und
        return int(ptr[v + 1] - ptr[v])

    def has_edge(self, u: int, v: int) -> bool:
        """Arc ``u -> v`` if directed, edge ``{u, v}`` otherwise."""
        if not (0 <= u < self.n and 0 <= v < self.n):
            return False
        ptr, idx = self._out
        return bool(K.has_arc(ptr, idx, u, v))

    def is_subgraph_of(self, other: Graph) -> bool:
        """Same vertex set, edge set contained in ``other``'s."""
        if self.n != other.n or self.directed != other.directed:
            return False
        ptr, idx = other._out
        return all(K.has_arc(ptr, idx, u, v) for u, v in zip(self.src, self.dst))

    def underlying_undirected(self) -> Graph:
        return underlying_undirected(self)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def build_graph(n: int, edges: Iterable[Sequence[int]], directed: bool = False) -> Graph:
    """Build a simple graph; parallel edges collapse, self-loops are rejected."""
    if n < 0:
        raise GraphError(f"negative vertex count {n}")
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        if pairs.min() < 0 or pairs.max() >= n:
            bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
            raise GraphError(f"edge {tuple(bad.tolist())} has an endpoint outside [0, {n})")
        loops = pairs[:, 0] == pairs[:, 1]
        if loops.any():
            raise GraphError(f"self-loop at vertex {int(pairs[loops][0, 0])}")
    src, dst = K.canon_edges(n, pairs[:, 0].copy(), pairs[:, 1].copy(), bool(directed))
    return Graph._from_canonical(n, directed, src, dst)


def underlying_undirected(G: Graph) -> Graph:
    if not G.directed:
        return G
    src, dst = K.canon_edges(G.n, G.src, G.dst, False)
    return Graph._from_canonical(G.n, False, src, dst, G.labels)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def parse_edge_list(text: str, directed: bool | None = None) -> Graph:
    """Parse ``n m directed`` followed by ``m`` lines ``u v``.

    Blank lines and ``#`` comments are ignored.  ``directed`` overrides the
    header flag when given.
    """
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise GraphError("empty edge list")
    header = rows[0]
    if len(header) != 3:
        raise GraphError(f"header must be 'n m directed', got {' '.join(header)!r}")
    try:
        n, m, flag = (int(x) for x in header)
    except ValueError as exc:
        raise GraphError(f"non-integer header {' '.join(header)!r}") from exc
    if n < 0 or m < 0 or flag not in (0, 1):
        raise GraphError(f"bad header values {' '.join(header)!r}")
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header promises {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 2:
            raise GraphError(f"edge line must have two endpoints, got {' '.join(row)!r}")
        try:
            edges.append((int(row[0]), int(row[1])))
        except ValueError as exc:
            raise GraphError(f"non-integer edge {' '.join(row)!r}") from exc
    return build_graph(n, edges, bool(flag) if directed is None else directed)


def read_edge_list(path: str | Path, directed: bool | None = None) -> Graph:
    return parse_edge_list(Path(path).read_text(), directed)


def format_edge_list(G: Graph) -> str:
    lines = [f"{G.n} {G.m} {int(G.directed)}"]
    lines.extend(f"{u} {v}" for u, v in G.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(G: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(G))


# ---------------------------------------------------------------------------
# degeneracy ordering and labeling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DegeneracyOrdering:
    """Vertex order with every vertex having at most ``d`` later neighbours."""

    order: np.ndarray
    pos: np.ndarray
    d: int
    ptr: np.ndarray
    idx: np.ndarray

    def later_neighbors(self, v: int) -> list[int]:
        nb = self.idx[self.ptr[v]:self.ptr[v + 1]]
        return [int(u) for u in nb if self.pos[u] > self.pos[v]]

    @property
    def pi(self) -> np.ndarray:
        return self.pos

    def is_valid(self) -> bool:
        n = self.order.shape[0]
        if sorted(self.order.tolist()) != list(range(n)):
            return False
        if any(self.pos[self.order[i]] != i for i in range(n)):
            return False
        return all(len(self.later_neighbors(v)) <= self.d for v in range(n))


def degeneracy_ordering(G: Graph) -> DegeneracyOrdering:
    ptr, idx = G._und
    order, pos, d = K.degeneracy(G.n, ptr, idx)
    return DegeneracyOrdering(order, pos, int(d), ptr, idx)


def degeneracy(G: Graph) -> int:
    return degeneracy_ordering(G).d


@dataclass(frozen=True, eq=False)
class EdgeLabeling:
    """Labels in ``1..d`` on each edge ``(v, u)`` with ``pi(v) < pi(u)``.

    ``lab`` is aligned with the ordering's adjacency arrays; entries that
    point to earlier neighbours hold 0.
    """

    ordering: DegeneracyOrdering
    lab: np.ndarray

    @property
    def d(self) -> int:
        return self.ordering.d

    def label(self, v: int, u: int) -> int:
        o = self.ordering
        for e in range(o.ptr[v], o.ptr[v + 1]):
            if o.idx[e] == u:
                if o.pos[u] < o.pos[v]:
                    raise KeyError(f"{u} precedes {v} in the ordering")
                return int(self.lab[e])
        raise KeyError(f"no edge between {v} and {u}")

    def items(self):
        o = self.ordering
        for v in range(o.ptr.shape[0] - 1):
            for e in range(o.ptr[v], o.ptr[v + 1]):
                if self.lab[e]:
                    yield (v, int(o.idx[e])), int(self.lab[e])

    def is_valid(self) -> bool:
        o = self.ordering
        for v in range(o.ptr.shape[0] - 1):
            seen = [int(self.lab[e]) for e in range(o.ptr[v], o.ptr[v + 1]) if o.pos[o.idx[e]] > o.pos[v]]
            if len(set(seen)) != len(seen) or any(not 1 <= x <= max(o.d, 1) for x in seen):
                return False
        return True


def random_degenerate_labeling(G: Graph, ordering: DegeneracyOrdering, seed: int = 0,
                               stage: int = 0) -> EdgeLabeling:
    """Label each vertex's later edges by a uniformly random permutation.

    The later neighbours of ``v`` receive labels ``1..|later(v)|`` in a random
    order, independently per vertex, so a fixed later edge of ``v`` gets
    label 1 with probability ``1/|later(v)| >= 1/d``.
    """
    keys = K.hash_label_keys(ordering.ptr, ordering.idx, ordering.pos, G.labels,
                             np.uint64(seed & K.MASK64), stage)
    return EdgeLabeling(ordering, K.labels_from_keys(ordering.ptr, ordering.idx, ordering.pos, keys))


# ---------------------------------------------------------------------------
# colourings and cycles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VertexColoring:
    q: int
    colors: np.ndarray

    def __post_init__(self):
        if self.colors.size and (self.colors.min() < 0 or self.colors.max() >= self.q):
            raise ValueError(f"colour outside Z_{self.q}")

    def __getitem__(self, v: int) -> int:
        return int(self.colors[v])

    def __len__(self) -> int:
        return int(self.colors.shape[0])


@dataclass(frozen=True)
class CyclePath:
    """An ordered cycle witness ``(v_0, ..., v_{k-1})``."""

    vertices: tuple[int, ...]
    directed: bool = False

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def canonical(self) -> CyclePath:
        """Rotate to the smallest vertex; undirected cycles take the smaller direction."""
        vs = list(self.vertices)
        if not vs:
            return self
        i = vs.index(min(vs))
        vs = vs[i:] + vs[:i]
        if not self.directed and len(vs) > 2 and vs[-1] < vs[1]:
            vs = [vs[0]] + vs[:0:-1]
        return CyclePath(tuple(vs), self.directed)

    def relabel(self, labels: np.ndarray) -> CyclePath:
        return CyclePath(tuple(int(labels[v]) for v in self.vertices), self.directed)


def _vertices(path) -> list[int]:
    if isinstance(path, CyclePath):
        return list(path.vertices)
    return [int(v) for v in path]


def verify_cycle(G: Graph, path, k: int) -> bool:
    vs = _vertices(path)
    if len(vs) != k or k < 3 or len(set(vs)) != k:
        return False
    if any(not 0 <= v < G.n for v in vs):
        return False
    return all(G.has_edge(vs[i], vs[(i + 1) % k]) for i in range(k))


def hr_cyclic_colors(t: int, h: int, r: int) -> list[int]:
    """The colour sequence of an ``(h, r)``-cyclic ``t``-cycle."""
    _check_type(t, h, r)
    seq = [i % h for i in range(t - r)]
    seq.extend(h + r - i for i in range(r, 0, -1))
    return seq


def _check_type(t: int, h: int, r: int) -> None:
    if h < 3 or not 0 <= r < h:
        raise ValueError(f"invalid type ({h},{r})")
    if t % h != r:
        raise ValueError(f"cycle size {t} is not {r} mod {h}")


def verify_hr_cyclic(c, path, h: int, r: int) -> bool:
    """Whether the colouring is ``(h, r)``-cyclic along ``path`` as anchored."""
    vs = _vertices(path)
    _check_type(len(vs), h, r)
    expected = hr_cyclic_colors(len(vs), h, r)
    return all(int(c[v]) == x for v, x in zip(vs, expected))


def anchor_hr_cyclic(c, path, h: int, r: int, directed: bool) -> list[int] | None:
    """Find a rotation (and reflection if undirected) that is ``(h, r)``-cyclic."""
    vs = _vertices(path)
    _check_type(len(vs), h, r)
    candidates = [vs] if directed else [vs, vs[::-1]]
    for seq in candidates:
        for i in range(len(seq)):
            rot = seq[i:] + seq[:i]
            if verify_hr_cyclic(c, rot, h, r):
                return rot
    return None


def find_cyclic_triangle(G: Graph, c) -> CyclePath | None:
    """A triangle coloured 0, 1, 2 (directed: oriented 0 -> 1 -> 2 -> 0)."""
    colors = np.asarray(c.colors if isinstance(c, VertexColoring) else c, dtype=np.int64)
    a, b, x = K.find_triangle(G.n, G.src, G.dst, colors, G.directed, True)
    if a < 0:
        return None
    return CyclePath((int(a), int(b), int(x)), G.directed)


def find_triangle(G: Graph) -> CyclePath | None:
    """Any triangle (directed: any directed 3-cycle)."""
    dummy = np.zeros(G.n, dtype=np.int64)
    a, b, x = K.find_triangle(G.n, G.src, G.dst, dummy, G.directed, False)
    if a < 0:
        return None
    return CyclePath((int(a), int(b), int(x)), G.directed)

