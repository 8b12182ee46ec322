"""One run of the colored-minor construction, with full provenance and retrace.

Each stage turns ``(G_i, c_i)`` into ``(G_{i+1}, c_{i+1})`` either by colour
refinement (graph unchanged) or by cleaning, degenerate labeling, a
winner/loser split, winner/loser cleanup and star contraction.  Every stage
is kept as a :class:`StageRecord` so that a coloured triangle in the last
graph can be lifted back to a ``k``-cycle of the input.

The step kernels are the same compiled functions that the batched search
loop uses, so a recorded run is bit-identical to a fast trial with the same
coins.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels as K
from .coins import CoinLog, CoinSource, RecordingCoins, coin_source
from .graph import (
    CyclePath,
    DegeneracyOrdering,
    EdgeLabeling,
    Graph,
    VertexColoring,
    anchor_hr_cyclic,
    find_cyclic_triangle,
)
from .schedule import Schedule, ScheduleElement, build_schedule

TRACE_HEADER = "# kcycle-trace v1"


class RetraceError(AssertionError):
    """A lifted cycle broke an invariant; this is a pipeline bug."""


class ContractionError(RuntimeError):
    """The winner/loser subgraph handed to contraction is not a star forest."""


# ---------------------------------------------------------------------------
# stage plans
# ---------------------------------------------------------------------------

def _neighbour_rules(h: int, r: int) -> list[tuple[set[int], set[int]]]:
    """Per colour: colours allowed as out-neighbour and as in-neighbour."""
    top = h + r - 1
    rules = []
    for j in range(h + r):
        if 1 <= j <= h - 2 or h <= j <= h + r - 2:
            rules.append(({j + 1}, {j - 1}))
        elif j == 0:
            rules.append(({1}, {h - 1, top}))
        elif j == h - 1:
            rules.append(({0, h}, {h - 2}))
        else:
            rules.append(({0}, {top - 1}))
    return rules


def cleaning_table(h: int, r: int, directed: bool) -> np.ndarray:
    """``table[a, b]``: whether an edge (arc ``a -> b``) between colours survives."""
    rules = _neighbour_rules(h, r)
    table = np.zeros((K.PALETTE_MAX, K.PALETTE_MAX), dtype=np.bool_)
    q = h + r
    for a in range(q):
        for b in range(q):
            if directed:
                ok = b in rules[a][0] and a in rules[b][1]
            else:
                ok = b in (rules[a][0] | rules[a][1]) and a in (rules[b][0] | rules[b][1])
            table[a, b] = ok
    return table


def is_refinement(t: int, h: int, r: int) -> bool:
    return t > 4 and h == 3 and r in (0, 1)


def buffer_target_color(t: int, h: int, r: int) -> tuple[int, int]:
    """``(j, j - 1)``: contraction target colour and buffer colour."""
    if is_refinement(t, h, r):
        raise ValueError(f"stage {t} ({h},{r}) refines colours and has no target colour")
    if t == 4 and (h, r) == (3, 1):
        j = 3
    elif r >= 2:
        j = h + r - 1
    else:
        j = h - 1
    return j, j - 1


@dataclass(frozen=True, eq=False)
class StagePlan:
    """Everything about stage ``index`` that does not depend on the graph."""

    index: int
    t: int
    h: int
    r: int
    refine: bool
    j: int
    nopt: int
    c3: int
    table: np.ndarray

    @classmethod
    def make(cls, index: int, t: int, h: int, r: int, directed: bool) -> StagePlan:
        if is_refinement(t, h, r):
            nopt = 2 if t % 6 in (0, 1) else 3
            c3 = 6 if t % 6 == 1 else 9
            return cls(index, t, h, r, True, -1, nopt, c3, cleaning_table(h, r, directed))
        j, _ = buffer_target_color(t, h, r)
        # a 4-cycle coloured 0123 is both (3,1)- and (4,0)-cyclic; only the
        # (4,0) rules keep colour 2 away from colour 0, which the lift needs
        ch, cr = (4, 0) if (t, h, r) == (4, 3, 1) else (h, r)
        return cls(index, t, h, r, False, j, 0, 0, cleaning_table(ch, cr, directed))

    @property
    def buffer(self) -> int:
        return self.j - 1


def stage_plans(schedule: Schedule, directed: bool) -> list[StagePlan]:
    return [StagePlan.make(e.index, e.t, e.h, e.r, directed) for e in schedule.elements[:-1]]


def plan_arrays(plans: list[StagePlan]):
    """Column arrays consumed by the compiled search loop."""
    p_t = np.array([p.t for p in plans], dtype=np.int64)
    p_h = np.array([p.h for p in plans], dtype=np.int64)
    p_r = np.array([p.r for p in plans], dtype=np.int64)
    p_act = np.array([K.ACT_REFINE if p.refine else K.ACT_CONTRACT for p in plans], dtype=np.int64)
    p_j = np.array([p.j for p in plans], dtype=np.int64)
    p_c3 = np.array([p.c3 for p in plans], dtype=np.int64)
    tables = np.stack([p.table for p in plans]) if plans else np.zeros((0, K.PALETTE_MAX, K.PALETTE_MAX), np.bool_)
    return p_t, p_h, p_r, p_act, p_j, p_c3, tables


# ---------------------------------------------------------------------------
# individual steps
# ---------------------------------------------------------------------------

def _colors(c) -> np.ndarray:
    return np.asarray(c.colors if isinstance(c, VertexColoring) else c, dtype=np.int64)


def _subgraph(G: Graph, keep: np.ndarray) -> Graph:
    return Graph._from_canonical(G.n, G.directed, G.src[keep], G.dst[keep], G.labels)


def initial_coloring(G: Graph, k: int, rng=0) -> VertexColoring:
    """Uniform colours from ``Z_{4 + k mod 4}``."""
    if k < 4:
        raise ValueError(f"k must be at least 4, got {k}")
    q = 4 + k % 4
    return VertexColoring(q, coin_source(rng).initial_colors(G.labels, q))


def cleaning_step(G: Graph, c, h: int, r: int, t: int | None = None) -> Graph:
    """Drop every edge whose colours cannot be consecutive on an ``(h, r)``-cyclic cycle."""
    if t == 4 and (h, r) == (3, 1):
        h, r = 4, 0
    colors = _colors(c)
    return _subgraph(G, K.clean_mask(G.src, G.dst, colors, cleaning_table(h, r, G.directed)))


def _win_array(n: int, W, L) -> np.ndarray:
    win = np.full(n, -1, dtype=np.int8)
    win[np.fromiter(W, dtype=np.int64, count=len(W))] = 1
    win[np.fromiter(L, dtype=np.int64, count=len(L))] = 0
    return win


def winner_loser_step(Gp: Graph, c, j: int, rng=0, stage: int = 0) -> tuple[frozenset[int], frozenset[int]]:
    """Fair-coin split of the vertices coloured ``j - 1`` or ``j``."""
    if j < 1:
        raise ValueError(f"target colour must be at least 1, got {j}")
    plan = _AdHocPlan(stage, j)
    win = coin_source(rng).winners(plan, Gp.labels, _colors(c))
    return frozenset(np.flatnonzero(win == 1).tolist()), frozenset(np.flatnonzero(win == 0).tolist())


@dataclass(frozen=True)
class _AdHocPlan:
    index: int
    j: int = -1
    nopt: int = 2


def _first_from_labeling(labeling: EdgeLabeling) -> np.ndarray:
    o = labeling.ordering
    n = o.ptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(o.ptr))
    first = np.full(n, -1, dtype=np.int64)
    ones = labeling.lab == 1
    first[rows[ones]] = o.idx[ones]
    return first


def winner_loser_cleanup(Gp: Graph, W, L, ordering: DegeneracyOrdering, labeling: EdgeLabeling) -> Graph:
    """Inside ``W | L`` keep only winner-to-loser edges with label 1 leaving the earlier winner."""
    win = _win_array(Gp.n, W, L)
    first = _first_from_labeling(labeling)
    return _subgraph(Gp, K.cleanup_mask(Gp.src, Gp.dst, win, ordering.pos, first))


@dataclass(frozen=True)
class StarContraction:
    """A star of ``G_i''[W | L]`` and the vertex it became."""

    unified: int
    loser: int | None
    winners: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def members(self) -> tuple[int, ...]:
        head = () if self.loser is None else (self.loser,)
        return head + self.winners


def _check_star_forest(G: Graph, win: np.ndarray) -> None:
    inside = (win[G.src] >= 0) & (win[G.dst] >= 0)
    a, b = G.src[inside], G.dst[inside]
    if np.any(win[a] == win[b]):
        raise ContractionError("an edge inside W | L joins two winners or two losers")
    w = np.where(win[a] == 1, a, b)
    loser = np.where(win[a] == 1, b, a)
    # antiparallel arcs to the same loser are one star edge
    w = np.unique(np.stack([w, loser], axis=1), axis=0)[:, 0] if w.size else w
    if w.size and np.bincount(w).max() > 1:
        raise ContractionError("a winner has more than one edge inside W | L")


def _stars(G: Graph, win: np.ndarray, vmap: np.ndarray) -> list[StarContraction]:
    inside = (win[G.src] >= 0) & (win[G.dst] >= 0)
    edges: dict[int, list[tuple[int, int]]] = {}
    for a, b in zip(G.src[inside].tolist(), G.dst[inside].tolist()):
        edges.setdefault(int(vmap[a]), []).append((a, b))
    groups: dict[int, list[int]] = {}
    for v in np.flatnonzero(win >= 0).tolist():
        groups.setdefault(int(vmap[v]), []).append(v)
    out = []
    for u, ms in sorted(groups.items()):
        losers = [v for v in ms if win[v] == 0]
        out.append(StarContraction(u, losers[0] if losers else None,
                                   tuple(v for v in ms if win[v] == 1), tuple(edges.get(u, ()))))
    return out


def contraction_step(Gpp: Graph, c, W, L, j: int, h: int, r: int):
    """Contract every star of ``Gpp[W | L]`` into one vertex of the buffer colour.

    Returns ``(G_next, c_next, stars)``.  When ``r == 1`` colour ``h`` is
    renamed to ``h - 1`` so the palette has no gap.
    """
    win = _win_array(Gpp.n, W, L)
    _check_star_forest(Gpp, win)
    colors = _colors(c)
    n2, vmap, s2, d2, c2, l2 = K.contract(Gpp.n, Gpp.src, Gpp.dst, colors, Gpp.labels,
                                          win, j - 1, h, r, Gpp.directed)
    G2 = Graph._from_canonical(n2, Gpp.directed, s2, d2, l2)
    return G2, VertexColoring(h + r - 1, c2), _stars(Gpp, win, vmap)


def color_refinement_step(c, h: int, r: int, t: int, rng=0, stage: int = 0) -> VertexColoring:
    """Spread colours 0, 1, 2 over 6 or 9 colours; the new palette is ``Z_{6 + t mod 6}``."""
    if not is_refinement(t, h, r) or (h, r, t % 6) not in {(3, 0, 0), (3, 0, 3), (3, 1, 1), (3, 1, 4)}:
        raise ValueError(f"no colour refinement for {t} ({h},{r})")
    plan = StagePlan.make(stage, t, h, r, False)
    colors = _colors(c)
    labels = np.arange(colors.shape[0], dtype=np.int64)
    choice = coin_source(rng).refinement(plan, labels, colors)
    return VertexColoring(6 + t % 6, K.refine(colors, choice, plan.c3))


# ---------------------------------------------------------------------------
# the recorded run
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StageRecord:
    """Stage ``i`` of a minor sequence.

    For a refinement stage ``cleaned_up`` and the winner/loser fields are
    ``None`` and ``vmap`` is the identity.  The last record only holds the
    final graph and colouring.
    """

    index: int
    element: ScheduleElement
    graph_in: Graph
    coloring: VertexColoring
    action: str
    cleaned: Graph | None = None
    ordering: DegeneracyOrdering | None = None
    labeling: EdgeLabeling | None = None
    target_color: int | None = None
    buffer_color: int | None = None
    win: np.ndarray | None = None
    cleaned_up: Graph | None = None
    vmap: np.ndarray | None = None
    recolor_gap_applied: bool = False

    @property
    def winners(self) -> frozenset[int]:
        return frozenset() if self.win is None else frozenset(np.flatnonzero(self.win == 1).tolist())

    @property
    def losers(self) -> frozenset[int]:
        return frozenset() if self.win is None else frozenset(np.flatnonzero(self.win == 0).tolist())

    @cached_property
    def contractions(self) -> list[StarContraction]:
        if self.action != "contract":
            return []
        return _stars(self.cleaned_up, self.win, self.vmap)

    @cached_property
    def members(self) -> list[list[int]]:
        """Vertices of ``graph_in`` merged into each vertex of the next graph."""
        if self.vmap is None:
            return []
        out: list[list[int]] = [[] for _ in range(int(self.vmap.max()) + 1 if self.vmap.size else 0)]
        for v, u in enumerate(self.vmap.tolist()):
            out[u].append(v)
        return out


@dataclass(eq=False)
class MinorSequence:
    k: int
    schedule: Schedule
    stages: list[StageRecord]
    coins: CoinLog | None = None

    @property
    def final_graph(self) -> Graph:
        return self.stages[-1].graph_in

    @property
    def final_coloring(self) -> VertexColoring:
        return self.stages[-1].coloring

    def final_triangle(self) -> CyclePath | None:
        return find_cyclic_triangle(self.final_graph, self.final_coloring)

    def trace_lines(self) -> list[str]:
        lines = [f"{TRACE_HEADER} k={self.k} directed={int(self.final_graph.directed)}"]
        for s in self.stages:
            e = s.element
            lines.append(f"stage {s.index} {e.t} {e.h} {e.r} {s.graph_in.n} {s.graph_in.m} {s.action}")
        return lines

    def write_trace(self, directory: str | Path, stem: str = "run") -> Path:
        """Write ``<stem>.trace`` and, when coins were logged, ``<stem>.coins.json``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"{stem}.trace"
        path.write_text("\n".join(self.trace_lines()) + "\n")
        if self.coins is not None:
            self.coins.save(d / f"{stem}.coins.json")
        return path


def produce_minor_sequence(G: Graph, k: int, coins=0, *, log_coins: bool = False) -> MinorSequence:
    """Build the whole sequence ``G_1 .. G_N`` for cycle size ``k``.

    ``coins`` is a seed, a :class:`CoinLog` to replay, or any
    :class:`CoinSource`.  With ``log_coins`` every decision is captured in
    ``MinorSequence.coins``.
    """
    schedule = build_schedule(k)
    plans = stage_plans(schedule, G.directed)
    source: CoinSource = coin_source(coins)
    recorder = None
    if log_coins:
        recorder = source = RecordingCoins(source, k)

    q = 4 + k % 4
    colors = np.asarray(source.initial_colors(G.labels, q), dtype=np.int64)
    graph = G
    stages: list[StageRecord] = []
    for plan in plans:
        el = schedule.elements[plan.index - 1]
        coloring = VertexColoring(plan.h + plan.r, colors)
        cleaned = _subgraph(graph, K.clean_mask(graph.src, graph.dst, colors, plan.table))
        ptr, idx = cleaned._und
        order, pos, d = K.degeneracy(graph.n, ptr, idx)
        ordering = DegeneracyOrdering(order, pos, int(d), ptr, idx)
        keys = np.asarray(source.label_keys(plan, ptr, idx, pos, graph.labels), dtype=np.uint64)
        labeling = EdgeLabeling(ordering, K.labels_from_keys(ptr, idx, pos, keys))
        if plan.refine:
            choice = np.asarray(source.refinement(plan, graph.labels, colors), dtype=np.int64)
            new_colors = K.refine(colors, choice, plan.c3)
            vmap = np.arange(graph.n, dtype=np.int64)
            stages.append(StageRecord(plan.index, el, graph, coloring, "refine",
                                      cleaned=cleaned, ordering=ordering, labeling=labeling, vmap=vmap))
            source.observe(plan, vmap, new_colors)
            colors = new_colors
            continue
        first = K.first_from_keys(ptr, idx, pos, keys)
        win = np.asarray(source.winners(plan, graph.labels, colors), dtype=np.int8)
        cleaned_up = _subgraph(cleaned, K.cleanup_mask(cleaned.src, cleaned.dst, win, pos, first))
        n2, vmap, s2, d2, c2, l2 = K.contract(graph.n, cleaned_up.src, cleaned_up.dst, colors,
                                              graph.labels, win, plan.buffer, plan.h, plan.r, graph.directed)
        gap = plan.r == 1 and plan.j == plan.h - 1 and bool(np.any(colors == plan.h))
        stages.append(StageRecord(plan.index, el, graph, coloring, "contract",
                                  cleaned=cleaned, ordering=ordering, labeling=labeling,
                                  target_color=plan.j, buffer_color=plan.buffer, win=win,
                                  cleaned_up=cleaned_up, vmap=vmap, recolor_gap_applied=gap))
        source.observe(plan, vmap, c2)
        graph = Graph._from_canonical(n2, graph.directed, s2, d2, l2)
        colors = c2
    last = schedule.elements[-1]
    stages.append(StageRecord(last.index, last, graph, VertexColoring(last.h + last.r, colors), "final"))
    return MinorSequence(k, schedule, stages, recorder.log if recorder else None)


# ---------------------------------------------------------------------------
# retrace
# ---------------------------------------------------------------------------

def _expand(rec: StageRecord, star: list[int], a: int, b: int) -> list[int]:
    """Members ``x, y`` of ``star`` with ``a - x - y - b`` in ``G_i''`` (coloured j-1, j)."""
    G = rec.cleaned_up
    c = rec.coloring.colors
    j = rec.target_color
    xs = [v for v in star if c[v] == j - 1]
    ys = [v for v in star if c[v] == j]
    for x in xs:
        for y in ys:
            if not (G.has_edge(x, y) or G.has_edge(y, x)):
                continue
            if G.has_edge(a, x) and G.has_edge(x, y) and G.has_edge(y, b):
                return [x, y]
            if not G.directed and G.has_edge(a, y) and G.has_edge(x, b):
                return [y, x]
    raise RetraceError(f"stage {rec.index}: no buffer/target pair between {a} and {b}")


def _lift(rec: StageRecord, cyc: list[int]) -> list[int]:
    members = rec.members
    p = len(cyc)
    singles = [members[v][0] if len(members[v]) == 1 else None for v in cyc]
    out: list[int] = []
    for w, v in enumerate(cyc):
        star = members[v]
        if len(star) == 1:
            out.append(star[0])
            continue
        a, b = singles[w - 1], singles[(w + 1) % p]
        if a is None or b is None:
            raise RetraceError(f"stage {rec.index}: adjacent contracted stars on the cycle")
        out.extend(_expand(rec, star, a, b))
    return out


def _assert_lift(rec: StageRecord, cyc: list[int], graph: Graph) -> list[int]:
    e = rec.element
    if len(cyc) != e.t or len(set(cyc)) != e.t:
        raise RetraceError(f"stage {rec.index}: lifted cycle has {len(set(cyc))} distinct of {len(cyc)}, want {e.t}")
    if not all(graph.has_edge(cyc[i], cyc[(i + 1) % e.t]) for i in range(e.t)):
        raise RetraceError(f"stage {rec.index}: lifted cycle uses a missing edge")
    anchored = anchor_hr_cyclic(rec.coloring.colors, cyc, e.h, e.r, graph.directed)
    if anchored is None:
        raise RetraceError(f"stage {rec.index}: lifted cycle is not ({e.h},{e.r})-cyclic")
    return anchored


def retrace_cycle(ms: MinorSequence, tri: CyclePath) -> CyclePath:
    """Lift a (3,0)-cyclic triangle of the last graph back to a ``k``-cycle of the input."""
    final = ms.stages[-1]
    cyc = _assert_lift(final, list(tri.vertices), final.graph_in)
    for rec in reversed(ms.stages[:-1]):
        if rec.action == "contract":
            cyc = _assert_lift(rec, _lift(rec, cyc), rec.cleaned_up)
        else:
            cyc = _assert_lift(rec, list(cyc), rec.graph_in)
    return CyclePath(tuple(cyc), ms.stages[0].graph_in.directed)


def run_and_retrace(G: Graph, k: int, coins=0) -> tuple[MinorSequence, CyclePath | None]:
    ms = produce_minor_sequence(G, k, coins)
    tri = ms.final_triangle()
    return ms, (None if tri is None else retrace_cycle(ms, tri))

