"""Sources of random decisions for the minor-sequence pipeline.

A coin source answers four kinds of questions per stage: initial colours,
label keys for each vertex's later neighbours, winner/loser bits, and
colour-refinement choices.  :class:`HashCoins` derives every answer from a
seed by counter-based hashing; :class:`ReplayCoins` answers from a recorded
:class:`CoinLog`; :class:`RecordingCoins` wraps another source and logs what
it hands out.  Vertices are addressed by their stable labels throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K

COINLOG_FORMAT = "kcycle-coinlog"
COINLOG_VERSION = 1


class ReplayError(RuntimeError):
    """A coin log does not match the run it is asked to replay."""


@dataclass
class StageCoins:
    index: int
    label_order: dict[int, tuple[int, ...]] = field(default_factory=dict)
    winners: dict[int, int] = field(default_factory=dict)
    choices: dict[int, int] = field(default_factory=dict)


@dataclass
class CoinLog:
    """Every random decision of one pipeline run, keyed by vertex label.

    ``label_order[v]`` lists ``v``'s later neighbours in label order 1, 2, ...;
    ``winners[v]`` is 1 for a winner and 0 for a loser.
    """

    k: int
    initial_colors: dict[int, int] = field(default_factory=dict)
    stages: dict[int, StageCoins] = field(default_factory=dict)

    def stage(self, index: int) -> StageCoins:
        if index not in self.stages:
            self.stages[index] = StageCoins(index)
        return self.stages[index]

    def to_dict(self) -> dict:
        return {
            "format": COINLOG_FORMAT,
            "version": COINLOG_VERSION,
            "k": self.k,
            "initial_colors": sorted(self.initial_colors.items()),
            "stages": [
                {
                    "index": s.index,
                    "label_order": [[v, list(o)] for v, o in sorted(s.label_order.items())],
                    "winners": sorted(s.winners.items()),
                    "choices": sorted(s.choices.items()),
                }
                for _, s in sorted(self.stages.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CoinLog:
        if data.get("format") != COINLOG_FORMAT:
            raise ReplayError("not a coin log")
        if data.get("version") != COINLOG_VERSION:
            raise ReplayError(f"unsupported coin log version {data.get('version')}")
        log = cls(int(data["k"]), {int(v): int(c) for v, c in data["initial_colors"]})
        for s in data["stages"]:
            log.stages[int(s["index"])] = StageCoins(
                int(s["index"]),
                {int(v): tuple(int(u) for u in o) for v, o in s["label_order"]},
                {int(v): int(b) for v, b in s["winners"]},
                {int(v): int(c) for v, c in s["choices"]},
            )
        return log

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> CoinLog:
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> CoinLog:
        return cls.loads(Path(path).read_text())


class CoinSource:
    """Interface; ``plan`` is the pipeline's per-stage plan (index, t, h, r, j...)."""

    def initial_colors(self, labels: np.ndarray, q: int) -> np.ndarray:
        raise NotImplementedError

    def label_keys(self, plan, ptr, idx, pos, labels) -> np.ndarray:
        raise NotImplementedError

    def winners(self, plan, labels, colors) -> np.ndarray:
        raise NotImplementedError

    def refinement(self, plan, labels, colors) -> np.ndarray:
        raise NotImplementedError

    def observe(self, plan, vmap: np.ndarray, colors: np.ndarray) -> None:
        """Called after each stage with the old-to-new vertex map."""


class HashCoins(CoinSource):
    def __init__(self, seed: int):
        self.seed = int(seed) & K.MASK64
        self._s = np.uint64(self.seed)

    def initial_colors(self, labels, q):
        return K.hash_colors(labels, self._s, q)

    def label_keys(self, plan, ptr, idx, pos, labels):
        return K.hash_label_keys(ptr, idx, pos, labels, self._s, plan.index)

    def winners(self, plan, labels, colors):
        return K.hash_winners(labels, colors, plan.j, self._s, plan.index)

    def refinement(self, plan, labels, colors):
        return K.hash_choices(labels, self._s, plan.index, plan.nopt)


class ReplayCoins(CoinSource):
    def __init__(self, log: CoinLog):
        self.log = log

    def initial_colors(self, labels, q):
        try:
            out = np.array([self.log.initial_colors[int(v)] for v in labels], dtype=np.int64)
        except KeyError as exc:
            raise ReplayError(f"no initial colour for vertex {exc.args[0]}") from None
        if out.size and out.max() >= q:
            raise ReplayError(f"logged colour outside Z_{q}")
        return out

    def _stage(self, plan) -> StageCoins:
        try:
            return self.log.stages[plan.index]
        except KeyError:
            raise ReplayError(f"stage {plan.index} missing from coin log") from None

    def label_keys(self, plan, ptr, idx, pos, labels):
        st = self._stage(plan)
        keys = np.zeros(idx.shape[0], dtype=np.uint64)
        for v in range(ptr.shape[0] - 1):
            later = [e for e in range(ptr[v], ptr[v + 1]) if pos[idx[e]] > pos[v]]
            if not later:
                continue
            order = st.label_order.get(int(labels[v]))
            if order is None or len(order) != len(later):
                raise ReplayError(f"stage {plan.index}: label order of vertex {labels[v]} does not match")
            rank = {u: i for i, u in enumerate(order)}
            for e in later:
                u = int(labels[idx[e]])
                if u not in rank:
                    raise ReplayError(f"stage {plan.index}: {u} is not a logged later neighbour of {labels[v]}")
                keys[e] = rank[u]
        return keys

    def winners(self, plan, labels, colors):
        st = self._stage(plan)
        win = np.full(labels.shape[0], -1, dtype=np.int8)
        for v in np.flatnonzero((colors == plan.j) | (colors == plan.j - 1)):
            try:
                win[v] = st.winners[int(labels[v])]
            except KeyError:
                raise ReplayError(f"stage {plan.index}: no winner bit for vertex {labels[v]}") from None
        return win

    def refinement(self, plan, labels, colors):
        st = self._stage(plan)
        out = np.zeros(labels.shape[0], dtype=np.int64)
        for v in np.flatnonzero(colors < 3):
            try:
                out[v] = st.choices[int(labels[v])]
            except KeyError:
                raise ReplayError(f"stage {plan.index}: no refinement choice for vertex {labels[v]}") from None
        return out


class RecordingCoins(CoinSource):
    """Pass-through source that writes everything it hands out into ``log``."""

    def __init__(self, inner: CoinSource, k: int):
        self.inner = inner
        self.log = CoinLog(k)

    def initial_colors(self, labels, q):
        out = self.inner.initial_colors(labels, q)
        self.log.initial_colors = dict(zip(labels.tolist(), out.tolist()))
        return out

    def label_keys(self, plan, ptr, idx, pos, labels):
        keys = self.inner.label_keys(plan, ptr, idx, pos, labels)
        st = self.log.stage(plan.index)
        for v in range(ptr.shape[0] - 1):
            later = [e for e in range(ptr[v], ptr[v + 1]) if pos[idx[e]] > pos[v]]
            if later:
                later.sort(key=lambda e: (int(keys[e]), int(idx[e])))
                st.label_order[int(labels[v])] = tuple(int(labels[idx[e]]) for e in later)
        return keys

    def winners(self, plan, labels, colors):
        win = self.inner.winners(plan, labels, colors)
        st = self.log.stage(plan.index)
        for v in np.flatnonzero(win >= 0):
            st.winners[int(labels[v])] = int(win[v])
        return win

    def refinement(self, plan, labels, colors):
        choice = self.inner.refinement(plan, labels, colors)
        st = self.log.stage(plan.index)
        for v in np.flatnonzero(colors < 3):
            st.choices[int(labels[v])] = int(choice[v])
        return choice

    def observe(self, plan, vmap, colors):
        self.inner.observe(plan, vmap, colors)


def coin_source(coins) -> CoinSource:
    if isinstance(coins, CoinSource):
        return coins
    if isinstance(coins, CoinLog):
        return ReplayCoins(coins)
    if isinstance(coins, (int, np.integer)):
        return HashCoins(int(coins))
    raise TypeError(f"cannot draw coins from {type(coins).__name__}")
