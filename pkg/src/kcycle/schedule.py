"""The 4-3-6-5 sequence of cycle sizes and colouring types."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from numba import njit

TYPES = frozenset({(4, 3), (4, 2), (4, 1), (4, 0), (3, 1), (3, 0),
                   (6, 4), (6, 3), (6, 2), (6, 1), (6, 0), (5, 1), (5, 0)})


@njit(cache=True)
def _is_type(h, r):
    if h == 4:
        return 0 <= r <= 3
    if h == 3 or h == 5:
        return 0 <= r <= 1
    if h == 6:
        return 0 <= r <= 4
    return False


@njit(cache=True)
def _successor(t, h, r):
    """Next ``(t, h, r)``; ``t = -1`` marks the end, ``-2`` an inexact row."""
    if h == 4:
        if r == 3 or r == 2:
            return t - 1, 4, r - 1
        if r == 1:
            if (3 * t + 1) % 4:
                return -2, 0, 0
            return (3 * t + 1) // 4, 3, 1
        if t % 4:
            return -2, 0, 0
        return 3 * t // 4, 3, 0
    if h == 3:
        if t > 4:
            return t, 6, t % 6
        if t == 4 and r == 1:
            return 3, 3, 0
        return -1, 0, 0
    if h == 6:
        if r >= 2:
            return t - 1, 6, r - 1
        if r == 1:
            if (5 * t + 1) % 6:
                return -2, 0, 0
            return (5 * t + 1) // 6, 5, 1
        if t % 6:
            return -2, 0, 0
        return 5 * t // 6, 5, 0
    if h == 5:
        if r == 1:
            if (4 * t + 1) % 5:
                return -2, 0, 0
            return (4 * t + 1) // 5, 4, 1
        if t % 5:
            return -2, 0, 0
        return 4 * t // 5, 4, 0
    return -2, 0, 0


@njit(cache=True)
def _build(k):
    cap = 16
    ts = np.empty(cap, np.int64)
    hs = np.empty(cap, np.int64)
    rs = np.empty(cap, np.int64)
    t, h, r = k, 4, k % 4
    n = 0
    while True:
        if n == cap:
            cap *= 2
            ts2 = np.empty(cap, np.int64)
            hs2 = np.empty(cap, np.int64)
            rs2 = np.empty(cap, np.int64)
            ts2[:n] = ts[:n]
            hs2[:n] = hs[:n]
            rs2[:n] = rs[:n]
            ts, hs, rs = ts2, hs2, rs2
        ts[n] = t
        hs[n] = h
        rs[n] = r
        n += 1
        t, h, r = _successor(t, h, r)
        if t == -1:
            break
        if t == -2:
            raise ValueError("transition produced a non-integer value")
    return ts[:n].copy(), hs[:n].copy(), rs[:n].copy()


# violation codes reported by _check
OK = 0
_MESSAGES = {
    1: "first element must be k of type (4, k mod 4)",
    2: "last element must be 3 of type (3,0)",
    3: "unknown element type",
    4: "element value not congruent to r mod h",
    5: "successor does not follow the transition table",
    6: "values increase",
    7: "length exceeds 7*log2(k)",
    8: "type (4,3) or (4,2) after the second element",
    9: "more than two elements precede the first segment",
    10: "segment longer than 7",
    11: "non-final segment shorter than 4",
    12: "segment holds too many elements of one period",
    13: "segment head more than halves plus one half",
    14: "more than floor(log2 k) segments",
    15: "segment head exceeds ceil(k / 2^(r-1))",
    16: "empty sequence",
}


@njit(cache=True)
def _check(k, ts, hs, rs):
    n = ts.shape[0]
    if n == 0:
        return 16
    if ts[0] != k or hs[0] != 4 or rs[0] != k % 4:
        return 1
    if ts[n - 1] != 3 or hs[n - 1] != 3 or rs[n - 1] != 0:
        return 2
    for i in range(n):
        if not _is_type(hs[i], rs[i]):
            return 3
        if ts[i] % hs[i] != rs[i]:
            return 4
        if i > 0 and ts[i] > ts[i - 1]:
            return 6
        if i >= 2 and hs[i] == 4 and rs[i] >= 2:
            return 8
        nt, nh, nr = _successor(ts[i], hs[i], rs[i])
        if i + 1 < n:
            if nt != ts[i + 1] or nh != hs[i + 1] or nr != rs[i + 1]:
                return 5
        elif nt != -1:
            return 5
    if n > 7.0 * np.log2(k):
        return 7
    # segments
    nseg = 0
    head = -1
    prev_head = -1
    seg_len = 0
    c3 = c4 = c5 = c6 = 0
    for i in range(n + 1):
        starts = i < n and hs[i] == 4 and rs[i] <= 1
        if i == n or starts:
            if head >= 0:
                if seg_len > 7:
                    return 10
                if i < n and seg_len < 4:
                    return 11
                if c3 > 1 or c4 > 1 or c5 > 1 or c6 > 4:
                    return 12
            if i == n:
                break
            if head < 0 and i > 2:
                return 9
            prev_head = head
            head = i
            nseg += 1
            seg_len = 0
            c3 = c4 = c5 = c6 = 0
            if prev_head >= 0 and 2 * ts[i] > ts[prev_head] + 1:
                return 13
            # ceil(k / 2^(nseg-1))
            p = np.int64(1) << (nseg - 1)
            if ts[i] > (k + p - 1) // p:
                return 15
        if head >= 0:
            seg_len += 1
            # the terminal 3 (3,0) sits outside the per-period budget
            if i == n - 1:
                continue
            if hs[i] == 3:
                c3 += 1
            elif hs[i] == 4:
                c4 += 1
            elif hs[i] == 5:
                c5 += 1
            else:
                c6 += 1
    if nseg > np.int64(np.floor(np.log2(k))):
        return 14
    return OK


@dataclass(frozen=True)
class ScheduleElement:
    index: int
    t: int
    h: int
    r: int

    @property
    def type(self) -> tuple[int, int]:
        return (self.h, self.r)

    def __str__(self) -> str:
        return f"{self.t} ({self.h},{self.r})"


@dataclass(frozen=True, eq=False)
class Schedule:
    """``S(k)``: parallel arrays of values ``t`` and types ``(h, r)``."""

    k: int
    t: np.ndarray
    h: np.ndarray
    r: np.ndarray

    @classmethod
    def from_elements(cls, k: int, elements: Iterable[tuple[int, int, int]]) -> Schedule:
        rows = np.asarray(list(elements), dtype=np.int64).reshape(-1, 3)
        return cls(k, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy())

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def N(self) -> int:
        return len(self)

    @cached_property
    def elements(self) -> tuple[ScheduleElement, ...]:
        return tuple(ScheduleElement(i + 1, int(t), int(h), int(r))
                     for i, (t, h, r) in enumerate(zip(self.t, self.h, self.r)))

    def __getitem__(self, i: int) -> ScheduleElement:
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)

    def value(self, i: int) -> int:
        """``S(k, i)`` with 1-based ``i``."""
        if not 1 <= i <= len(self):
            raise IndexError(i)
        return int(self.t[i - 1])

    def values(self) -> list[int]:
        return self.t.tolist()

    def lines(self) -> list[str]:
        return [str(e) for e in self.elements]


def build_schedule(k: int) -> Schedule:
    if k < 4:
        raise ValueError(f"the 4-3-6-5 sequence needs k >= 4, got {k}")
    t, h, r = _build(k)
    return Schedule(k, t, h, r)


@dataclass(frozen=True)
class SegmentView:
    """Half-open 0-based index ranges of the segments, in order."""

    schedule: Schedule
    ranges: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.ranges)

    def values(self) -> list[list[int]]:
        return [self.schedule.t[a:b].tolist() for a, b in self.ranges]

    @property
    def heads(self) -> list[int]:
        return [int(self.schedule.t[a]) for a, _ in self.ranges]


def segments(s: Schedule) -> SegmentView:
    starts = [i for i in range(len(s)) if s.h[i] == 4 and s.r[i] <= 1]
    ends = starts[1:] + [len(s)]
    return SegmentView(s, tuple(zip(starts, ends)))


def schedule_violation(s: Schedule) -> str | None:
    """Describe the first broken invariant, or ``None``."""
    if s.k < 4:
        return "k must be at least 4"
    code = _check(s.k, s.t, s.h, s.r)
    return None if code == OK else _MESSAGES[code]


def validate_schedule(s: Schedule) -> bool:
    return schedule_violation(s) is None
