"""Compiled inner loops shared by every execution path.

All graph arrays are int64 edge lists in canonical form: self-loops removed,
undirected pairs stored once with ``src < dst``, sorted by ``(src, dst)`` and
duplicate-free.  Vertex indices are always ordered like their labels, so
"smallest label" tie-breaks reduce to "smallest index".

Every random decision is a pure function of ``(seed, kind, stage, a, b)``
through :func:`coin`.  The recorded pipeline, the batched search loop and the
replay machinery therefore see the same coins no matter in which order they
are drawn.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

# coin kinds
K_TRIAL = 1
K_COLOR = 2
K_LABEL = 3
K_WIN = 4
K_REFINE = 5
K_NOISE = 6

# stage actions
ACT_CONTRACT = 0
ACT_REFINE = 1

PALETTE_MAX = 10


@njit(cache=True)
def mix64(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def coin(seed, kind, stage, a, b):
    h = mix64(np.uint64(seed) ^ (np.uint64(kind) << np.uint64(56)))
    h = mix64(h ^ np.uint64(stage))
    h = mix64(h ^ np.uint64(a))
    return mix64(h ^ (np.uint64(b) * np.uint64(0xD1B54A32D192ED03)))


@njit(cache=True)
def trial_seed(root, index):
    return coin(root, K_TRIAL, 0, index, 0)


def mix64_py(z: int) -> int:
    """Pure-Python twin of :func:`mix64`, used to pin the hash in tests."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def coin_py(seed: int, kind: int, stage: int, a: int, b: int) -> int:
    h = mix64_py((seed & MASK64) ^ (kind << 56))
    h = mix64_py(h ^ stage)
    h = mix64_py(h ^ a)
    return mix64_py(h ^ ((b * 0xD1B54A32D192ED03) & MASK64))


# ---------------------------------------------------------------------------
# edge arrays and adjacency
# ---------------------------------------------------------------------------

@njit(cache=True)
def _counting_order(n, key):
    counts = np.zeros(n + 1, np.int64)
    for e in range(key.shape[0]):
        counts[key[e] + 1] += 1
    for i in range(n):
        counts[i + 1] += counts[i]
    out = np.empty(key.shape[0], np.int64)
    for e in range(key.shape[0]):
        x = key[e]
        out[counts[x]] = e
        counts[x] += 1
    return out


@njit(cache=True)
def sort_pairs(n, a, b):
    o = _counting_order(n, b)
    a1 = a[o]
    b1 = b[o]
    o = _counting_order(n, a1)
    return a1[o], b1[o]


@njit(cache=True)
def canon_edges(n, src, dst, directed):
    m = src.shape[0]
    a = np.empty(m, np.int64)
    b = np.empty(m, np.int64)
    cnt = 0
    for e in range(m):
        u = src[e]
        v = dst[e]
        if u == v:
            continue
        if not directed and u > v:
            u, v = v, u
        a[cnt] = u
        b[cnt] = v
        cnt += 1
    a, b = sort_pairs(n, a[:cnt], b[:cnt])
    keep = 0
    for e in range(cnt):
        if e > 0 and a[e] == a[keep - 1] and b[e] == b[keep - 1]:
            continue
        a[keep] = a[e]
        b[keep] = b[e]
        keep += 1
    return a[:keep].copy(), b[:keep].copy()


@njit(cache=True)
def csr_from_sorted(n, a, b):
    ptr = np.zeros(n + 1, np.int64)
    for e in range(a.shape[0]):
        ptr[a[e] + 1] += 1
    for i in range(n):
        ptr[i + 1] += ptr[i]
    return ptr, b.copy()


@njit(cache=True)
def und_csr(n, src, dst):
    """Symmetric neighbour lists of the underlying undirected graph."""
    m = src.shape[0]
    lo = np.empty(m, np.int64)
    hi = np.empty(m, np.int64)
    for e in range(m):
        if src[e] < dst[e]:
            lo[e] = src[e]
            hi[e] = dst[e]
        else:
            lo[e] = dst[e]
            hi[e] = src[e]
    lo, hi = canon_edges(n, lo, hi, True)
    k = lo.shape[0]
    a = np.empty(2 * k, np.int64)
    b = np.empty(2 * k, np.int64)
    a[:k] = lo
    b[:k] = hi
    a[k:] = hi
    b[k:] = lo
    a, b = sort_pairs(n, a, b)
    return csr_from_sorted(n, a, b)


@njit(cache=True)
def und_csr_canonical(n, src, dst):
    """Same as :func:`und_csr` for canonical undirected input, in linear time.

    Rows come out sorted: the smaller neighbours are written first, in
    increasing ``src`` order, then the larger ones in increasing ``dst``.
    """
    m = src.shape[0]
    ptr = np.zeros(n + 1, np.int64)
    for e in range(m):
        ptr[src[e] + 1] += 1
        ptr[dst[e] + 1] += 1
    for i in range(n):
        ptr[i + 1] += ptr[i]
    fill = ptr[:n].copy()
    idx = np.empty(2 * m, np.int64)
    for e in range(m):
        v = dst[e]
        idx[fill[v]] = src[e]
        fill[v] += 1
    for e in range(m):
        v = src[e]
        idx[fill[v]] = dst[e]
        fill[v] += 1
    return ptr, idx


@njit(cache=True)
def und_adj(n, src, dst, directed):
    if directed:
        return und_csr(n, src, dst)
    return und_csr_canonical(n, src, dst)


@njit(cache=True)
def out_csr(n, src, dst):
    return csr_from_sorted(n, src, dst)


@njit(cache=True)
def in_csr(n, src, dst):
    a, b = sort_pairs(n, dst.copy(), src.copy())
    return csr_from_sorted(n, a, b)


@njit(cache=True)
def has_arc(ptr, idx, u, v):
    lo = ptr[u]
    hi = ptr[u + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = idx[mid]
        if x == v:
            return True
        if x < v:
            lo = mid + 1
        else:
            hi = mid
    return False


# ---------------------------------------------------------------------------
# degeneracy ordering
# ---------------------------------------------------------------------------

@njit(cache=True)
def _heap_push(heap, size, key):
    i = size
    heap[i] = key
    while i > 0:
        p = (i - 1) >> 1
        if heap[p] <= heap[i]:
            break
        heap[p], heap[i] = heap[i], heap[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        if l + 1 < size and heap[l + 1] < heap[l]:
            c = l + 1
        if heap[i] <= heap[c]:
            break
        heap[i], heap[c] = heap[c], heap[i]
        i = c
    return top, size


@njit(cache=True)
def degeneracy(n, ptr, idx):
    """Repeated minimum-degree removal, ties to the smallest index.

    Returns ``(order, pos, d)`` where ``d`` is the largest number of later
    neighbours any vertex has, which equals the degeneracy.
    """
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = ptr[v + 1] - ptr[v]
    removed = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    heap = np.empty(n + idx.shape[0] + 1, np.int64)
    size = 0
    stride = n + 1
    for v in range(n):
        size = _heap_push(heap, size, deg[v] * stride + v)
    d = 0
    placed = 0
    while placed < n:
        key, size = _heap_pop(heap, size)
        v = key % stride
        if removed[v] or key // stride != deg[v]:
            continue
        removed[v] = True
        order[placed] = v
        pos[v] = placed
        placed += 1
        if deg[v] > d:
            d = deg[v]
        for e in range(ptr[v], ptr[v + 1]):
            u = idx[e]
            if not removed[u]:
                deg[u] -= 1
                size = _heap_push(heap, size, deg[u] * stride + u)
    return order, pos, d


# ---------------------------------------------------------------------------
# coins
# ---------------------------------------------------------------------------

@njit(cache=True)
def hash_colors(labels, seed, q):
    out = np.empty(labels.shape[0], np.int64)
    for v in range(labels.shape[0]):
        out[v] = np.int64(coin(seed, K_COLOR, 0, labels[v], 0) % np.uint64(q))
    return out


@njit(cache=True)
def hash_label_keys(ptr, idx, pos, labels, seed, stage):
    keys = np.zeros(idx.shape[0], np.uint64)
    n = ptr.shape[0] - 1
    for v in range(n):
        for e in range(ptr[v], ptr[v + 1]):
            u = idx[e]
            if pos[u] > pos[v]:
                keys[e] = coin(seed, K_LABEL, stage, labels[v], labels[u])
    return keys


@njit(cache=True)
def hash_winners(labels, colors, j, seed, stage):
    n = labels.shape[0]
    win = np.full(n, -1, np.int8)
    for v in range(n):
        c = colors[v]
        if c == j or c == j - 1:
            win[v] = np.int8(coin(seed, K_WIN, stage, labels[v], 0) & np.uint64(1))
    return win


@njit(cache=True)
def hash_choices(labels, seed, stage, nopt):
    out = np.empty(labels.shape[0], np.int64)
    for v in range(labels.shape[0]):
        out[v] = np.int64(coin(seed, K_REFINE, stage, labels[v], 0) % np.uint64(nopt))
    return out


@njit(cache=True)
def labels_from_keys(ptr, idx, pos, keys):
    """Rank each vertex's later neighbours by ``(key, index)``; rank 1 first."""
    lab = np.zeros(idx.shape[0], np.int64)
    n = ptr.shape[0] - 1
    buf = np.empty(idx.shape[0] + 1, np.int64)
    for v in range(n):
        cnt = 0
        for e in range(ptr[v], ptr[v + 1]):
            if pos[idx[e]] > pos[v]:
                # insertion sort, lists are at most d long
                i = cnt
                while i > 0:
                    f = buf[i - 1]
                    if keys[f] > keys[e] or (keys[f] == keys[e] and idx[f] > idx[e]):
                        buf[i] = f
                        i -= 1
                    else:
                        break
                buf[i] = e
                cnt += 1
        for i in range(cnt):
            lab[buf[i]] = i + 1
    return lab


@njit(cache=True)
def first_from_keys(ptr, idx, pos, keys):
    n = ptr.shape[0] - 1
    first = np.full(n, -1, np.int64)
    for v in range(n):
        best = -1
        for e in range(ptr[v], ptr[v + 1]):
            if pos[idx[e]] > pos[v]:
                if best < 0 or keys[e] < keys[best] or (keys[e] == keys[best] and idx[e] < idx[best]):
                    best = e
        if best >= 0:
            first[v] = idx[best]
    return first


# ---------------------------------------------------------------------------
# pipeline steps
# ---------------------------------------------------------------------------

@njit(cache=True)
def clean_mask(src, dst, colors, table):
    m = src.shape[0]
    keep = np.empty(m, np.bool_)
    for e in range(m):
        keep[e] = table[colors[src[e]], colors[dst[e]]]
    return keep


@njit(cache=True)
def cleanup_mask(src, dst, win, pos, first):
    m = src.shape[0]
    keep = np.ones(m, np.bool_)
    for e in range(m):
        a = src[e]
        b = dst[e]
        if win[a] < 0 or win[b] < 0:
            continue
        ok = False
        if win[a] == 1 and win[b] == 0 and pos[a] < pos[b] and first[a] == b:
            ok = True
        elif win[b] == 1 and win[a] == 0 and pos[b] < pos[a] and first[b] == a:
            ok = True
        keep[e] = ok
    return keep


@njit(cache=True)
def star_roots(n, src, dst, win):
    """Map every vertex to its star root (losers and singletons map to themselves)."""
    rep = np.arange(n)
    for e in range(src.shape[0]):
        a = src[e]
        b = dst[e]
        if win[a] >= 0 and win[b] >= 0:
            if win[a] == 1:
                rep[a] = b
            else:
                rep[b] = a
    return rep


@njit(cache=True)
def contract(n, src, dst, colors, labels, win, buffer, h, r, directed):
    rep = star_roots(n, src, dst, win)
    newid = np.full(n, -1, np.int64)
    vmap = np.empty(n, np.int64)
    ncol = np.empty(n, np.int64)
    nlab = np.empty(n, np.int64)
    cnt = 0
    for v in range(n):
        root = rep[v]
        if newid[root] < 0:
            newid[root] = cnt
            nlab[cnt] = labels[v]
            if win[v] >= 0:
                ncol[cnt] = buffer
            else:
                c = colors[v]
                if r == 1 and c == h:
                    c = h - 1
                ncol[cnt] = c
            cnt += 1
        vmap[v] = newid[root]
    ns = np.empty(src.shape[0], np.int64)
    nd = np.empty(src.shape[0], np.int64)
    for e in range(src.shape[0]):
        ns[e] = vmap[src[e]]
        nd[e] = vmap[dst[e]]
    ns, nd = canon_edges(cnt, ns, nd, directed)
    return cnt, vmap, ns, nd, ncol[:cnt].copy(), nlab[:cnt].copy()


@njit(cache=True)
def refine(colors, choice, c3):
    out = np.empty(colors.shape[0], np.int64)
    for v in range(colors.shape[0]):
        c = colors[v]
        if c < 3:
            out[v] = c + 3 * choice[v]
        else:
            out[v] = c3
    return out


@njit(cache=True)
def find_triangle(n, src, dst, colors, directed, use_colors):
    """First triangle under index order, scanning pairs of later neighbours.

    With ``use_colors`` the triangle must carry colours 0, 1, 2 (directed:
    oriented 0 -> 1 -> 2 -> 0) and is returned in colour order.  Without it
    any triangle (directed: any directed 3-cycle) is returned.
    """
    ptr, idx = und_adj(n, src, dst, directed)
    order, pos, d = degeneracy(n, ptr, idx)
    optr, oidx = out_csr(n, src, dst)
    for v in range(n):
        for e1 in range(ptr[v], ptr[v + 1]):
            u = idx[e1]
            if pos[u] < pos[v]:
                continue
            for e2 in range(e1 + 1, ptr[v + 1]):
                w = idx[e2]
                if pos[w] < pos[v]:
                    continue
                if not has_arc(ptr, idx, u, w):
                    continue
                if use_colors:
                    trio = np.full(3, -1, np.int64)
                    ok = True
                    for x in (v, u, w):
                        c = colors[x]
                        if c < 0 or c > 2 or trio[c] >= 0:
                            ok = False
                            break
                        trio[c] = x
                    if not ok:
                        continue
                    a, b, c3 = trio[0], trio[1], trio[2]
                    if not directed:
                        return a, b, c3
                    if has_arc(optr, oidx, a, b) and has_arc(optr, oidx, b, c3) and has_arc(optr, oidx, c3, a):
                        return a, b, c3
                else:
                    if not directed:
                        return v, u, w
                    if has_arc(optr, oidx, v, u) and has_arc(optr, oidx, u, w) and has_arc(optr, oidx, w, v):
                        return v, u, w
                    if has_arc(optr, oidx, v, w) and has_arc(optr, oidx, w, u) and has_arc(optr, oidx, u, v):
                        return v, w, u
    return -1, -1, -1


# ---------------------------------------------------------------------------
# batched search
# ---------------------------------------------------------------------------

@njit(cache=True)
def run_trial(n, src, dst, labels, directed, seed, q0, p_t, p_h, p_r, p_act, p_j, p_c3, tables):
    """One randomized pass over the schedule without provenance.

    Must agree stage for stage with the recorded pipeline, which calls the
    same step kernels with the same coins.
    """
    colors = hash_colors(labels, seed, q0)
    for s in range(p_t.shape[0]):
        stage = s + 1
        if src.shape[0] < p_t[s]:
            return False
        if p_act[s] == ACT_REFINE:
            nopt = 2 if p_t[s] % 6 == 0 or p_t[s] % 6 == 1 else 3
            choice = hash_choices(labels, seed, stage, nopt)
            colors = refine(colors, choice, p_c3[s])
            continue
        keep = clean_mask(src, dst, colors, tables[s])
        src = src[keep]
        dst = dst[keep]
        ptr, idx = und_adj(n, src, dst, directed)
        order, pos, d = degeneracy(n, ptr, idx)
        keys = hash_label_keys(ptr, idx, pos, labels, seed, stage)
        first = first_from_keys(ptr, idx, pos, keys)
        j = p_j[s]
        win = hash_winners(labels, colors, j, seed, stage)
        keep = cleanup_mask(src, dst, win, pos, first)
        src = src[keep]
        dst = dst[keep]
        n, vmap, src, dst, colors, labels = contract(
            n, src, dst, colors, labels, win, j - 1, p_h[s], p_r[s], directed)
    if src.shape[0] < 3:
        return False
    a, b, c = find_triangle(n, src, dst, colors, directed, True)
    return a >= 0


@njit(cache=True)
def search(n, src, dst, labels, directed, root, start, stop, q0,
           p_t, p_h, p_r, p_act, p_j, p_c3, tables):
    for i in range(start, stop):
        s = trial_seed(root, i)
        if run_trial(n, src, dst, labels, directed, s, q0,
                     p_t, p_h, p_r, p_act, p_j, p_c3, tables):
            return i
    return -1


@njit(cache=True)
def count_successes(n, src, dst, labels, directed, root, start, stop, q0,
                    p_t, p_h, p_r, p_act, p_j, p_c3, tables):
    hits = 0
    for i in range(start, stop):
        s = trial_seed(root, i)
        if run_trial(n, src, dst, labels, directed, s, q0,
                     p_t, p_h, p_r, p_act, p_j, p_c3, tables):
            hits += 1
    return hits


# ---------------------------------------------------------------------------
# colour-coding baseline
# ---------------------------------------------------------------------------

@njit(cache=True)
def colorful_cycle(n, optr, oidx, colors, k):
    """Colourful k-cycle via subset DP; start sets packed 64 per word.

    Returns ``(start, end)`` of a colourful k-vertex path that closes with an
    arc ``end -> start``, or ``(-1, -1)``.
    """
    full = (1 << k) - 1
    nwords = (n + 63) // 64
    for wi in range(nwords):
        reach = np.zeros((1 << k, n), np.uint64)
        base = wi * 64
        for s in range(base, min(n, base + 64)):
            reach[1 << colors[s], s] |= np.uint64(1) << np.uint64(s - base)
        for mask in range(1, full + 1):
            for v in range(n):
                bits = reach[mask, v]
                if bits == 0:
                    continue
                for e in range(optr[v], optr[v + 1]):
                    u = oidx[e]
                    cb = 1 << colors[u]
                    if mask & cb:
                        continue
                    reach[mask | cb, u] |= bits
        for v in range(n):
            bits = reach[full, v]
            if bits == 0:
                continue
            for e in range(optr[v], optr[v + 1]):
                s = oidx[e]
                if base <= s < base + 64 and (bits >> np.uint64(s - base)) & np.uint64(1):
                    return s, v
    return -1, -1
