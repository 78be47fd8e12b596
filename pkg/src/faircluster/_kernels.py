"""Hot numeric kernels: min-cost flow, augmenting-path matching, swap search.

Every kernel is written as a plain Python function over numpy arrays and
compiled with numba's @njit when available. Setting the environment variable
FAIRCLUSTER_NUMBA=0 before import selects the uncompiled fallback path (the
local-search kernel additionally has a vectorized numpy fallback, since its
loop form is too slow without compilation). The flag is read once at import.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("FAIRCLUSTER_NUMBA", "").strip().lower()
if _flag in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
else:
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False


def _jit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


INF = np.inf


# ---------------------------------------------------------------------------
# Lexicographic binary heap of (primary dist, secondary dist, node).
# Ties on both distances break toward the lowest node index.


@_jit
def _heap_less(d1a, d2a, na, d1b, d2b, nb):
    if d1a != d1b:
        return d1a < d1b
    if d2a != d2b:
        return d2a < d2b
    return na < nb


@_jit
def _heap_push(h1, h2, hn, size, d1, d2, node):
    i = size
    h1[i] = d1
    h2[i] = d2
    hn[i] = node
    while i > 0:
        p = (i - 1) >> 1
        if _heap_less(h1[i], h2[i], hn[i], h1[p], h2[p], hn[p]):
            h1[i], h1[p] = h1[p], h1[i]
            h2[i], h2[p] = h2[p], h2[i]
            hn[i], hn[p] = hn[p], hn[i]
            i = p
        else:
            break
    return size + 1


@_jit
def _heap_pop(h1, h2, hn, size):
    d1 = h1[0]
    d2 = h2[0]
    node = hn[0]
    size -= 1
    h1[0] = h1[size]
    h2[0] = h2[size]
    hn[0] = hn[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < size and _heap_less(h1[l], h2[l], hn[l], h1[m], h2[m], hn[m]):
            m = l
        if r < size and _heap_less(h1[r], h2[r], hn[r], h1[m], h2[m], hn[m]):
            m = r
        if m == i:
            break
        h1[i], h1[m] = h1[m], h1[i]
        h2[i], h2[m] = h2[m], h2[i]
        hn[i], hn[m] = hn[m], hn[i]
        i = m
    return d1, d2, node, size


# ---------------------------------------------------------------------------
# Min-cost flow: successive shortest augmenting paths with node potentials.
#
# Costs must be nonnegative and finite. The objective is lexicographic in
# (cost, tie): among minimum-cost flows the one minimizing the total tie
# weight is returned, which callers use to break exact cost ties.


@_jit
def mcf_solve_arrays(n_nodes, efrom, eto, ecap, ecost, etie, supply):
    """Returns (units_routed, total_supply, flow_per_edge)."""
    m = efrom.shape[0]
    src = n_nodes
    sink = n_nodes + 1
    nv = n_nodes + 2

    n_extra = 0
    total_supply = 0
    for v in range(n_nodes):
        if supply[v] != 0:
            n_extra += 1
        if supply[v] > 0:
            total_supply += supply[v]

    na = 2 * (m + n_extra)
    arc_tail = np.empty(na, np.int64)
    arc_to = np.empty(na, np.int64)
    arc_cap = np.empty(na, np.int64)
    arc_cost = np.empty(na, np.float64)
    arc_tie = np.empty(na, np.float64)

    for e in range(m):
        a = 2 * e
        arc_tail[a] = efrom[e]
        arc_to[a] = eto[e]
        arc_cap[a] = ecap[e]
        arc_cost[a] = ecost[e]
        arc_tie[a] = etie[e]
        arc_tail[a + 1] = eto[e]
        arc_to[a + 1] = efrom[e]
        arc_cap[a + 1] = 0
        arc_cost[a + 1] = -ecost[e]
        arc_tie[a + 1] = -etie[e]

    a = 2 * m
    for v in range(n_nodes):
        if supply[v] > 0:
            arc_tail[a] = src
            arc_to[a] = v
            arc_cap[a] = supply[v]
        elif supply[v] < 0:
            arc_tail[a] = v
            arc_to[a] = sink
            arc_cap[a] = -supply[v]
        else:
            continue
        arc_cost[a] = 0.0
        arc_tie[a] = 0.0
        arc_tail[a + 1] = arc_to[a]
        arc_to[a + 1] = arc_tail[a]
        arc_cap[a + 1] = 0
        arc_cost[a + 1] = 0.0
        arc_tie[a + 1] = 0.0
        a += 2

    # CSR adjacency sorted by (tail, arc index): deterministic scan order.
    deg = np.zeros(nv + 1, np.int64)
    for i in range(na):
        deg[arc_tail[i] + 1] += 1
    for v in range(nv):
        deg[v + 1] += deg[v]
    adj = np.empty(na, np.int64)
    fill = deg[:nv].copy()
    for i in range(na):
        t = arc_tail[i]
        adj[fill[t]] = i
        fill[t] += 1

    pot1 = np.zeros(nv, np.float64)
    pot2 = np.zeros(nv, np.float64)
    dist1 = np.empty(nv, np.float64)
    dist2 = np.empty(nv, np.float64)
    visited = np.empty(nv, np.uint8)
    parent = np.empty(nv, np.int64)
    h1 = np.empty(na + 2, np.float64)
    h2 = np.empty(na + 2, np.float64)
    hn = np.empty(na + 2, np.int64)

    routed = 0
    while routed < total_supply:
        for v in range(nv):
            dist1[v] = INF
            dist2[v] = 0.0
            visited[v] = 0
            parent[v] = -1
        dist1[src] = 0.0
        heap_size = _heap_push(h1, h2, hn, 0, 0.0, 0.0, src)

        while heap_size > 0:
            d1, d2, u, heap_size = _heap_pop(h1, h2, hn, heap_size)
            if visited[u] == 1:
                continue
            visited[u] = 1
            if u == sink:
                break
            for ptr in range(deg[u], deg[u + 1]):
                arc = adj[ptr]
                if arc_cap[arc] <= 0:
                    continue
                v = arc_to[arc]
                if visited[v] == 1:
                    continue
                nd1 = d1 + arc_cost[arc] + pot1[u] - pot1[v]
                nd2 = d2 + arc_tie[arc] + pot2[u] - pot2[v]
                if _heap_less(nd1, nd2, v, dist1[v], dist2[v], v):
                    dist1[v] = nd1
                    dist2[v] = nd2
                    parent[v] = arc
                    heap_size = _heap_push(h1, h2, hn, heap_size, nd1, nd2, v)

        if visited[sink] == 0:
            break

        t1 = dist1[sink]
        t2 = dist2[sink]
        for v in range(nv):
            if visited[v] == 1:
                pot1[v] += dist1[v]
                pot2[v] += dist2[v]
            else:
                pot1[v] += t1
                pot2[v] += t2

        bottleneck = total_supply - routed
        v = sink
        while v != src:
            arc = parent[v]
            if arc_cap[arc] < bottleneck:
                bottleneck = arc_cap[arc]
            v = arc_tail[arc]
        v = sink
        while v != src:
            arc = parent[v]
            arc_cap[arc] -= bottleneck
            arc_cap[arc ^ 1] += bottleneck
            v = arc_tail[arc]
        routed += bottleneck

    flow = np.empty(m, np.int64)
    for e in range(m):
        flow[e] = arc_cap[2 * e + 1]
    return routed, total_supply, flow


# ---------------------------------------------------------------------------
# Maximum bipartite matching on a dense weight matrix restricted to edges of
# weight <= tau (Kuhn's augmenting paths; left nodes and right candidates are
# scanned in ascending order, so the result is deterministic).


@_jit
def kuhn_threshold_match(w, tau):
    nl = w.shape[0]
    nr = w.shape[1]
    match_l = np.full(nl, -1, np.int64)
    match_r = np.full(nr, -1, np.int64)
    seen = np.empty(nr, np.uint8)
    path_l = np.empty(nl + 1, np.int64)
    path_r = np.empty(nl + 1, np.int64)
    next_r = np.empty(nl + 1, np.int64)

    for l0 in range(nl):
        for j in range(nr):
            seen[j] = 0
        depth = 0
        path_l[0] = l0
        next_r[0] = 0
        augmented = False
        while depth >= 0 and not augmented:
            l = path_l[depth]
            r = next_r[depth]
            moved = False
            while r < nr:
                if seen[r] == 0 and w[l, r] <= tau:
                    seen[r] = 1
                    next_r[depth] = r + 1
                    path_r[depth] = r
                    if match_r[r] == -1:
                        for i in range(depth, -1, -1):
                            match_l[path_l[i]] = path_r[i]
                            match_r[path_r[i]] = path_l[i]
                        augmented = True
                    else:
                        depth += 1
                        path_l[depth] = match_r[r]
                        next_r[depth] = 0
                    moved = True
                    break
                r += 1
            if not moved:
                depth -= 1
    return match_l, match_r


# ---------------------------------------------------------------------------
# Dense square min-cost assignment (shortest augmenting paths with dual
# potentials). Returns the column assigned to each row plus the potentials,
# which certify optimality: cost[i, j] - u[i] - v[j] >= 0 with equality on
# matched pairs.


@_jit
def assignment_dual(cost):
    n = cost.shape[0]
    u = np.zeros(n + 1, np.float64)
    v = np.zeros(n + 1, np.float64)
    p = np.full(n + 1, n, np.int64)  # row matched to each column; n = free
    way = np.zeros(n + 1, np.int64)
    minv = np.empty(n + 1, np.float64)
    used = np.empty(n + 1, np.uint8)

    for i in range(n):
        p[n] = i
        j0 = n
        for j in range(n + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(n):
                if used[j] == 0:
                    cur = cost[i0, j] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j] == 1:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == n:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == n:
                break

    row_to_col = np.empty(n, np.int64)
    for j in range(n):
        row_to_col[p[j]] = j
    return row_to_col, u[:n], v[:n]


# ---------------------------------------------------------------------------
# Weighted k-median single-swap local search over a dense candidate distance
# matrix. Best-improvement: every (center slot, candidate) swap is scored and
# the largest strict improvement is applied; ties go to the first swap in
# (slot, candidate id) scan order. Two interchangeable implementations: a
# loop kernel for numba and a vectorized numpy fallback.


def _local_search_loops(D, wgt, centers0, rel_tol):
    m = D.shape[0]
    k = centers0.shape[0]
    centers = centers0.copy()
    is_center = np.zeros(m, np.uint8)
    for i in range(k):
        is_center[centers[i]] = 1

    d1 = np.empty(m, np.float64)
    d2 = np.empty(m, np.float64)
    a1 = np.empty(m, np.int64)

    while True:
        cost = 0.0
        for x in range(m):
            b1 = INF
            b2 = INF
            bi = -1
            for i in range(k):
                d = D[x, centers[i]]
                if d < b1:
                    b2 = b1
                    b1 = d
                    bi = i
                elif d < b2:
                    b2 = d
            d1[x] = b1
            d2[x] = b2
            a1[x] = bi
            cost += wgt[x] * b1

        best = cost
        best_slot = -1
        best_cand = -1
        for slot in range(k):
            for c in range(m):
                if is_center[c] == 1:
                    continue
                newcost = 0.0
                ok = True
                for x in range(m):
                    if a1[x] == slot:
                        base = d2[x]
                    else:
                        base = d1[x]
                    d = D[x, c]
                    if base < d:
                        d = base
                    newcost += wgt[x] * d
                    if newcost >= best:
                        ok = False
                        break
                if ok and newcost < best:
                    best = newcost
                    best_slot = slot
                    best_cand = c
        if best_slot >= 0 and (cost - best) > rel_tol * cost:
            is_center[centers[best_slot]] = 0
            centers[best_slot] = best_cand
            is_center[best_cand] = 1
        else:
            return centers


def _local_search_numpy(D, wgt, centers0, rel_tol):
    m = D.shape[0]
    k = centers0.shape[0]
    centers = centers0.copy()

    while True:
        sub = D[:, centers]                       # (m, k)
        a1 = np.argmin(sub, axis=1)
        d1 = sub[np.arange(m), a1]
        masked = sub.copy()
        masked[np.arange(m), a1] = INF
        d2 = np.min(masked, axis=1) if k > 1 else np.full(m, INF)
        cost = float(wgt @ d1)

        is_center = np.zeros(m, bool)
        is_center[centers] = True
        cands = np.flatnonzero(~is_center)
        if cands.size == 0:
            return centers
        Dc = D[:, cands]                          # (m, nc)
        scores = np.empty((k, cands.size))
        for slot in range(k):
            base = np.where(a1 == slot, d2, d1)
            scores[slot] = wgt @ np.minimum(base[:, None], Dc)
        flat = int(np.argmin(scores))
        best = float(scores.flat[flat])
        if (cost - best) > rel_tol * cost:
            slot, ci = divmod(flat, cands.size)
            centers[slot] = cands[ci]
        else:
            return centers


if NUMBA_ENABLED:
    local_search_core = numba.njit(cache=True)(_local_search_loops)
else:
    local_search_core = _local_search_numpy


def warm_up():
    """Force compilation of every kernel on tiny inputs (no-op without numba)."""
    w = np.array([[1.0, 2.0], [2.0, 1.0]])
    kuhn_threshold_match(w, 1.5)
    assignment_dual(w)
    mcf_solve_arrays(
        2,
        np.array([0], np.int64),
        np.array([1], np.int64),
        np.array([1], np.int64),
        np.array([1.0]),
        np.array([0.0]),
        np.array([1, -1], np.int64),
    )
    local_search_core(w, np.ones(2), np.array([0], np.int64), 1e-9)
