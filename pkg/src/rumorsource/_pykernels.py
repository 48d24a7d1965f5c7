"""Pure-Python reference kernels.

Same signatures, same random-number consumption and same results as the
compiled ``_ckernels`` module; used when the extension is not built or when
``RUMORSOURCE_PURE=1`` is set.  All graphs arrive as CSR arrays over dense
indices with every row sorted ascending.
"""

import heapq
import math

import numpy as np


class _Draws:
    __slots__ = ("stream", "buf", "pos")

    def __init__(self, stream):
        self.stream = stream
        self.buf = stream.block().tolist()
        self.pos = 0

    def next(self):
        if self.pos == len(self.buf):
            self.buf = self.stream.block().tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _layers(ip, ix, root, n):
    parent = [-1] * n
    depth = [-1] * n
    parent[root] = root
    depth[root] = 0
    order = [root]
    layer = [root]
    d = 0
    while layer:
        d += 1
        nxt = []
        for u in layer:
            for k in range(ip[u], ip[u + 1]):
                w = ix[k]
                if depth[w] < 0:
                    # layer is scanned in ascending order, so the first
                    # discoverer is the lowest-id parent
                    depth[w] = d
                    parent[w] = u
                    nxt.append(w)
        nxt.sort()
        order.extend(nxt)
        layer = nxt
    return order, parent, depth


def bfs_layers(indptr, indices, root):
    n = len(indptr) - 1
    order, parent, depth = _layers(indptr.tolist(), indices.tolist(), int(root), n)
    return (np.asarray(order, dtype=np.int64), np.asarray(parent, dtype=np.int64),
            np.asarray(depth, dtype=np.int64))


def _log_r(order, parent, n_total, log):
    size = [1] * len(parent)
    acc = 0.0
    for u in reversed(order):
        acc += log(size[u])
        p = parent[u]
        if p != u:
            size[p] += size[u]
    return math.lgamma(n_total + 1) - acc, size


def tree_scores(indptr, indices, root):
    """Subtree sizes rooted at ``root`` and ln R(v) for every node of a tree.

    ``order`` is plain FIFO BFS order (layers unsorted: on a tree the parent
    of each node is unique, so sorting would buy nothing and cost N log N).
    """
    n = len(indptr) - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    root = int(root)
    parent = [-1] * n
    parent[root] = root
    order = [root]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for k in range(ip[u], ip[u + 1]):
            w = ix[k]
            if parent[w] < 0:
                parent[w] = u
                order.append(w)
    if len(order) != n:
        raise ValueError("tree_scores needs a connected graph")
    log = math.log
    log_root, size = _log_r(order, parent, n, log)
    log_r = [0.0] * n
    log_r[root] = log_root
    for u in order:
        if u != root:
            t = size[u]
            log_r[u] = log_r[parent[u]] + log(t) - log(n - t)
    return (np.asarray(order, dtype=np.int64), np.asarray(parent, dtype=np.int64),
            np.asarray(size, dtype=np.int64), np.asarray(log_r, dtype=np.float64))


def tree_log_r(indptr, indices, root):
    """ln R(v) only (the last output of :func:`tree_scores`)."""
    try:
        return tree_scores(indptr, indices, root)[3]
    except ValueError:
        raise ValueError("tree_log_r needs a connected graph") from None


def bfs_scores(indptr, indices, degree):
    """Per-root BFS-tree scores on a connected graph.

    Returns ``(log_r, dist, log_p)``: ln R(v, T_bfs(v)), the hop-distance sum
    D(v), and ln P(sigma_v* | v) from the boundary recursion with the given
    (host) degrees; ``log_p`` is NaN where the recursion hits n_k <= 0.
    """
    n = len(indptr) - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    deg = [int(d) for d in degree]
    log = math.log
    log_r = np.empty(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    log_p = np.empty(n, dtype=np.float64)
    for v in range(n):
        order, parent, depth = _layers(ip, ix, v, n)
        log_r[v], _ = _log_r(order, parent, n, log)
        dist[v] = sum(depth)
        nk = deg[order[0]]
        lp = 0.0
        for k in range(1, n):
            if nk <= 0:
                lp = math.nan
                break
            lp -= log(nk)
            nk += deg[order[k]] - 2
        log_p[v] = lp
    return log_r, dist, log_p


def spread_count(indptr, indices, source, n, stream):
    """Embedded jump chain of SI spreading, stopped after ``n`` infections.

    Returns ``(order, times, parent, bsize, count)``; ``count < n`` means the
    source's component was exhausted.  ``bsize[k]`` is the boundary size
    after ``k + 1`` infections.
    """
    ip = indptr
    ix = indices
    draws = _Draws(stream)
    source = int(source)
    infected = bytearray(len(ip) - 1)
    order = [source]
    times = [0.0]
    parent = [source]
    infected[source] = 1
    cand_w = []
    cand_u = []
    for k in range(ip[source], ip[source + 1]):
        cand_w.append(int(ix[k]))
        cand_u.append(source)
    b = len(cand_w)
    bsize = [b]
    t = 0.0
    log1p = math.log1p
    while len(order) < n:
        while cand_w:
            m = len(cand_w)
            i = int(draws.next() * m)
            if i == m:
                i = m - 1
            w = cand_w[i]
            u = cand_u[i]
            cand_w[i] = cand_w[-1]
            cand_u[i] = cand_u[-1]
            cand_w.pop()
            cand_u.pop()
            if not infected[w]:
                break
        else:
            break
        t += -log1p(-draws.next()) / b
        infected[w] = 1
        order.append(w)
        times.append(t)
        parent.append(u)
        for k in range(ip[w], ip[w + 1]):
            x = int(ix[k])
            if infected[x]:
                b -= 1
            else:
                b += 1
                cand_w.append(x)
                cand_u.append(w)
        bsize.append(b)
    count = len(order)
    return (np.asarray(order, dtype=np.int64), np.asarray(times, dtype=np.float64),
            np.asarray(parent, dtype=np.int64), np.asarray(bsize, dtype=np.int64), count)


def spread_count_regular(d, n, stream):
    """:func:`spread_count` on the infinite d-regular tree, source 0.

    Node ids follow the breadth-first numbering of :func:`regular_tree`
    (children of x >= 1 are d + 1 + (x - 1)(d - 1) onwards), so the result
    equals ``spread_count`` on any finite ball the rumor does not reach the
    edge of.  Returns ``(order, times, parent_step, bsize)`` where
    ``parent_step[k]`` is the infection step of node k's parent.
    """
    draws = _Draws(stream)
    limit = (2 ** 62) // max(d - 1, 1)
    order = [0]
    times = [0.0]
    pstep = [0]
    cand_w = list(range(1, d + 1))
    cand_u = [0] * d
    b = d
    bsize = [b]
    t = 0.0
    log1p = math.log1p
    while len(order) < n:
        m = len(cand_w)
        i = int(draws.next() * m)
        if i == m:
            i = m - 1
        w = cand_w[i]
        u = cand_u[i]
        cand_w[i] = cand_w[-1]
        cand_u[i] = cand_u[-1]
        cand_w.pop()
        cand_u.pop()
        t += -log1p(-draws.next()) / b
        k = len(order)
        order.append(w)
        times.append(t)
        pstep.append(u)
        b += d - 2
        if w >= limit:
            raise OverflowError("regular tree node ids exceed 62 bits")
        first = d + 1 + (w - 1) * (d - 1)
        for x in range(first, first + d - 1):
            cand_w.append(x)
            cand_u.append(k)
        bsize.append(b)
    return (np.asarray(order, dtype=np.int64), np.asarray(times, dtype=np.float64),
            np.asarray(pstep, dtype=np.int64), np.asarray(bsize, dtype=np.int64))


def spread_time(indptr, indices, source, tmax, stream):
    """Event-driven SI with i.i.d. Exp(1) edge delays, observed at ``tmax``.

    Each edge clock is drawn when its tail becomes infected; events later
    than ``tmax`` are drawn but never queued.
    """
    ip = indptr
    ix = indices
    draws = _Draws(stream)
    source = int(source)
    infected = bytearray(len(ip) - 1)
    infected[source] = 1
    order = [source]
    times = [0.0]
    parent = [source]
    heap = []
    seq = 0
    log1p = math.log1p
    push = heapq.heappush
    for k in range(ip[source], ip[source + 1]):
        x = int(ix[k])
        te = -log1p(-draws.next())
        if te <= tmax:
            push(heap, (te, seq, x, source))
            seq += 1
    while heap:
        te, _, w, u = heapq.heappop(heap)
        if infected[w]:
            continue
        infected[w] = 1
        order.append(w)
        times.append(te)
        parent.append(u)
        for k in range(ip[w], ip[w + 1]):
            x = int(ix[k])
            if not infected[x]:
                tx = te - log1p(-draws.next())
                if tx <= tmax:
                    push(heap, (tx, seq, x, w))
                    seq += 1
    return (np.asarray(order, dtype=np.int64), np.asarray(times, dtype=np.float64),
            np.asarray(parent, dtype=np.int64))
