# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled kernels; must stay result-identical to ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, lgamma, NAN
from libcpp.vector cimport vector
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort

cnp.import_array()

ctypedef cnp.int64_t i64


cdef class _Draws:
    cdef object stream
    cdef double[::1] buf
    cdef Py_ssize_t pos

    def __init__(self, stream):
        self.stream = stream
        self.buf = stream.block()
        self.pos = 0

    cdef inline double next(self) except? -1.0:
        if self.pos == self.buf.shape[0]:
            self.buf = self.stream.block()
            self.pos = 0
        self.pos += 1
        return self.buf[self.pos - 1]


cdef Py_ssize_t _layers(const i64[::1] ip, const i64[::1] ix, i64 root,
                        i64[::1] order, i64[::1] parent, i64[::1] depth) noexcept nogil:
    # parent/depth must be -1 filled; returns number of visited nodes
    cdef Py_ssize_t head = 0, tail = 1, layer_end, start, k
    cdef i64 u, w, d = 0
    parent[root] = root
    depth[root] = 0
    order[0] = root
    while head < tail:
        d += 1
        layer_end = tail
        start = tail
        while head < layer_end:
            u = order[head]
            head += 1
            for k in range(ip[u], ip[u + 1]):
                w = ix[k]
                if depth[w] < 0:
                    depth[w] = d
                    parent[w] = u
                    order[tail] = w
                    tail += 1
        if tail - start > 1:
            sort(&order[start], &order[start] + (tail - start))
    return tail


def bfs_layers(indptr, indices, root):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    order = np.empty(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t m = _layers(ip, ix, root, order, parent, depth)
    return order[:m], parent, depth


cdef double _log_r(i64[::1] order, i64[::1] parent, i64[::1] size, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    cdef i64 u, p
    cdef double acc = 0.0
    for j in range(n):
        size[j] = 1
    for j in range(n - 1, -1, -1):
        u = order[j]
        acc += log(<double>size[u])
        p = parent[u]
        if p != u:
            size[p] += size[u]
    return lgamma(n + 1.0) - acc


cdef Py_ssize_t _queue(const i64[::1] ip, const i64[::1] ix, i64 root,
                       i64[::1] order, i64[::1] parent) noexcept nogil:
    # plain FIFO BFS; parent must be -1 filled; returns visited count
    cdef Py_ssize_t head = 0, tail = 1, k
    cdef i64 u, w
    parent[root] = root
    order[0] = root
    while head < tail:
        u = order[head]
        head += 1
        for k in range(ip[u], ip[u + 1]):
            w = ix[k]
            if parent[w] < 0:
                parent[w] = u
                order[tail] = w
                tail += 1
    return tail


cdef Py_ssize_t _queue_pos(const i64[::1] ip, const i64[::1] ix, i64 root, i64[::1] order,
                           i64[::1] ppos, cnp.uint8_t[::1] seen) noexcept nogil:
    # FIFO BFS recording each entry's parent position in the queue (so ppos
    # is non-decreasing); a byte array keeps the visited test in cache
    cdef Py_ssize_t head = 0, tail = 1, k
    cdef i64 u, w
    seen[root] = 1
    order[0] = root
    ppos[0] = 0
    while head < tail:
        u = order[head]
        for k in range(ip[u], ip[u + 1]):
            w = ix[k]
            if not seen[w]:
                seen[w] = 1
                order[tail] = w
                ppos[tail] = head
                tail += 1
        head += 1
    return tail


def tree_scores(indptr, indices, root):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    order_a = np.empty(n, dtype=np.int64)
    parent_a = np.empty(n, dtype=np.int64)
    size_a = np.empty(n, dtype=np.int64)
    log_r_a = np.empty(n, dtype=np.float64)
    cdef i64[::1] order = order_a, parent = parent_a, size = size_a
    cdef double[::1] log_r = log_r_a
    cdef cnp.uint8_t[::1] seen = np.zeros(n, dtype=np.uint8)
    # both passes run over queue positions so parent lookups stream forward
    cdef i64[::1] ppos = np.empty(n, dtype=np.int64)
    cdef i64[::1] spos = np.ones(n, dtype=np.int64)
    cdef double[::1] lpos = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t j, m
    cdef i64 t, r = root
    cdef double acc = 0.0
    with nogil:
        m = _queue_pos(ip, ix, r, order, ppos, seen)
    if m != n:
        raise ValueError("tree_scores needs a connected graph")
    with nogil:
        for j in range(n - 1, 0, -1):
            acc += log(<double>spos[j])
            spos[ppos[j]] += spos[j]
        acc += log(<double>n)
        lpos[0] = lgamma(n + 1.0) - acc
        for j in range(1, n):
            t = spos[j]
            lpos[j] = lpos[ppos[j]] + log(<double>t) - log(<double>(n - t))
        for j in range(n):
            size[order[j]] = spos[j]
            log_r[order[j]] = lpos[j]
            parent[order[j]] = order[ppos[j]]
    return order_a, parent_a, size_a, log_r_a


def tree_log_r(indptr, indices, root):
    """ln R(v) only; skips the size and parent outputs of tree_scores."""
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    log_r_a = np.empty(n, dtype=np.float64)
    cdef double[::1] log_r = log_r_a
    cdef i64[::1] order = np.empty(n, dtype=np.int64)
    cdef i64[::1] ppos = np.empty(n, dtype=np.int64)
    cdef i64[::1] spos = np.ones(n, dtype=np.int64)
    cdef double[::1] lpos = np.empty(n, dtype=np.float64)
    cdef cnp.uint8_t[::1] seen = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t j, m
    cdef i64 t, r = root
    cdef double acc = 0.0
    with nogil:
        m = _queue_pos(ip, ix, r, order, ppos, seen)
    if m != n:
        raise ValueError("tree_log_r needs a connected graph")
    with nogil:
        for j in range(n - 1, 0, -1):
            acc += log(<double>spos[j])
            spos[ppos[j]] += spos[j]
        acc += log(<double>n)
        lpos[0] = lgamma(n + 1.0) - acc
        for j in range(1, n):
            t = spos[j]
            lpos[j] = lpos[ppos[j]] + log(<double>t) - log(<double>(n - t))
        for j in range(n):
            log_r[order[j]] = lpos[j]
    return log_r_a


def bfs_scores(indptr, indices, degree):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[::1] deg = np.ascontiguousarray(degree, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    log_r_a = np.empty(n, dtype=np.float64)
    dist_a = np.empty(n, dtype=np.int64)
    log_p_a = np.empty(n, dtype=np.float64)
    cdef double[::1] log_r = log_r_a, log_p = log_p_a
    cdef i64[::1] dist = dist_a
    cdef i64[::1] order = np.empty(n, dtype=np.int64)
    cdef i64[::1] parent = np.empty(n, dtype=np.int64)
    cdef i64[::1] depth = np.empty(n, dtype=np.int64)
    cdef i64[::1] size = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t v, j, k
    cdef i64 total, nk
    cdef double lp
    with nogil:
        for v in range(n):
            for j in range(n):
                parent[j] = -1
                depth[j] = -1
            _layers(ip, ix, v, order, parent, depth)
            log_r[v] = _log_r(order, parent, size, n)
            total = 0
            for j in range(n):
                total += depth[j]
            dist[v] = total
            nk = deg[order[0]]
            lp = 0.0
            for k in range(1, n):
                if nk <= 0:
                    lp = NAN
                    break
                lp -= log(<double>nk)
                nk += deg[order[k]] - 2
            log_p[v] = lp
    return log_r_a, dist_a, log_p_a


def spread_count(indptr, indices, source, n, stream):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t nn = ip.shape[0] - 1
    cdef Py_ssize_t target = n
    cdef _Draws draws = _Draws(stream)
    cdef i64 src = source
    infected_a = np.zeros(nn, dtype=np.uint8)
    cdef cnp.uint8_t[::1] infected = infected_a
    order_a = np.empty(target, dtype=np.int64)
    times_a = np.empty(target, dtype=np.float64)
    parent_a = np.empty(target, dtype=np.int64)
    bsize_a = np.empty(target, dtype=np.int64)
    cdef i64[::1] order = order_a, parent = parent_a, bsize = bsize_a
    cdef double[::1] times = times_a
    cdef vector[i64] cand_w, cand_u
    cdef Py_ssize_t count = 1, m, i, k
    cdef i64 w = 0, u = 0, x, b
    cdef double t = 0.0
    cdef bint found
    infected[src] = 1
    order[0] = src
    times[0] = 0.0
    parent[0] = src
    for k in range(ip[src], ip[src + 1]):
        cand_w.push_back(ix[k])
        cand_u.push_back(src)
    b = cand_w.size()
    bsize[0] = b
    while count < target:
        found = False
        while cand_w.size() > 0:
            m = cand_w.size()
            i = <Py_ssize_t>(draws.next() * m)
            if i == m:
                i = m - 1
            w = cand_w[i]
            u = cand_u[i]
            cand_w[i] = cand_w.back()
            cand_u[i] = cand_u.back()
            cand_w.pop_back()
            cand_u.pop_back()
            if not infected[w]:
                found = True
                break
        if not found:
            break
        t += -log1p(-draws.next()) / b
        infected[w] = 1
        order[count] = w
        times[count] = t
        parent[count] = u
        for k in range(ip[w], ip[w + 1]):
            x = ix[k]
            if infected[x]:
                b -= 1
            else:
                b += 1
                cand_w.push_back(x)
                cand_u.push_back(w)
        bsize[count] = b
        count += 1
    return (order_a[:count], times_a[:count], parent_a[:count], bsize_a[:count], count)


ctypedef pair[double, i64] Event


def spread_count_regular(d, n, stream):
    cdef i64 dd = d
    cdef Py_ssize_t target = n
    cdef _Draws draws = _Draws(stream)
    cdef i64 limit = (<i64>1 << 62) // (dd - 1 if dd > 1 else 1)
    order_a = np.empty(target, dtype=np.int64)
    times_a = np.empty(target, dtype=np.float64)
    pstep_a = np.empty(target, dtype=np.int64)
    bsize_a = np.empty(target, dtype=np.int64)
    cdef i64[::1] order = order_a, pstep = pstep_a, bsize = bsize_a
    cdef double[::1] times = times_a
    cdef vector[i64] cand_w, cand_u
    cdef Py_ssize_t count = 1, m, i
    cdef i64 w, u, x, first, b = dd
    cdef double t = 0.0
    order[0] = 0
    times[0] = 0.0
    pstep[0] = 0
    bsize[0] = b
    for x in range(1, dd + 1):
        cand_w.push_back(x)
        cand_u.push_back(0)
    while count < target:
        m = cand_w.size()
        i = <Py_ssize_t>(draws.next() * m)
        if i == m:
            i = m - 1
        w = cand_w[i]
        u = cand_u[i]
        cand_w[i] = cand_w.back()
        cand_u[i] = cand_u.back()
        cand_w.pop_back()
        cand_u.pop_back()
        t += -log1p(-draws.next()) / b
        order[count] = w
        times[count] = t
        pstep[count] = u
        b += dd - 2
        if w >= limit:
            raise OverflowError("regular tree node ids exceed 62 bits")
        first = dd + 1 + (w - 1) * (dd - 1)
        for x in range(first, first + dd - 1):
            cand_w.push_back(x)
            cand_u.push_back(count)
        bsize[count] = b
        count += 1
    return order_a, times_a, pstep_a, bsize_a


def spread_time(indptr, indices, source, double tmax, stream):
    cdef const i64[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t nn = ip.shape[0] - 1
    cdef _Draws draws = _Draws(stream)
    cdef i64 src = source
    infected_a = np.zeros(nn, dtype=np.uint8)
    cdef cnp.uint8_t[::1] infected = infected_a
    cdef vector[i64] order, parent, ev_w, ev_u
    cdef vector[double] times
    # max-heap on (-time, -seq): earliest time first, insertion order on ties
    cdef priority_queue[Event] heap
    cdef Event top
    cdef Py_ssize_t k
    cdef i64 w, u, x, seq
    cdef double te, tx
    infected[src] = 1
    order.push_back(src)
    times.push_back(0.0)
    parent.push_back(src)
    for k in range(ip[src], ip[src + 1]):
        x = ix[k]
        te = -log1p(-draws.next())
        if te <= tmax:
            seq = ev_w.size()
            ev_w.push_back(x)
            ev_u.push_back(src)
            heap.push(Event(-te, -seq))
    while not heap.empty():
        top = heap.top()
        heap.pop()
        te = -top.first
        seq = -top.second
        w = ev_w[seq]
        if infected[w]:
            continue
        u = ev_u[seq]
        infected[w] = 1
        order.push_back(w)
        times.push_back(te)
        parent.push_back(u)
        for k in range(ip[w], ip[w + 1]):
            x = ix[k]
            if not infected[x]:
                tx = te - log1p(-draws.next())
                if tx <= tmax:
                    seq = ev_w.size()
                    ev_w.push_back(x)
                    ev_u.push_back(w)
                    heap.push(Event(-tx, -seq))
    cdef Py_ssize_t m = order.size()
    order_a = np.empty(m, dtype=np.int64)
    times_a = np.empty(m, dtype=np.float64)
    parent_a = np.empty(m, dtype=np.int64)
    cdef i64[::1] oa = order_a, pa = parent_a
    cdef double[::1] ta = times_a
    for k in range(m):
        oa[k] = order[k]
        pa[k] = parent[k]
        ta[k] = times[k]
    return order_a, times_a, parent_a
