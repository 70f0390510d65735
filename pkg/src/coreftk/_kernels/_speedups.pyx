# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of coreftk._kernels.pure.

Semantics (including tie-breaking and floating-point operation order)
must match the pure backend bit for bit; the test suite enforces this.
"""

import numpy as np

cdef double INF = float("inf")

LINKAGE_AVERAGE = 0
LINKAGE_MAX = 1


def assignment_max(sim):
    """See coreftk._kernels.pure.assignment_max."""
    cdef Py_ssize_t n = len(sim)
    cdef Py_ssize_t m = len(sim[0]) if n else 0
    if n == 0 or m == 0:
        return [-1] * n, 0.0

    cdef bint transposed = n > m
    arr = np.asarray(sim, dtype=np.float64)
    if transposed:
        arr = np.ascontiguousarray(arr.T)
    cdef double[:, :] a = arr
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t cols = a.shape[1]

    u_arr = np.zeros(rows + 1, dtype=np.float64)
    v_arr = np.zeros(cols + 1, dtype=np.float64)
    match_arr = np.zeros(cols + 1, dtype=np.intp)
    way_arr = np.zeros(cols + 1, dtype=np.intp)
    minv_arr = np.empty(cols + 1, dtype=np.float64)
    used_arr = np.empty(cols + 1, dtype=np.uint8)
    cdef double[:] u = u_arr
    cdef double[:] v = v_arr
    cdef Py_ssize_t[:] match = match_arr
    cdef Py_ssize_t[:] way = way_arr
    cdef double[:] minv = minv_arr
    cdef unsigned char[:] used = used_arr

    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur

    for i in range(1, rows + 1):
        match[0] = i
        j0 = 0
        for j in range(cols + 1):
            minv[j] = INF
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = match[j0]
            delta = INF
            j1 = -1
            for j in range(1, cols + 1):
                if not used[j]:
                    cur = -a[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(cols + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    row_to_col = [-1] * rows
    cdef double total = 0.0
    for j in range(1, cols + 1):
        i = match[j]
        if i:
            row_to_col[i - 1] = j - 1
            total += a[i - 1, j - 1]

    if transposed:
        out = [-1] * n
        for i in range(rows):
            j = row_to_col[i]
            if j >= 0:
                out[j] = i
        return out, total
    return row_to_col, total


def mtld_factor_count(type_ids, double threshold):
    """See coreftk._kernels.pure.mtld_factor_count."""
    ids = np.asarray(type_ids, dtype=np.int64)
    cdef long long[:] tv = ids
    cdef Py_ssize_t n = tv.shape[0]
    if n == 0:
        return 0.0
    # type ids are small non-negative ints (dense vocabulary); a seen-flag
    # array is enough to track distinct types per factor segment
    cdef long long max_id = 0
    cdef Py_ssize_t k
    for k in range(n):
        if tv[k] > max_id:
            max_id = tv[k]
    seen_arr = np.zeros(max_id + 1, dtype=np.uint8)
    cdef unsigned char[:] seen = seen_arr
    cdef double factors = 0.0
    cdef Py_ssize_t types = 0, tokens = 0
    cdef double ttr
    for k in range(n):
        tokens += 1
        if not seen[tv[k]]:
            seen[tv[k]] = 1
            types += 1
        if (<double>types) / tokens < threshold:
            factors += 1.0
            seen_arr[:] = 0
            types = 0
            tokens = 0
    if tokens:
        ttr = (<double>types) / tokens
        factors += (1.0 - ttr) / (1.0 - threshold)
    return factors


def union_find_components(Py_ssize_t n, edges):
    """See coreftk._kernels.pure.union_find_components."""
    parent_arr = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[:] parent = parent_arr
    edge_arr = np.asarray(list(edges), dtype=np.intp)
    if edge_arr.size == 0:
        edge_arr = edge_arr.reshape(0, 2)
    cdef Py_ssize_t[:, :] ev = edge_arr
    cdef Py_ssize_t k, i, j, ri, rj, x, root

    for k in range(ev.shape[0]):
        i = ev[k, 0]
        j = ev[k, 1]
        root = i
        while parent[root] != root:
            root = parent[root]
        x = i
        while parent[x] != root:
            parent[x], x = root, parent[x]
        ri = root
        root = j
        while parent[root] != root:
            root = parent[root]
        x = j
        while parent[x] != root:
            parent[x], x = root, parent[x]
        rj = root
        if ri != rj:
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj

    out = []
    for i in range(n):
        root = i
        while parent[root] != root:
            root = parent[root]
        out.append(root)
    return out


def agglomerate(sim, double tau, int linkage):
    """See coreftk._kernels.pure.agglomerate."""
    arr = np.array(sim, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = arr.shape[0] if arr.ndim == 2 else len(sim)
    if n == 0:
        return []
    cdef double[:, :] agg = arr
    active_arr = np.ones(n, dtype=np.uint8)
    size_arr = np.ones(n, dtype=np.intp)
    merged_arr = np.full(n, -1, dtype=np.intp)
    cdef unsigned char[:] active = active_arr
    cdef Py_ssize_t[:] size = size_arr
    cdef Py_ssize_t[:] merged_into = merged_arr

    cdef Py_ssize_t i, j, k, bi, bj
    cdef double best, val, merged

    while True:
        best = -INF
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                if linkage == 0:
                    val = agg[i, j] / (size[i] * size[j])
                else:
                    val = agg[i, j]
                if val > best:
                    best = val
                    bi = i
                    bj = j
        if bi < 0 or best < tau:
            break
        for k in range(n):
            if active[k] and k != bi and k != bj:
                if linkage == 0:
                    merged = agg[bi, k] + agg[bj, k]
                else:
                    merged = agg[bi, k] if agg[bi, k] >= agg[bj, k] else agg[bj, k]
                agg[bi, k] = merged
                agg[k, bi] = merged
        size[bi] += size[bj]
        active[bj] = 0
        merged_into[bj] = bi

    labels = []
    for i in range(n):
        j = i
        while merged_into[j] != -1:
            j = merged_into[j]
        labels.append(j)
    return labels
