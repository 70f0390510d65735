"""Pure-Python implementations of the numeric kernels.

This is the fallback backend; ``coreftk._kernels._speedups`` is the
compiled twin with identical semantics. Both must produce bit-identical
results: the test suite compares them on random inputs.
"""

from __future__ import annotations

INF = float("inf")


def assignment_max(sim) -> tuple[list[int], float]:
    """Maximum-weight one-to-one assignment of rows to columns.

    ``sim`` is an n x m matrix (sequence of row sequences). Returns
    ``(row_to_col, total)`` where ``row_to_col[i]`` is the column matched
    to row i (-1 if unmatched) and ``total`` is the matched weight sum.
    Every row is matched when n <= m, every column when m <= n.

    O(n^2 m) shortest-augmenting-path method over dual potentials.
    """
    n = len(sim)
    m = len(sim[0]) if n else 0
    if n == 0 or m == 0:
        return [-1] * n, 0.0

    transposed = n > m
    if transposed:
        a = [[sim[i][j] for i in range(n)] for j in range(m)]
        rows, cols = m, n
    else:
        a = [list(row) for row in sim]
        rows, cols = n, m

    # Minimize negated weights; 1-based arrays, column 0 is the virtual source.
    u = [0.0] * (rows + 1)
    v = [0.0] * (cols + 1)
    match = [0] * (cols + 1)  # match[j] = row occupying column j
    way = [0] * (cols + 1)
    for i in range(1, rows + 1):
        match[0] = i
        j0 = 0
        minv = [INF] * (cols + 1)
        used = [False] * (cols + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = INF
            j1 = -1
            row = a[i0 - 1]
            for j in range(1, cols + 1):
                if not used[j]:
                    cur = -row[j - 1] - u[i0] - v[j]
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
    total = 0.0
    for j in range(1, cols + 1):
        i = match[j]
        if i:
            row_to_col[i - 1] = j - 1
            total += a[i - 1][j - 1]

    if transposed:
        out = [-1] * n
        for r, c in enumerate(row_to_col):
            if c >= 0:
                out[c] = r
        return out, total
    return row_to_col, total


def mtld_factor_count(type_ids, threshold: float) -> float:
    """One-directional MTLD factor count (full factors plus the partial tail).

    ``type_ids`` is the token stream mapped to integer type ids. A factor
    completes whenever the running type-token ratio drops below
    ``threshold``; the unfinished tail contributes
    ``(1 - TTR_end) / (1 - threshold)``.
    """
    factors = 0.0
    types = set()
    tokens = 0
    for t in type_ids:
        tokens += 1
        types.add(t)
        if len(types) / tokens < threshold:
            factors += 1.0
            types.clear()
            tokens = 0
    if tokens:
        ttr = len(types) / tokens
        factors += (1.0 - ttr) / (1.0 - threshold)
    return factors


def union_find_components(n: int, edges) -> list[int]:
    """Connected-component labels for nodes 0..n-1.

    ``edges`` is an iterable of (i, j) pairs. Each node's label is the
    smallest node index in its component.
    """
    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            # keep the smaller index as root so labels come out canonical
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj
    return [find(i) for i in range(n)]


LINKAGE_AVERAGE = 0
LINKAGE_MAX = 1


def agglomerate(sim, tau: float, linkage: int) -> list[int]:
    """Greedy bottom-up agglomeration over a dense pairwise score matrix.

    ``sim`` is a symmetric n x n matrix of pair scores (diagonal ignored,
    absent pairs already filled with 0). Repeatedly merges the cluster
    pair with the highest linkage (average or max over cross pairs) until
    the best linkage falls below ``tau``. Ties prefer the lexicographically
    smallest (i, j) pair of cluster representatives; representatives are
    always the smallest member index, so labels come out canonical.

    Returns a label per node: the smallest member index of its cluster.
    """
    n = len(sim)
    if n == 0:
        return []
    active = [True] * n
    size = [1] * n
    merged_into = [-1] * n
    # agg[i][j]: sum (average linkage) or max (max linkage) over cross pairs
    agg = [list(row) for row in sim]

    while True:
        best = -INF
        bi = bj = -1
        for i in range(n):
            if not active[i]:
                continue
            row = agg[i]
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                if linkage == LINKAGE_AVERAGE:
                    val = row[j] / (size[i] * size[j])
                else:
                    val = row[j]
                if val > best:  # strict: first hit wins ties, loops ascend
                    best = val
                    bi, bj = i, j
        if bi < 0 or best < tau:
            break
        for k in range(n):
            if active[k] and k != bi and k != bj:
                if linkage == LINKAGE_AVERAGE:
                    merged = agg[bi][k] + agg[bj][k]
                else:
                    merged = max(agg[bi][k], agg[bj][k])
                agg[bi][k] = merged
                agg[k][bi] = merged
        size[bi] += size[bj]
        active[bj] = False
        merged_into[bj] = bi

    labels = []
    for i in range(n):
        j = i
        while merged_into[j] != -1:
            j = merged_into[j]
        labels.append(j)
    return labels
