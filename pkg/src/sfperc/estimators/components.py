"""Connected components and hop distances."""

from __future__ import annotations

from collections import deque

import numba
import numpy as np

from ..errors import InvalidParameterError
from ..graphgen import WeightedGraph


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _union_find_labels(n, indptr, indices):
    parent = np.arange(n)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j <= i:
                continue
            a = _find(parent, i)
            b = _find(parent, j)
            # keep the smaller index as root so labels are component minima
            if a < b:
                parent[b] = a
            elif b < a:
                parent[a] = b
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        labels[i] = _find(parent, i)
    return labels


def connected_components(g: WeightedGraph) -> np.ndarray:
    """Component label of every vertex: the smallest vertex index in its component."""
    return _union_find_labels(g.n_vertices, np.ascontiguousarray(g.indptr), np.ascontiguousarray(g.indices))


def component_sizes(labels: np.ndarray) -> dict:
    """``{label: size}`` ordered by label."""
    lab, counts = np.unique(np.asarray(labels), return_counts=True)
    return {int(a): int(c) for a, c in zip(lab, counts)}


def flood_fill_labels(g: WeightedGraph) -> np.ndarray:
    """Component labels by breadth-first flood fill from each unvisited vertex in index order."""
    n = g.n_vertices
    labels = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = s
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if labels[v] < 0:
                    labels[v] = s
                    queue.append(int(v))
    return labels


def bfs_distance(g: WeightedGraph, i: int, j: int) -> int | None:
    """Hop distance from ``i`` to ``j``; ``None`` when ``j`` is unreachable."""
    n = g.n_vertices
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameterError("vertex out of range")
    if i == j:
        return 0
    dist = np.full(n, -1, dtype=np.int64)
    dist[i] = 0
    queue = deque([i])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                if v == j:
                    return int(dist[v])
                queue.append(int(v))
    return None
