"""Immutable simple undirected graph with dense integer node indices.

Node tokens from input edge lists may be arbitrary strings; they are mapped
to dense indices in [0, n) at construction. Adjacency is stored as sorted
per-node neighbor arrays (CSR layout), so edge queries are O(log deg) and
the structure is safe for concurrent read access.
"""

from __future__ import annotations

import io
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for malformed edge input or invalid graph operations."""


class Graph:
    """Simple undirected graph: no self-loops, no duplicate edges.

    Attributes:
        n: number of nodes (indices are dense in [0, n)).
        m: number of edges.
        labels: original token per node index, or None if constructed
            directly from integer pairs.
        dropped_duplicates / dropped_self_loops: counts reported by
            construction from raw records.
    """

    __slots__ = (
        "n", "m", "_indptr", "_indices", "labels",
        "dropped_duplicates", "dropped_self_loops", "_edge_array",
    )

    def __init__(self, n: int, edges: np.ndarray, labels: list[str] | None = None,
                 dropped_duplicates: int = 0, dropped_self_loops: int = 0):
        if n < 1:
            raise GraphError("empty graph")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            if lo.min() < 0 or hi.max() >= n:
                raise GraphError("edge endpoint out of range")
            if (lo == hi).any():
                raise GraphError("self-loop in canonical edge array")
            order = np.lexsort((hi, lo))
            canon = np.stack([lo[order], hi[order]], axis=1)
            if len(canon) > 1 and (np.diff(canon, axis=0) == 0).all(axis=1).any():
                raise GraphError("duplicate edge in canonical edge array")
        else:
            canon = edges.reshape(0, 2)
        self.n = int(n)
        self.m = int(len(canon))
        self._edge_array = canon
        self.labels = labels
        self.dropped_duplicates = dropped_duplicates
        self.dropped_self_loops = dropped_self_loops
        both = np.concatenate([canon, canon[:, ::-1]]) if len(canon) else canon
        adj = sp.csr_matrix(
            (np.ones(len(both), dtype=np.float64), (both[:, 0], both[:, 1])),
            shape=(n, n),
        )
        adj.sort_indices()
        self._indptr = adj.indptr.astype(np.int64)
        self._indices = adj.indices.astype(np.int64)

    # -- accessors ---------------------------------------------------------

    @property
    def edges(self) -> np.ndarray:
        """Canonical (m, 2) edge array with i < j, lexicographically sorted."""
        return self._edge_array

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self._edge_array}

    def neighbors(self, i: int) -> np.ndarray:
        return self._indices[self._indptr[i]:self._indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def has_edge(self, i: int, j: int) -> bool:
        nbrs = self.neighbors(i)
        pos = np.searchsorted(nbrs, j)
        return pos < len(nbrs) and nbrs[pos] == j

    def adjacency(self) -> sp.csr_matrix:
        """CSR adjacency matrix (float64, symmetric)."""
        data = np.ones(self._indices.shape[0], dtype=np.float64)
        return sp.csr_matrix(
            (data, self._indices.astype(np.int32), self._indptr), shape=(self.n, self.n)
        )

    def csr_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) of the sorted adjacency, int64 views."""
        return self._indptr, self._indices

    def relabel(self) -> dict[str, int] | None:
        """Original-token -> dense-index map, or None."""
        if self.labels is None:
            return None
        return {tok: idx for idx, tok in enumerate(self.labels)}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self._edge_array.shape == other._edge_array.shape
            and bool((self._edge_array == other._edge_array).all())
        )

    def __hash__(self):
        return hash((self.n, self._edge_array.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def from_edge_list(records: Sequence[tuple[str, str]]) -> Graph:
    """Build a dense-index graph from (token, token) records.

    Duplicate edges and self-loops are dropped; the counts are retained on
    the returned graph. Raises GraphError("empty graph") for empty input and
    for malformed records (wrong arity) with the 1-based record number.
    """
    records = list(records)
    if not records:
        raise GraphError("empty graph")
    labels: list[str] = []
    index: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    dup = loops = 0
    for lineno, rec in enumerate(records, start=1):
        if len(rec) != 2:
            raise GraphError(f"malformed record at line {lineno}: expected 2 tokens, got {len(rec)}")
        a, b = str(rec[0]), str(rec[1])
        for tok in (a, b):
            if tok not in index:
                index[tok] = len(labels)
                labels.append(tok)
        u, v = index[a], index[b]
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dup += 1
            continue
        seen.add(key)
        edges.append(key)
    if not labels:
        raise GraphError("empty graph")
    arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return Graph(len(labels), arr, labels=labels,
                 dropped_duplicates=dup, dropped_self_loops=loops)


def to_edge_list(graph: Graph) -> list[tuple[str, str]]:
    """Canonical edge records using original tokens where available."""
    if graph.labels is not None:
        return [(graph.labels[i], graph.labels[j]) for i, j in graph.edges]
    return [(str(i), str(j)) for i, j in graph.edges]


def read_edge_list(path_or_buf) -> Graph:
    """Parse the edge-list file format: one edge per line, two
    whitespace-separated tokens, '#' lines ignored, UTF-8."""
    if isinstance(path_or_buf, io.TextIOBase):
        lines = path_or_buf.readlines()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            lines = fh.readlines()
    records = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = stripped.split()
        if len(toks) != 2:
            raise GraphError(f"malformed record at line {lineno}: expected 2 tokens, got {len(toks)}")
        records.append((toks[0], toks[1]))
    if not records:
        raise GraphError("empty graph")
    return from_edge_list(records)


def write_edge_list(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in to_edge_list(graph):
            fh.write(f"{a} {b}\n")


def non_edges(graph: Graph) -> Iterator[tuple[int, int]]:
    """Yield every unordered non-adjacent pair (i, j), i < j."""
    for i in range(graph.n):
        nbrs = graph.neighbors(i)
        upper = nbrs[nbrs > i]
        j = i + 1
        for nb in upper:
            nb = int(nb)
            while j < nb:
                yield (i, j)
                j += 1
            j = nb + 1
        while j < graph.n:
            yield (i, j)
            j += 1


def candidate_pairs(graph: Graph) -> np.ndarray:
    """All non-edges as an (count, 2) int64 array; count = C(n,2) - m.

    Vectorized equivalent of stream `non_edges`, used for bulk feature work.
    """
    n = graph.n
    out = []
    for i in range(n):
        js = np.arange(i + 1, n, dtype=np.int64)
        nbrs = graph.neighbors(i)
        upper = nbrs[nbrs > i]
        if len(upper):
            mask = np.ones(len(js), dtype=bool)
            mask[upper - (i + 1)] = False
            js = js[mask]
        if len(js):
            out.append(np.stack([np.full(len(js), i, dtype=np.int64), js], axis=1))
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(out, axis=0)


def remove_edges(graph: Graph, subset: Iterable[tuple[int, int]]) -> Graph:
    """New graph with `subset` removed; n is unchanged (isolates kept).

    Raises GraphError if subset contains a pair that is not an edge.
    """
    canon = {(min(i, j), max(i, j)) for i, j in subset}
    current = graph.edge_set()
    missing = canon - current
    if missing:
        raise GraphError(f"remove_edges: {len(missing)} pairs are not edges (e.g. {sorted(missing)[0]})")
    kept = np.array(sorted(current - canon), dtype=np.int64).reshape(-1, 2)
    return Graph(graph.n, kept, labels=graph.labels)
