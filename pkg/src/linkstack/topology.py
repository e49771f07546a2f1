"""The 42 topological predictor columns: 8 global, 14 pairwise, 20 node-based.

All columns are finite by construction (degenerate cases are resolved to
fixed values rather than NaN) and oriented so that a higher score means the
pair is more likely to be a missing link; the shortest-path column is
negated to satisfy that convention.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .graph import Graph
from .kernels import betweenness_and_load
from .table import FAMILY_TOPOLOGICAL, PairFeatureTable

PPR_RESTART = 0.15
PPR_TOL = 1e-8
PPR_MAX_ITER = 200
KATZ_ATTENUATION = 0.9   # of 1/lambda_max
KATZ_TOL = 1e-8
EC_TOL = 1e-8
EC_MAX_ITER = 1000
LRA_OVERSAMPLE = 8
LRA_POWER_STEPS = 2

GLOBAL_COLUMNS = ["N", "OE", "AD", "VD", "ND", "DA", "NT", "ACC"]
PAIRWISE_COLUMNS = ["CN", "SP", "LHN", "PPR", "PA", "JC", "AA", "RA",
                    "LRA", "dLRA", "mLRA", "LRA-approx", "dLRA-approx", "mLRA-approx"]
NODE_MEASURES = ["LCC", "AND", "SPBC", "CC", "DC", "EC", "KC", "LNT", "PR", "LC"]
NODE_COLUMNS = [f"{m}_{e}" for m in NODE_MEASURES for e in ("i", "j")]
TOPOLOGICAL_COLUMNS = GLOBAL_COLUMNS + PAIRWISE_COLUMNS + NODE_COLUMNS


def default_rank(n: int) -> int:
    return max(1, min(32, n - 1))


def _distance_matrix(graph: Graph) -> np.ndarray:
    if graph.m == 0:
        d = np.full((graph.n, graph.n), np.inf)
        np.fill_diagonal(d, 0.0)
        return d
    return csgraph.dijkstra(graph.adjacency(), unweighted=True)


def _triangles(graph: Graph) -> np.ndarray:
    a = graph.adjacency()
    if graph.m == 0:
        return np.zeros(graph.n)
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0


def global_features(graph: Graph, dist: np.ndarray | None = None) -> dict[str, float]:
    """The 8 network-level values, broadcast to every row downstream.

    Degenerate conventions: assortativity of a degree-regular graph is 0,
    diameter is taken on the largest connected component, the degree
    variance of a single node is 0.
    """
    n, m = graph.n, graph.m
    deg = graph.degrees().astype(np.float64)
    if dist is None:
        dist = _distance_matrix(graph)
    ncomp, labels = csgraph.connected_components(graph.adjacency(), directed=False)
    sizes = np.bincount(labels, minlength=ncomp)
    lcc = np.flatnonzero(labels == np.argmax(sizes))
    sub = dist[np.ix_(lcc, lcc)]
    nd = float(sub[np.isfinite(sub)].max()) if sub.size else 0.0

    if m == 0:
        da = 0.0
    else:
        src = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
        dst = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
        x = deg[src]
        y = deg[dst]
        sx = x.std()
        sy = y.std()
        da = 0.0 if sx == 0.0 or sy == 0.0 else float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))

    tri = _triangles(graph)
    wedges = deg * (deg - 1.0)
    nt = float(2.0 * tri.sum() / wedges.sum()) if wedges.sum() > 0 else 0.0
    lcc_coef = np.divide(2.0 * tri, wedges, out=np.zeros_like(tri), where=wedges > 0)
    return {
        "N": float(n),
        "OE": float(m),
        "AD": 2.0 * m / n,
        "VD": float(np.var(deg)),
        "ND": nd,
        "DA": da,
        "NT": nt,
        "ACC": float(lcc_coef.mean()),
    }


# ---------------------------------------------------------------------------
# whole-graph vectors reused by several columns
# ---------------------------------------------------------------------------

def personalized_pagerank(graph: Graph) -> np.ndarray:
    """All-sources PPR matrix P where P[t, s] is the mass of target t for
    source s. Restart 0.15; dangling-node mass returns to the source, so
    each column sums to 1."""
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    a = graph.adjacency()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    w = a.multiply(inv[:, None]).T.tocsr()  # column-stochastic walk matrix
    dangling = deg == 0
    pi = np.eye(n)
    for _ in range(PPR_MAX_ITER):
        nxt = 0.85 * (w @ pi)
        if dangling.any():
            back = 0.85 * pi[dangling, :].sum(axis=0)
            nxt[np.arange(n), np.arange(n)] += back
        nxt[np.arange(n), np.arange(n)] += PPR_RESTART
        if np.abs(nxt - pi).sum(axis=0).max() <= PPR_TOL:
            pi = nxt
            break
        pi = nxt
    return pi


def pagerank(graph: Graph) -> np.ndarray:
    """Standard PageRank with uniform teleport, restart 0.15."""
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    a = graph.adjacency()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    w = a.multiply(inv[:, None]).T.tocsr()
    dangling = deg == 0
    x = np.full(n, 1.0 / n)
    for _ in range(PPR_MAX_ITER):
        nxt = 0.85 * (w @ x) + (0.85 * x[dangling].sum() + PPR_RESTART) / n
        if np.abs(nxt - x).sum() <= PPR_TOL:
            return nxt
        x = nxt
    return x


def eigenvector_centrality(graph: Graph) -> np.ndarray:
    """Power iteration on A; falls back to the degree-proportional vector if
    the iteration oscillates (bipartite graphs)."""
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    if graph.m == 0:
        return np.zeros(n)
    a = graph.adjacency()
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(EC_MAX_ITER):
        nxt = a @ x
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        nxt /= norm
        if np.abs(nxt - x).sum() <= EC_TOL:
            return nxt
        x = nxt
    return deg / np.linalg.norm(deg)


def katz_centrality(graph: Graph) -> np.ndarray:
    """Series sum_{l>=1} beta^l A^l 1 with beta = 0.9 / lambda_max."""
    n = graph.n
    if graph.m == 0:
        return np.zeros(n)
    a = graph.adjacency()
    if n <= 3:
        lam = float(np.max(np.abs(np.linalg.eigvalsh(a.toarray()))))
    else:
        lam = float(spla.eigsh(a, k=1, return_eigenvectors=False,
                               v0=np.ones(n) / np.sqrt(n))[0])
    if lam <= 0:
        return np.zeros(n)
    beta = KATZ_ATTENUATION / lam
    term = beta * (a @ np.ones(n))
    total = term.copy()
    while np.abs(term).sum() > KATZ_TOL:
        term = beta * (a @ term)
        total += term
    return total


def closeness_centrality(dist: np.ndarray) -> np.ndarray:
    n = dist.shape[0]
    finite = np.isfinite(dist)
    reach = finite.sum(axis=1) - 1  # excluding self
    tot = np.where(finite, dist, 0.0).sum(axis=1)
    cc = np.zeros(n)
    ok = (tot > 0) & (reach > 0)
    if n > 1:
        cc[ok] = (reach[ok] / tot[ok]) * (reach[ok] / (n - 1))
    return cc


class LowRankApprox:
    """Rank-r SVD factorization of the adjacency with the per-pair accessors
    used by the LRA / dLRA / mLRA columns.

    method='exact' uses a deterministic Lanczos (dense SVD for small n or
    full rank); method='randomized' uses subspace iteration with 2 power
    steps and oversampling 8.
    """

    def __init__(self, graph: Graph, rank: int, method: str = "exact", seed: int = 0):
        n = graph.n
        if not (1 <= rank <= n):
            raise ValueError(f"rank must be in [1, {n}], got {rank}")
        a = graph.adjacency()
        if graph.m == 0:
            u = np.zeros((n, rank))
            s = np.zeros(rank)
            v = np.zeros((n, rank))
        elif method == "exact":
            if rank >= n - 1 or n <= 64:
                dense_u, dense_s, dense_vt = np.linalg.svd(a.toarray())
                u, s, v = dense_u[:, :rank], dense_s[:rank], dense_vt[:rank].T
            else:
                u, s, vt = spla.svds(a, k=rank, v0=np.ones(n) / np.sqrt(n))
                order = np.argsort(s)[::-1]
                u, s, v = u[:, order], s[order], vt[order].T
        elif method == "randomized":
            rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6C7261]))
            q = min(n, rank + LRA_OVERSAMPLE)
            y = a @ rng.standard_normal((n, q))
            y, _ = np.linalg.qr(y)
            for _ in range(LRA_POWER_STEPS):
                y, _ = np.linalg.qr(a @ y)
            b = y.T @ a.toarray() if n <= 64 else (a.T @ y).T
            ub, s, vt = np.linalg.svd(b, full_matrices=False)
            u = y @ ub
            u, s, v = u[:, :rank], s[:rank], vt[:rank].T
        else:
            raise ValueError(f"unknown LRA method {method!r}")
        self.rank = rank
        self._us = u * s            # n x r
        self._v = v                 # n x r
        self._vs2 = v * (s * s)     # n x r, for column dot products
        self._b = a @ self._us      # n x r, for neighbor sums
        self._deg = graph.degrees().astype(np.float64)

    def entries(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", self._us[src], self._v[dst])

    def column_dots(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", self._vs2[src], self._v[dst])

    def neighbor_means(self, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        num = (np.einsum("ij,ij->i", self._b[src], self._v[dst])
               + np.einsum("ij,ij->i", self._b[dst], self._v[src]))
        den = self._deg[src] + self._deg[dst]
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    def entry(self, i: int, j: int) -> float:
        return float(self.entries(np.array([i]), np.array([j]))[0])


def low_rank_approx(graph: Graph, rank: int, method: str = "exact",
                    seed: int = 0) -> LowRankApprox:
    return LowRankApprox(graph, rank, method=method, seed=seed)


# ---------------------------------------------------------------------------
# column assembly
# ---------------------------------------------------------------------------

def _sparse_pair_values(mat: sp.spmatrix, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    return np.asarray(mat.tocsr()[src, dst]).ravel()


def pairwise_scores(graph: Graph, pairs: np.ndarray,
                    dist: np.ndarray | None = None,
                    ppr: np.ndarray | None = None,
                    seed: int = 0) -> dict[str, np.ndarray]:
    """The 14 pairwise columns for the given (p, 2) pair array."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    src, dst = pairs[:, 0], pairs[:, 1]
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    a = graph.adjacency()
    if dist is None:
        dist = _distance_matrix(graph)
    if ppr is None:
        ppr = personalized_pagerank(graph)

    a2 = (a @ a).tocsr()
    cn = _sparse_pair_values(a2, src, dst)
    w_aa = np.divide(1.0, np.log(np.maximum(deg, 2.0)), out=np.zeros(n), where=deg >= 2)
    w_aa[deg < 2] = 0.0
    aa = _sparse_pair_values((a.multiply(w_aa[None, :]) @ a).tocsr(), src, dst)
    w_ra = np.divide(1.0, deg, out=np.zeros(n), where=deg > 0)
    ra = _sparse_pair_values((a.multiply(w_ra[None, :]) @ a).tocsr(), src, dst)

    union = deg[src] + deg[dst] - cn
    jc = np.divide(cn, union, out=np.zeros_like(cn), where=union > 0)
    dprod = deg[src] * deg[dst]
    lhn = np.divide(cn, dprod, out=np.zeros_like(cn), where=dprod > 0)

    sp_hops = dist[src, dst]
    sp_hops = np.where(np.isfinite(sp_hops), sp_hops, float(n))

    ppr_sym = (ppr[dst, src] + ppr[src, dst]) / 2.0

    rank = default_rank(n)
    lra = low_rank_approx(graph, rank, method="exact")
    lra_r = low_rank_approx(graph, rank, method="randomized", seed=seed)

    return {
        "CN": cn,
        "SP": -sp_hops,  # negated: shorter path => higher score
        "LHN": lhn,
        "PPR": ppr_sym,
        "PA": dprod,
        "JC": jc,
        "AA": aa,
        "RA": ra,
        "LRA": lra.entries(src, dst),
        "dLRA": lra.column_dots(src, dst),
        "mLRA": lra.neighbor_means(src, dst),
        "LRA-approx": lra_r.entries(src, dst),
        "dLRA-approx": lra_r.column_dots(src, dst),
        "mLRA-approx": lra_r.neighbor_means(src, dst),
    }


def node_measures(graph: Graph, dist: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Per-node vectors behind the 20 node-based columns."""
    n = graph.n
    deg = graph.degrees().astype(np.float64)
    a = graph.adjacency()
    if dist is None:
        dist = _distance_matrix(graph)
    tri = _triangles(graph)
    wedges = deg * (deg - 1.0)
    lcc = np.divide(2.0 * tri, wedges, out=np.zeros(n), where=wedges > 0)
    nbr_deg_sum = a @ deg
    and_ = np.divide(nbr_deg_sum, deg, out=np.zeros(n), where=deg > 0)
    indptr, indices = graph.csr_arrays()
    spbc_raw, load_raw = betweenness_and_load(indptr, indices, n)
    # kernel normalizes by (n-1)(n-2); spec convention is (n-1)(n-2)/2
    spbc = np.asarray(spbc_raw) * 2.0
    load = np.asarray(load_raw) * 2.0
    return {
        "LCC": lcc,
        "AND": and_,
        "SPBC": spbc,
        "CC": closeness_centrality(dist),
        "DC": deg / (n - 1) if n > 1 else np.zeros(n),
        "EC": eigenvector_centrality(graph),
        "KC": katz_centrality(graph),
        "LNT": tri,
        "PR": pagerank(graph),
        "LC": load,
    }


def node_features(graph: Graph, pairs: np.ndarray,
                  dist: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Two columns per node measure (endpoints i < j canonical)."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    vec = node_measures(graph, dist=dist)
    out = {}
    for name in NODE_MEASURES:
        out[f"{name}_i"] = vec[name][pairs[:, 0]]
        out[f"{name}_j"] = vec[name][pairs[:, 1]]
    return out


def topological_table(graph: Graph, pairs: np.ndarray, seed: int = 0) -> PairFeatureTable:
    """All 42 topological columns for the candidate pairs."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    dist = _distance_matrix(graph)
    glob = global_features(graph, dist=dist)
    pair_cols = pairwise_scores(graph, pairs, dist=dist, seed=seed)
    node_cols = node_features(graph, pairs, dist=dist)
    values = np.empty((len(pairs), len(TOPOLOGICAL_COLUMNS)))
    for c, name in enumerate(TOPOLOGICAL_COLUMNS):
        if name in glob:
            values[:, c] = glob[name]
        elif name in pair_cols:
            values[:, c] = pair_cols[name]
        else:
            values[:, c] = node_cols[name]
    return PairFeatureTable(
        pairs=pairs,
        columns=list(TOPOLOGICAL_COLUMNS),
        families=[FAMILY_TOPOLOGICAL] * len(TOPOLOGICAL_COLUMNS),
        values=values,
    )
