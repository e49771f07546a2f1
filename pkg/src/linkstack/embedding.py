"""DeepWalk-style node embedding and the derived pair features: one
Hadamard column per dimension plus dot product, sigmoid dot product, and
negated Euclidean distance (negated so higher means more similar).

The walk corpus is generated up front with per-walk seeded streams and then
held fixed, so training is a deterministic function of (corpus, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .kernels import train_skipgram
from .table import FAMILY_EMBEDDING, PairFeatureTable

DEFAULT_DIMS = 32
DEFAULT_WALKS_PER_NODE = 10
DEFAULT_WALK_LENGTH = 40
DEFAULT_WINDOW = 5
DEFAULT_NEGATIVES = 5
DEFAULT_EPOCHS = 3
DEFAULT_LR = 0.025
LR_MIN = 1e-4
NEG_TABLE_SIZE = 1 << 17
NEG_POWER = 0.75


@dataclass
class Embedding:
    vectors: np.ndarray  # n x d
    dims: int
    params: dict
    losses: list[float] = field(default_factory=list)


def generate_walks(graph: Graph, walks_per_node: int, walk_length: int,
                   seed: int) -> np.ndarray:
    """Uniform random walks, one RNG stream per (node, walk) so generation
    can be parallelized without changing the corpus. Isolated nodes produce
    no walks."""
    deg = graph.degrees()
    starts = np.flatnonzero(deg > 0)
    walks = np.empty((len(starts) * walks_per_node, walk_length), dtype=np.int64)
    row = 0
    for start in starts:
        for w in range(walks_per_node):
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, 0x77616C6B, int(start), w])
            )
            cur = int(start)
            walks[row, 0] = cur
            steps = rng.integers(0, 1 << 31, size=walk_length - 1)
            for t in range(1, walk_length):
                nbrs = graph.neighbors(cur)
                cur = int(nbrs[steps[t - 1] % len(nbrs)])
                walks[row, t] = cur
            row += 1
    return walks


def _negative_table(walks: np.ndarray, n: int) -> np.ndarray:
    counts = np.bincount(walks.ravel(), minlength=n).astype(np.float64)
    weights = counts ** NEG_POWER
    if weights.sum() == 0:
        weights = np.ones(n)
    cum = np.cumsum(weights / weights.sum())
    picks = (np.arange(NEG_TABLE_SIZE) + 0.5) / NEG_TABLE_SIZE
    return np.searchsorted(cum, picks).astype(np.int64)


def deepwalk_embed(graph: Graph, dims: int = DEFAULT_DIMS,
                   walks_per_node: int = DEFAULT_WALKS_PER_NODE,
                   walk_length: int = DEFAULT_WALK_LENGTH,
                   window: int = DEFAULT_WINDOW,
                   negatives: int = DEFAULT_NEGATIVES,
                   epochs: int = DEFAULT_EPOCHS,
                   seed: int = 0,
                   learning_rate: float = DEFAULT_LR) -> Embedding:
    """Skip-gram with negative sampling over uniform random walks.

    Deterministic given the seed; isolated nodes keep the zero vector.
    """
    if dims < 2:
        raise ValueError(f"dims must be >= 2, got {dims}")
    n = graph.n
    params = {
        "dims": dims, "walks_per_node": walks_per_node, "walk_length": walk_length,
        "window": window, "negatives": negatives, "epochs": epochs,
        "learning_rate": learning_rate, "seed": seed,
    }
    if graph.m == 0:
        return Embedding(vectors=np.zeros((n, dims)), dims=dims, params=params)
    walks = generate_walks(graph, walks_per_node, walk_length, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x696E6974]))
    emb_in = (rng.random((n, dims)) - 0.5) / dims
    emb_out = np.zeros((n, dims))
    isolated = graph.degrees() == 0
    emb_in[isolated] = 0.0
    table = _negative_table(walks, n)
    losses = train_skipgram(emb_in, emb_out, walks, window, negatives, table,
                            learning_rate, LR_MIN, epochs, seed ^ 0x5347)
    emb_in[isolated] = 0.0
    return Embedding(vectors=emb_in, dims=dims, params=params, losses=list(losses))


def pair_embed_features(embedding: Embedding, pairs: np.ndarray) -> PairFeatureTable:
    """d Hadamard columns plus dot, sigmoid(dot), and -Euclidean distance."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    u = embedding.vectors[pairs[:, 0]]
    v = embedding.vectors[pairs[:, 1]]
    hadamard = u * v
    dot = hadamard.sum(axis=1)
    sig = 1.0 / (1.0 + np.exp(-np.clip(dot, -35.0, 35.0)))
    dist = -np.linalg.norm(u - v, axis=1)
    columns = [f"DW-h{c}" for c in range(embedding.dims)] + ["DW-dot", "DW-sigdot", "DW-negL2"]
    values = np.concatenate([hadamard, dot[:, None], sig[:, None], dist[:, None]], axis=1)
    return PairFeatureTable(pairs=pairs, columns=columns,
                            families=[FAMILY_EMBEDDING] * len(columns), values=values)


def embedding_table(graph: Graph, pairs: np.ndarray, seed: int = 0,
                    dims: int = DEFAULT_DIMS, **kwargs) -> PairFeatureTable:
    emb = deepwalk_embed(graph, dims=dims, seed=seed, **kwargs)
    return pair_embed_features(emb, pairs)


def save_embedding(embedding: Embedding, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node," + ",".join(f"v{c}" for c in range(embedding.dims)) + "\n")
        for node, row in enumerate(embedding.vectors):
            fh.write(f"{node}," + ",".join(repr(float(x)) for x in row) + "\n")
