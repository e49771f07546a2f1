"""Uniform edge-missingness splits and supervised training-set construction.

The observed graph G' keeps exactly round(alpha * m) edges chosen uniformly
at random; the remainder Y = E - E' is the holdout (test positives). A
training instance removes a further round((1 - alpha') * |E'|) edges from G'
as positive examples and takes non-edges of G' as negatives, with features
to be computed on the doubly-reduced graph G''.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, GraphError, candidate_pairs, remove_edges


@dataclass(frozen=True)
class HoldoutSplit:
    observed: Graph
    holdout_edges: np.ndarray  # (h, 2) canonical pairs, Y = E - E'
    alpha: float
    seed: int

    def holdout_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.holdout_edges}


@dataclass(frozen=True)
class LabeledPairs:
    pairs: np.ndarray    # (p, 2) node pairs, positives first
    labels: np.ndarray   # (p,) int8, 1 positive / 0 negative
    feature_graph: Graph # graph on which features must be computed (G'')
    negative_cap: int | None = None
    capped: bool = field(default=False)


def _rounded_keep(count: int, fraction: float) -> int:
    # round-half-even via np.round, matching round(alpha*m) in the contract
    return int(np.round(fraction * count))


def sample_holdout(graph: Graph, alpha: float, seed: int) -> HoldoutSplit:
    """Keep exactly round(alpha*m) edges uniformly at random (seeded)."""
    if not (0.0 < alpha <= 1.0):
        raise GraphError(f"alpha must be in (0, 1], got {alpha}")
    if graph.m < 1:
        raise GraphError("graph has no edges")
    keep = _rounded_keep(graph.m, alpha)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x686F6C64]))
    perm = rng.permutation(graph.m)
    kept_idx = np.sort(perm[:keep])
    held_idx = np.sort(perm[keep:])
    edges = graph.edges
    observed = Graph(graph.n, edges[kept_idx], labels=graph.labels)
    return HoldoutSplit(observed=observed, holdout_edges=edges[held_idx],
                        alpha=float(alpha), seed=int(seed))


def build_training_instance(split: HoldoutSplit, alpha_prime: float, seed: int,
                            negative_cap: int | None = None) -> LabeledPairs:
    """Second-stage removal: positives from G', negatives = non-edges of G'.

    Features for both must be computed on the returned feature_graph G''.
    An optional uniform negative subsample (negative_cap) keeps huge
    candidate sets tractable; the cap decision is surfaced on the result.
    """
    if not (0.0 < alpha_prime < 1.0):
        raise GraphError(f"alpha_prime must be in (0, 1), got {alpha_prime}")
    gprime = split.observed
    if gprime.m < 2:
        raise GraphError("graph too small to train")
    n_remove = gprime.m - _rounded_keep(gprime.m, alpha_prime)
    if n_remove == 0:
        n_remove = 1  # keep tiny graphs usable
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x747261696E]))
    perm = rng.permutation(gprime.m)
    removed = gprime.edges[np.sort(perm[:n_remove])]
    feature_graph = remove_edges(gprime, [tuple(e) for e in removed])
    negatives = candidate_pairs(gprime)
    capped = False
    if negative_cap is not None and len(negatives) > negative_cap:
        pick = np.sort(rng.choice(len(negatives), size=negative_cap, replace=False))
        negatives = negatives[pick]
        capped = True
    pairs = np.concatenate([removed, negatives], axis=0)
    labels = np.zeros(len(pairs), dtype=np.int8)
    labels[: len(removed)] = 1
    return LabeledPairs(pairs=pairs, labels=labels, feature_graph=feature_graph,
                        negative_cap=negative_cap, capped=capped)


def kfold(labeled: LabeledPairs, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold: (train_idx, validate_idx) per fold, seeded."""
    if folds < 2:
        raise GraphError(f"folds must be >= 2, got {folds}")
    labels = labeled.labels
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if len(pos) < folds:
        raise GraphError(f"need at least {folds} positives, have {len(pos)}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x666F6C64]))
    pos = rng.permutation(pos)
    neg = rng.permutation(neg)
    out = []
    for f in range(folds):
        val = np.sort(np.concatenate([pos[f::folds], neg[f::folds]]))
        mask = np.ones(len(labels), dtype=bool)
        mask[val] = False
        out.append((np.flatnonzero(mask), val))
    return out
