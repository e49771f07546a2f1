"""Evaluation statistics and error-diversity analytics: rank-based AUC,
precision/recall, importance entropy, top-x% fitting, family entropy,
Lorenz/Gini concentration, saturation curves, and weak-learner orientation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


class MetricsError(ValueError):
    pass


def auc(positive_scores, negative_scores) -> float:
    """P(pos > neg) with ties counting one half, via the Mann-Whitney rank
    statistic in O((P+N) log(P+N)). Equals brute-force pair counting
    exactly (both are dyadic sums divided by P*N)."""
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    neg = np.asarray(negative_scores, dtype=np.float64).ravel()
    if len(pos) == 0 or len(neg) == 0:
        raise MetricsError("auc needs non-empty positive and negative scores")
    scores = np.concatenate([pos, neg])
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    # average ranks within tie groups (1-based)
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [len(scores)]])
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + 1 + e) / 2.0
    r_pos = ranks[: len(pos)].sum()
    u = r_pos - len(pos) * (len(pos) + 1) / 2.0
    return u / (len(pos) * len(neg))


def auc_bruteforce(positive_scores, negative_scores) -> float:
    """O(P*N) definition-based oracle for the rank implementation."""
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    neg = np.asarray(negative_scores, dtype=np.float64).ravel()
    if len(pos) == 0 or len(neg) == 0:
        raise MetricsError("auc needs non-empty positive and negative scores")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class PrecisionRecall(NamedTuple):
    precision: float
    recall: float
    f1: float
    no_predicted_positives: bool


def precision_recall(scores, labels, threshold: float) -> PrecisionRecall:
    """Confusion-matrix statistics at `score >= threshold`."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(np.int64)
    if (labels == 1).sum() < 1:
        raise MetricsError("labels contain no positives")
    pred = scores >= threshold
    tp = int((pred & (labels == 1)).sum())
    fp = int((pred & (labels == 0)).sum())
    fn = int((~pred & (labels == 1)).sum())
    flagged = (tp + fp) == 0
    precision = 0.0 if flagged else tp / (tp + fp)
    recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PrecisionRecall(precision, recall, f1, flagged)


# ---------------------------------------------------------------------------
# importance analytics
# ---------------------------------------------------------------------------

def _normalized(importances) -> np.ndarray:
    imp = np.asarray(importances, dtype=np.float64).ravel()
    if (imp < 0).any():
        raise MetricsError("importances must be non-negative")
    total = imp.sum()
    if total <= 0:
        raise MetricsError("importances sum to zero")
    return imp / total


def importance_entropy(importances) -> float:
    """Shannon entropy in bits of the normalized importance vector."""
    p = _normalized(importances)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


class TopXFit(NamedTuple):
    percent: float
    count: int
    model_entropy: float
    empirical_entropy: float


def fit_top_x(importances) -> TopXFit:
    """Fit the piecewise 90/10 model: 90% of mass uniform on the best x% of
    predictors, 10% uniform on the rest; x (integer predictor counts,
    1..F-1) minimizes the entropy mismatch."""
    p = _normalized(importances)
    f = len(p)
    h_emp = importance_entropy(p)
    if f == 1:
        return TopXFit(100.0, 1, 0.0, h_emp)
    best = None
    for c in range(1, f):
        h_model = 0.9 * math.log2(c / 0.9) + 0.1 * math.log2((f - c) / 0.1)
        diff = abs(h_model - h_emp)
        if best is None or diff < best[0] - 1e-15:
            best = (diff, c, h_model)
    _, count, h_model = best
    return TopXFit(100.0 * count / f, count, h_model, h_emp)


def family_entropy(importances, family_map: Sequence[str]) -> float:
    """Entropy in bits of the family-aggregated importance mass."""
    imp = np.asarray(importances, dtype=np.float64).ravel()
    if len(family_map) != len(imp):
        raise MetricsError(f"family_map covers {len(family_map)} of {len(imp)} columns")
    fams = sorted(set(family_map))
    mass = np.array([imp[np.array([f == fam for f in family_map])].sum() for fam in fams])
    return importance_entropy(mass)


def lorenz_gini(importances) -> tuple[np.ndarray, float]:
    """Ascending cumulative-share curve points ((i/F, share)) and the Gini
    coefficient by the trapezoid area formula."""
    p = _normalized(importances)
    f = len(p)
    cum = np.concatenate([[0.0], np.cumsum(np.sort(p))])
    xs = np.arange(f + 1) / f
    points = np.stack([xs, cum], axis=1)
    area = float(((cum[1:] + cum[:-1]) / 2.0).sum() / f)
    return points, 1.0 - 2.0 * area


def gini_mean_difference(importances) -> float:
    """Second-definition oracle: half the relative mean absolute difference."""
    p = _normalized(importances)
    f = len(p)
    return float(np.abs(p[:, None] - p[None, :]).sum() / (2.0 * f * f * p.mean()))


# ---------------------------------------------------------------------------
# weak learners and saturation
# ---------------------------------------------------------------------------

def oriented_column_auc(train_scores, train_labels, test_scores, test_labels) -> float:
    """Evaluate one raw predictor column as a score, flipping its sign when
    its training-fold AUC is below 0.5 (columns like raw path length rank
    backwards)."""
    train_scores = np.asarray(train_scores, dtype=np.float64)
    test_scores = np.asarray(test_scores, dtype=np.float64)
    train_labels = np.asarray(train_labels).astype(np.int64)
    test_labels = np.asarray(test_labels).astype(np.int64)
    train_auc = auc(train_scores[train_labels == 1], train_scores[train_labels == 0])
    flip = train_auc < 0.5
    s = -test_scores if flip else test_scores
    return auc(s[test_labels == 1], s[test_labels == 0])


@dataclass
class SaturationResult:
    ks: list[int]
    aucs: list[float]
    k_star: int
    full_auc: float

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("k,auc\n")
            for k, a in zip(self.ks, self.aucs):
                fh.write(f"{k},{a!r}\n")


def saturation_curve(model, labeled, train_table, test_table, test_labels,
                     ks: Sequence[int]) -> SaturationResult:
    """Retrain sub-stacks on the top-k importance columns (kept in original
    table order, same hyperparameters and seed) and evaluate holdout AUC.
    k* is the smallest k reaching 95% of the full stack's AUC."""
    from .stacking import train_forest  # local import; stacking depends on metrics

    test_labels = np.asarray(test_labels).astype(np.int64)
    full_scores = model.predict(test_table)
    full_auc = auc(full_scores[test_labels == 1], full_scores[test_labels == 0])
    order = np.argsort(-model.importances, kind="stable")
    train_sub_all = train_table.select(columns=model.columns)
    test_sub_all = test_table.select(columns=model.columns)
    ks = sorted(int(k) for k in ks)
    aucs = []
    k_star = len(model.columns)
    found = False
    for k in ks:
        top = set(order[: min(k, len(model.columns))])
        cols = [c for i, c in enumerate(model.columns) if i in top]
        xtr = train_sub_all.select(columns=cols)
        xte = test_sub_all.select(columns=cols)
        forest = train_forest(xtr.values, labeled.labels, model.forest.params,
                              model.forest.seed)
        scores = forest.predict(xte.values)
        a = auc(scores[test_labels == 1], scores[test_labels == 0])
        aucs.append(a)
        if not found and a >= 0.95 * full_auc:
            k_star = k
            found = True
    return SaturationResult(ks=list(ks), aucs=aucs, k_star=k_star, full_auc=full_auc)


# ---------------------------------------------------------------------------
# report container
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    auc: float
    precision: float
    recall: float
    f1: float
    threshold: float
    per_predictor_auc: dict[str, float] = field(default_factory=dict)
    importances: dict[str, float] = field(default_factory=dict)
    entropy_bits: float | None = None
    family_entropy_bits: float | None = None
    top_x_percent: float | None = None
    gini: float | None = None
    lorenz: list[list[float]] | None = None
    k_star: int | None = None

    def __post_init__(self):
        for name in ("auc", "precision", "recall", "f1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise MetricsError(f"{name}={v} outside [0, 1]")

    def to_json(self) -> str:
        doc = dict(self.__dict__)
        if self.lorenz is not None:
            doc["lorenz"] = [[float(a), float(b)] for a, b in self.lorenz]
        return json.dumps(doc)
