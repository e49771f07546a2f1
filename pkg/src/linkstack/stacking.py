"""Level-1 meta-learner: a from-scratch random forest over predictor
columns, the 7 family-mask stacks, Gini importances, and the majority-vote
baseline.

Class imbalance is handled with inverse-frequency class weights inside the
Gini criterion so the all-non-edges training protocol keeps usable
thresholds. Per-tree randomness is derived by stable mixing of
(master seed, tree index), so tree-level parallelism cannot change results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .holdout import LabeledPairs, kfold
from .kernels import grow_tree, predict_forest
from .kernels.pyref import splitmix_next
from .metrics import auc as rank_auc
from .table import FAMILIES, PairFeatureTable

STACK_PRESETS = {
    "T": {"topological"},
    "M": {"model"},
    "E": {"embedding"},
    "TM": {"topological", "model"},
    "TE": {"topological", "embedding"},
    "ME": {"model", "embedding"},
    "TME": {"topological", "model", "embedding"},
}

UNLIMITED_DEPTH = 1 << 30
DEFAULT_GRID = tuple(
    {"trees": 100, "max_depth": depth, "min_leaf": leaf}
    for depth in (4, 8, UNLIMITED_DEPTH)
    for leaf in (1, 5)
)
THRESHOLD_GRID = np.linspace(0.0, 1.0, 101)
MODEL_FORMAT_VERSION = 1


class StackingError(ValueError):
    pass


@dataclass
class Forest:
    trees: list[dict]
    params: dict
    seed: int
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_forest(self.trees, np.ascontiguousarray(X, dtype=np.float64))

    def raw_importances(self) -> np.ndarray:
        imp = np.zeros(self.n_features)
        for tr in self.trees:
            imp += tr["importance"]
        return imp / len(self.trees)


def _tree_seed(master: int, index: int) -> int:
    state = (int(master) ^ (0x9E3779B97F4A7C15 * (index + 1))) & ((1 << 64) - 1)
    _, out = splitmix_next(state)
    return out


def train_forest(features: np.ndarray, labels: np.ndarray, params: dict,
                 seed: int) -> Forest:
    """Bootstrap-sampled CART trees with class-weighted Gini splits over
    ceil(sqrt(F)) random feature subsets per node."""
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int8)
    if not np.isfinite(X).all():
        raise StackingError("non-finite feature values")
    npos = int((y == 1).sum())
    nneg = int((y == 0).sum())
    if npos < 2 or nneg < 2:
        raise StackingError("degenerate labels: need >= 2 examples of each class")
    n, nf = X.shape
    w_pos = n / (2.0 * npos)
    w_neg = n / (2.0 * nneg)
    mtry = min(nf, int(np.ceil(np.sqrt(nf))))
    n_trees = int(params.get("trees", 100))
    max_depth = int(params.get("max_depth", UNLIMITED_DEPTH))
    min_leaf = int(params.get("min_leaf", 1))
    trees = []
    for t in range(n_trees):
        ts = _tree_seed(seed, t)
        rng = np.random.default_rng(np.random.SeedSequence([ts & ((1 << 63) - 1), 0x626F6F74]))
        sample_idx = rng.integers(0, n, size=n, dtype=np.int64)
        trees.append(grow_tree(X, y, sample_idx, w_pos, w_neg,
                               max_depth, min_leaf, mtry, ts))
    return Forest(trees=trees, params=dict(params, trees=n_trees), seed=seed,
                  n_features=nf)


@dataclass
class StackedModel:
    forest: Forest
    family_mask: list[str]      # families included
    columns: list[str]          # exact columns, original table order
    threshold: float
    importances: np.ndarray     # normalized, parallel to columns
    objective: str
    cv_results: list[dict] = field(default_factory=list)

    def predict(self, table: PairFeatureTable) -> np.ndarray:
        return predict_scores(self, table)

    def to_json(self) -> str:
        doc = {
            "version": MODEL_FORMAT_VERSION,
            "family_mask": self.family_mask,
            "columns": self.columns,
            "threshold": self.threshold,
            "objective": self.objective,
            "importances": [float(v) for v in self.importances],
            "forest": {
                "params": self.forest.params,
                "seed": self.forest.seed,
                "n_features": self.forest.n_features,
                "trees": [
                    {k: tr[k].tolist() for k in
                     ("feature", "threshold", "left", "right", "value", "importance")}
                    for tr in self.forest.trees
                ],
            },
            "cv_results": self.cv_results,
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "StackedModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise StackingError(f"unsupported model version {doc.get('version')}")
        trees = []
        for tr in doc["forest"]["trees"]:
            trees.append({
                "feature": np.array(tr["feature"], dtype=np.int32),
                "threshold": np.array(tr["threshold"], dtype=np.float64),
                "left": np.array(tr["left"], dtype=np.int32),
                "right": np.array(tr["right"], dtype=np.int32),
                "value": np.array(tr["value"], dtype=np.float64),
                "importance": np.array(tr["importance"], dtype=np.float64),
            })
        forest = Forest(trees=trees, params=doc["forest"]["params"],
                        seed=doc["forest"]["seed"],
                        n_features=doc["forest"]["n_features"])
        return StackedModel(
            forest=forest, family_mask=doc["family_mask"], columns=doc["columns"],
            threshold=doc["threshold"],
            importances=np.array(doc["importances"], dtype=np.float64),
            objective=doc["objective"], cv_results=doc.get("cv_results", []),
        )


def f1_at(scores: np.ndarray, labels: np.ndarray, threshold: float) -> float:
    pred = scores >= threshold
    tp = int((pred & (labels == 1)).sum())
    fp = int((pred & (labels == 0)).sum())
    fn = int((~pred & (labels == 1)).sum())
    if tp == 0:
        return 0.0
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    return 2.0 * prec * rec / (prec + rec)


def _best_threshold(scores: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    best_t, best_f1 = 0.0, -1.0
    for t in THRESHOLD_GRID:
        f1 = f1_at(scores, labels, t)
        if f1 > best_f1:
            best_t, best_f1 = float(t), f1
    return best_t, best_f1


def _objective_value(objective: str, scores: np.ndarray, labels: np.ndarray) -> float:
    if objective == "AUC":
        return rank_auc(scores[labels == 1], scores[labels == 0])
    if objective == "F-measure":
        return _best_threshold(scores, labels)[1]
    raise StackingError(f"unknown objective {objective!r}")


def train_stack(labeled: LabeledPairs, table: PairFeatureTable,
                families: set[str], objective: str = "F-measure",
                seed: int = 0, folds: int = 5,
                grid: tuple[dict, ...] = DEFAULT_GRID) -> StackedModel:
    """5-fold CV grid search over forest hyperparameters, objective evaluated
    on pooled validation scores; the final forest is refit on all rows and
    the decision threshold is the F1-maximizing cut on the winning
    configuration's pooled validation scores."""
    unknown = families - set(FAMILIES)
    if unknown:
        raise StackingError(f"unknown families {sorted(unknown)}")
    sub = table.select(families=families)
    if not sub.columns:
        raise StackingError(f"no columns for families {sorted(families)}")
    X = sub.values
    y = labeled.labels
    if len(X) != len(y):
        raise StackingError("table rows do not cover the labeled pairs")
    fold_idx = kfold(labeled, folds, seed)
    best = None
    cv_results = []
    for params in grid:
        pooled = np.empty(len(y))
        for f, (tr_idx, va_idx) in enumerate(fold_idx):
            forest = train_forest(X[tr_idx], y[tr_idx], params,
                                  _tree_seed(seed, 1000 + f))
            pooled[va_idx] = forest.predict(X[va_idx])
        score = _objective_value(objective, pooled, y)
        cv_results.append({"params": {k: (None if v == UNLIMITED_DEPTH else v)
                                      for k, v in params.items()},
                           "objective": objective, "value": score})
        if best is None or score > best[0]:
            best = (score, params, pooled.copy())
    _, best_params, best_pooled = best
    forest = train_forest(X, y, best_params, seed)
    threshold, _ = _best_threshold(best_pooled, y)
    raw = forest.raw_importances()
    total = raw.sum()
    importances = raw / total if total > 0 else np.full(len(raw), 1.0 / len(raw))
    return StackedModel(forest=forest, family_mask=sorted(families),
                        columns=sub.columns, threshold=threshold,
                        importances=importances, objective=objective,
                        cv_results=cv_results)


def predict_scores(model: StackedModel, table: PairFeatureTable) -> np.ndarray:
    """Mean of tree leaf values in [0, 1] for each table row."""
    available = set(table.columns)
    missing = [c for c in model.columns if c not in available]
    if missing:
        raise StackingError(f"table lacks model columns {missing}")
    sub = table.select(columns=model.columns)
    if sub.columns != model.columns:
        raise StackingError("column order mismatch with trained model")
    return model.forest.predict(sub.values)


def gini_importances(model: StackedModel) -> dict[str, float]:
    """Impurity decrease summed over splits, averaged over trees, normalized
    to sum 1 (parallel to the model's columns)."""
    return {c: float(v) for c, v in zip(model.columns, model.importances)}


def majority_vote(columns: np.ndarray, q: float) -> np.ndarray:
    """Each column votes for its top-q fraction of pairs; score = vote count
    with ties broken by mean fractional column rank (scaled into (0, 0.5) so
    vote levels are never crossed)."""
    columns = np.atleast_2d(np.asarray(columns, dtype=np.float64))
    if columns.ndim != 2 or columns.shape[1] < 1:
        raise StackingError("need at least one score column")
    n, c = columns.shape
    top = max(1, int(round(q * n)))
    votes = np.zeros(n)
    frac = np.zeros(n)
    for col in range(c):
        order = np.argsort(columns[:, col], kind="stable")
        ranks = np.empty(n)
        ranks[order] = np.arange(n)
        votes[order[n - top:]] += 1.0
        frac += ranks / max(1, n - 1)
    return votes + frac / (2.0 * c)
