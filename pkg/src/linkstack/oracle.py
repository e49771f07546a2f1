"""Theoretical maximum link-prediction AUC for synthetic settings.

Closed forms exist for the ER case (exactly chance) and for the SBM in the
deep-detectable regime ((2k-1)/2k); everything else is estimated by Monte
Carlo comparison of generative scores over sampled (true-edge,
true-non-edge) pairs, ties counting one half. The MC bound assumes the
planted partition is known, so it is conservative at high fuzziness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .graph import candidate_pairs
from .holdout import sample_holdout
from .synth import FAMILY_POISSON, PlantedGraph, SyntheticSpec, planted_scores

DDR_EPSILON_MAX = 0.05
DEFAULT_SAMPLES = 100_000


class OracleError(ValueError):
    pass


@dataclass
class OracleEstimate:
    auc: float
    stderr: float
    samples: int
    method: str
    spec: dict | None = None
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps({
            "auc": self.auc, "stderr": self.stderr, "samples": self.samples,
            "method": self.method, "spec": self.spec, "seed": self.seed,
        })


def optimal_auc_exact(spec: SyntheticSpec) -> float:
    """Closed form: 0.5 for ER; (2k-1)/2k for the SBM in the
    deep-detectable regime. Anything else must use Monte Carlo."""
    spec.validate()
    if spec.family == FAMILY_POISSON and spec.k == 1:
        return 0.5
    if spec.family == FAMILY_POISSON and spec.k > 1:
        eps = spec.epsilon
        if eps is None:
            eps = (spec.k - 1) * spec.p_out / spec.p_in
        if eps <= DDR_EPSILON_MAX:
            return (2.0 * spec.k - 1.0) / (2.0 * spec.k)
        raise OracleError(
            f"epsilon={eps:.3g} is outside the deep-detectable regime; use Monte Carlo"
        )
    raise OracleError("no closed form for degree-corrected settings; use Monte Carlo")


def optimal_auc_mc(planted: PlantedGraph, samples: int = DEFAULT_SAMPLES,
                   seed: int = 0, alpha: float = 0.8) -> OracleEstimate:
    """Monte Carlo bound: sample (true-edge, true-non-edge) pairs from the
    holdout Y and the true non-edges X - Y, compare their generative scores
    (ties count one half), and report the mean with its binomial standard
    error."""
    if samples < 1:
        raise OracleError("samples must be >= 1")
    split = sample_holdout(planted.graph, alpha, seed)
    holdout = split.holdout_edges
    if len(holdout) == 0:
        raise OracleError("holdout is empty; lower alpha")
    true_non = candidate_pairs(planted.graph)
    if len(true_non) == 0:
        raise OracleError("graph is complete; no true non-edges")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6F7261636C]))
    te_idx = rng.integers(0, len(holdout), size=samples)
    tne_idx = rng.integers(0, len(true_non), size=samples)
    te_scores = planted_scores(planted, holdout[te_idx])
    tne_scores = planted_scores(planted, true_non[tne_idx])
    wins = (te_scores > tne_scores).astype(np.float64)
    wins[te_scores == tne_scores] = 0.5
    est = float(wins.mean())
    stderr = math.sqrt(max(est * (1.0 - est), 1e-300) / samples)
    return OracleEstimate(auc=est, stderr=stderr, samples=int(samples),
                          method="monte-carlo", spec=planted.spec.to_dict(),
                          seed=int(seed))


def optimal_auc(planted: PlantedGraph, samples: int = DEFAULT_SAMPLES,
                seed: int = 0, alpha: float = 0.8) -> OracleEstimate:
    """Closed form when available, Monte Carlo otherwise."""
    try:
        value = optimal_auc_exact(planted.spec)
        return OracleEstimate(auc=value, stderr=0.0, samples=0, method="exact",
                              spec=planted.spec.to_dict(), seed=seed)
    except OracleError:
        return optimal_auc_mc(planted, samples=samples, seed=seed, alpha=alpha)
