"""Synthetic network generators with planted structure: ER, DC-ER, SBM and
DC-SBM, plus the built-in 45-row benchmark suite (3 fuzziness regions x
3 degree families x k in {1, 2, 4, 16, 32}).

Degree distributions are discretized on r in {1, ..., 10n} and normalized
numerically. Multigraph draws are collapsed to simple edges; the expected
multi-edge fraction is recorded and flagged above 20%.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .community import Partition
from .graph import Graph

FAMILY_POISSON = "Poisson"
FAMILY_WEIBULL = "Weibull"
FAMILY_POWERLAW = "PowerLaw"

MULTI_EDGE_WARN_FRACTION = 0.20


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    """Generative parameters for one synthetic network setting."""

    family: str
    k: int
    n: int
    epsilon: float | None = None   # m_out/m_in for DC-SBM; (k-1)p_out/p_in for SBM
    p: float | None = None         # ER edge probability (k=1 Poisson)
    p_in: float | None = None
    p_out: float | None = None
    c: float | None = None         # Poisson mean degree (degree-sequence use)
    lam: float | None = None       # Weibull scale
    beta: float | None = None      # Weibull shape
    exponent: float | None = None  # power-law exponent (Table's beta for PL rows)
    omega: float | None = None     # realized 2m metadata for k=1 DC rows
    region: str | None = None
    name: str | None = None

    def validate(self) -> None:
        if self.family not in (FAMILY_POISSON, FAMILY_WEIBULL, FAMILY_POWERLAW):
            raise SynthError(f"unknown degree family {self.family!r}")
        if self.n < 1 or self.k < 1:
            raise SynthError("n and k must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise SynthError("epsilon must be >= 0")
        if self.family == FAMILY_POISSON:
            if self.k == 1:
                if self.p is None or not (0 <= self.p <= 1):
                    raise SynthError("ER spec needs p in [0, 1]")
            else:
                if self.p_in is None or self.p_out is None:
                    raise SynthError("SBM spec needs p_in and p_out")
                for v in (self.p_in, self.p_out):
                    if not (0 <= v <= 1):
                        raise SynthError("probabilities must lie in [0, 1]")
        elif self.family == FAMILY_WEIBULL:
            if self.lam is None or self.beta is None or self.lam <= 0 or self.beta <= 0:
                raise SynthError("Weibull spec needs lam > 0 and beta > 0")
        else:
            if self.exponent is None or self.exponent <= 1.0:
                raise SynthError("power-law spec needs exponent > 1")
        if self.k > 1 and self.family != FAMILY_POISSON and self.epsilon is None:
            raise SynthError("DC-SBM spec needs epsilon")

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @staticmethod
    def from_dict(doc: dict) -> "SyntheticSpec":
        spec = SyntheticSpec(**doc)
        spec.validate()
        return spec


@dataclass
class PlantedGraph:
    graph: Graph
    partition: Partition
    degrees: np.ndarray          # target degree sequence used by the sampler
    spec: SyntheticSpec
    seed: int
    score_params: dict = field(default_factory=dict)
    multi_edge_fraction: float = 0.0
    multi_edge_warning: bool = False


# ---------------------------------------------------------------------------
# degree sequences
# ---------------------------------------------------------------------------

def degree_pmf(family: str, params: dict, r_max: int) -> np.ndarray:
    """Normalized pmf over r = 1..r_max for the named family."""
    r = np.arange(1, r_max + 1, dtype=np.float64)
    if family == FAMILY_POISSON:
        c = params["c"]
        if c <= 0:
            raise SynthError("Poisson mean must be positive")
        logp = r * math.log(c) - gammaln(r + 1.0)
    elif family == FAMILY_WEIBULL:
        lam, beta = params["lam"], params["beta"]
        if lam <= 0 or beta <= 0:
            raise SynthError("Weibull parameters must be positive")
        logp = (beta - 1.0) * np.log(r) - lam * r ** beta
    elif family == FAMILY_POWERLAW:
        gamma = params["exponent"]
        if gamma <= 1.0:
            raise SynthError("power-law exponent must exceed 1")
        logp = -gamma * np.log(r)
    else:
        raise SynthError(f"unknown degree family {family!r}")
    logp -= logp.max()
    pmf = np.exp(logp)
    total = pmf.sum()
    if not np.isfinite(total) or total <= 0:
        raise SynthError("degree distribution is not normalizable")
    return pmf / total


def sample_degree_sequence(family: str, params: dict, n: int, seed: int) -> np.ndarray:
    """n positive integer degrees from the normalized discrete distribution."""
    if n < 1:
        raise SynthError("n must be >= 1")
    pmf = degree_pmf(family, params, r_max=10 * n)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x646567]))
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    u = rng.random(n)
    return (np.searchsorted(cdf, u) + 1).astype(np.int64)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _uniform_types(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, k, size=n, dtype=np.int64)


def generate(spec: SyntheticSpec, seed: int) -> PlantedGraph:
    """Draw one network from the spec's generative process (seeded)."""
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x67656E]))
    n, k = spec.n, spec.k
    src, dst = _pair_indices(n)

    if spec.family == FAMILY_POISSON:
        if k == 1:
            keep = rng.random(len(src)) < spec.p
            edges = np.stack([src[keep], dst[keep]], axis=1)
            graph = Graph(n, edges)
            assign = np.zeros(n, dtype=np.int64)
            return PlantedGraph(
                graph=graph,
                partition=Partition.from_assignment(graph, assign),
                degrees=graph.degrees().astype(np.int64),
                spec=spec, seed=seed,
                score_params={"kind": "ER", "p": spec.p},
            )
        assign = _uniform_types(n, k, rng)
        same = assign[src] == assign[dst]
        prob = np.where(same, spec.p_in, spec.p_out)
        keep = rng.random(len(src)) < prob
        edges = np.stack([src[keep], dst[keep]], axis=1)
        graph = Graph(n, edges)
        return PlantedGraph(
            graph=graph,
            partition=Partition.from_assignment(graph, assign),
            degrees=graph.degrees().astype(np.int64),
            spec=spec, seed=seed,
            score_params={"kind": "SBM", "p_in": spec.p_in, "p_out": spec.p_out,
                          "assign": assign},
        )

    # degree-corrected branches (Weibull / power law)
    params = ({"lam": spec.lam, "beta": spec.beta} if spec.family == FAMILY_WEIBULL
              else {"exponent": spec.exponent})
    degrees = sample_degree_sequence(spec.family, params, n, seed)
    d = degrees.astype(np.float64)
    m = d.sum() / 2.0

    if k == 1:
        rates = d[src] * d[dst] / (2.0 * m)
        assign = np.zeros(n, dtype=np.int64)
        score_params = {"kind": "DC-ER", "degrees": degrees}
    else:
        assign = _uniform_types(n, k, rng)
        d_r = np.bincount(assign, weights=d, minlength=k)
        m_in = m / (1.0 + spec.epsilon)
        m_out = spec.epsilon * m_in
        omega_in = 2.0 * m_in / k
        omega_out = m_out / (k * (k - 1) / 2.0)
        omega = np.full((k, k), omega_out)
        np.fill_diagonal(omega, omega_in)
        theta = np.divide(d, d_r[assign], out=np.zeros_like(d), where=d_r[assign] > 0)
        rates = theta[src] * theta[dst] * omega[assign[src], assign[dst]]
        score_params = {"kind": "DC-SBM", "degrees": degrees, "assign": assign,
                        "theta": theta, "omega": omega}

    counts = rng.poisson(rates)
    keep = counts > 0
    edges = np.stack([src[keep], dst[keep]], axis=1)
    graph = Graph(n, edges)
    p_ge1 = -np.expm1(-rates)
    p_ge2 = p_ge1 - rates * np.exp(-rates)
    exp_edges = p_ge1.sum()
    frac = float(p_ge2.sum() / exp_edges) if exp_edges > 0 else 0.0
    return PlantedGraph(
        graph=graph,
        partition=Partition.from_assignment(graph, assign),
        degrees=degrees, spec=spec, seed=seed,
        score_params=score_params,
        multi_edge_fraction=frac,
        multi_edge_warning=frac > MULTI_EDGE_WARN_FRACTION,
    )


def planted_scores(planted: PlantedGraph, pairs: np.ndarray) -> np.ndarray:
    """Generative-model score for each pair, used by the optimal-AUC bound."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    sp_ = planted.score_params
    kind = sp_["kind"]
    if kind == "ER":
        return np.full(len(pairs), sp_["p"])
    if kind == "SBM":
        assign = sp_["assign"]
        same = assign[pairs[:, 0]] == assign[pairs[:, 1]]
        return np.where(same, sp_["p_in"], sp_["p_out"])
    if kind == "DC-ER":
        d = sp_["degrees"].astype(np.float64)
        return d[pairs[:, 0]] * d[pairs[:, 1]]
    if kind == "DC-SBM":
        assign = sp_["assign"]
        theta = sp_["theta"]
        omega = sp_["omega"]
        return (theta[pairs[:, 0]] * theta[pairs[:, 1]]
                * omega[assign[pairs[:, 0]], assign[pairs[:, 1]]])
    raise SynthError(f"unknown score kind {kind!r}")


# ---------------------------------------------------------------------------
# the 45-row benchmark suite
# ---------------------------------------------------------------------------

def _poisson_row(region, k, n, **kw):
    return SyntheticSpec(family=FAMILY_POISSON, k=k, n=n, region=region,
                         name=f"{region}-eps_poisson_k{k}", **kw)


def _weibull_row(region, k, n, beta, **kw):
    return SyntheticSpec(family=FAMILY_WEIBULL, k=k, n=n, lam=1.0, beta=beta,
                         region=region, name=f"{region}-eps_weibull_k{k}", **kw)


def _powerlaw_row(region, k, n, exponent, **kw):
    return SyntheticSpec(family=FAMILY_POWERLAW, k=k, n=n, exponent=exponent,
                         region=region, name=f"{region}-eps_powerlaw_k{k}", **kw)


def builtin_suite() -> list[SyntheticSpec]:
    """The 45 benchmark parameterizations (low/moderate/high fuzziness)."""
    rows = [
        # low epsilon
        _poisson_row("low", 1, 505, p=0.008),
        _poisson_row("low", 2, 512, p_in=0.03, p_out=0.0003, epsilon=0.0003 / 0.03),
        _poisson_row("low", 4, 512, p_in=0.06, p_out=0.0003, epsilon=3 * 0.0003 / 0.06),
        _poisson_row("low", 16, 512, p_in=0.25, p_out=0.0003, epsilon=15 * 0.0003 / 0.25),
        _poisson_row("low", 32, 512, p_in=0.49, p_out=0.0003, epsilon=31 * 0.0003 / 0.49),
        _weibull_row("low", 1, 497, beta=0.5, omega=2350.0),
        _weibull_row("low", 2, 520, beta=0.4, epsilon=0.002),
        _weibull_row("low", 4, 604, beta=0.4, epsilon=0.002),
        _weibull_row("low", 16, 773, beta=0.4, epsilon=0.04),
        _weibull_row("low", 32, 939, beta=0.15, epsilon=0.0005),
        _powerlaw_row("low", 1, 507, exponent=1.6, omega=5436.0),
        _powerlaw_row("low", 2, 511, exponent=1.7, epsilon=0.0003),
        _powerlaw_row("low", 4, 511, exponent=1.8, epsilon=0.002),
        _powerlaw_row("low", 16, 983, exponent=1.6, epsilon=0.0015),
        _powerlaw_row("low", 32, 1029, exponent=1.41, epsilon=0.0015),
        # moderate epsilon
        _poisson_row("moderate", 1, 511, p=0.016),
        _poisson_row("moderate", 2, 512, p_in=0.03, p_out=0.005, epsilon=0.005 / 0.03),
        _poisson_row("moderate", 4, 512, p_in=0.04, p_out=0.006, epsilon=3 * 0.006 / 0.04),
        _poisson_row("moderate", 16, 512, p_in=0.16, p_out=0.006, epsilon=15 * 0.006 / 0.16),
        _poisson_row("moderate", 32, 511, p_in=0.31, p_out=0.006, epsilon=31 * 0.006 / 0.31),
        _weibull_row("moderate", 1, 510, beta=0.7, omega=1424.0),
        _weibull_row("moderate", 2, 501, beta=0.4, epsilon=0.06),
        _weibull_row("moderate", 4, 593, beta=0.4, epsilon=0.08),
        _weibull_row("moderate", 16, 589, beta=0.4, epsilon=0.2),
        _weibull_row("moderate", 32, 640, beta=0.22, epsilon=0.05),
        _powerlaw_row("moderate", 1, 545, exponent=1.9, omega=1428.0),
        _powerlaw_row("moderate", 2, 506, exponent=1.7, epsilon=0.05),
        _powerlaw_row("moderate", 4, 540, exponent=1.8, epsilon=0.05),
        _powerlaw_row("moderate", 16, 655, exponent=1.7, epsilon=0.01),
        _powerlaw_row("moderate", 32, 702, exponent=1.41, epsilon=0.01),
        # high epsilon
        _poisson_row("high", 1, 512, p=0.03),
        _poisson_row("high", 2, 512, p_in=0.025, p_out=0.006, epsilon=0.006 / 0.025),
        _poisson_row("high", 4, 512, p_in=0.04, p_out=0.007, epsilon=3 * 0.007 / 0.04),
        _poisson_row("high", 16, 512, p_in=0.14, p_out=0.007, epsilon=15 * 0.007 / 0.14),
        _poisson_row("high", 32, 512, p_in=0.27, p_out=0.007, epsilon=31 * 0.007 / 0.27),
        _weibull_row("high", 1, 489, beta=0.9, omega=1216.0),
        _weibull_row("high", 2, 506, beta=0.4, epsilon=0.2),
        _weibull_row("high", 4, 590, beta=0.4, epsilon=0.32),
        _weibull_row("high", 16, 600, beta=0.4, epsilon=0.5),
        _weibull_row("high", 32, 631, beta=0.22, epsilon=0.13),
        _powerlaw_row("high", 1, 514, exponent=2.2, omega=1722.0),
        _powerlaw_row("high", 2, 536, exponent=1.7, epsilon=0.08),
        _powerlaw_row("high", 4, 526, exponent=1.8, epsilon=0.14),
        _powerlaw_row("high", 16, 626, exponent=1.7, epsilon=0.1),
        _powerlaw_row("high", 32, 673, exponent=1.5, epsilon=0.05),
    ]
    for row in rows:
        row.validate()
    return rows


def export_planted(planted: PlantedGraph, edge_path, manifest_path,
                   partition_path) -> None:
    """Edge list plus sidecar manifest (spec, seed, partition file)."""
    from .graph import write_edge_list

    write_edge_list(planted.graph, edge_path)
    planted.partition.to_csv(partition_path)
    manifest = {
        "spec": planted.spec.to_dict(),
        "seed": planted.seed,
        "partition_file": str(partition_path),
        "n": planted.graph.n,
        "m": planted.graph.m,
        "multi_edge_fraction": planted.multi_edge_fraction,
        "multi_edge_warning": planted.multi_edge_warning,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
