"""Quantitative evaluation of explanations.

Jaccard stability across repeated seeded runs, pixel-level coverage and
weighted coverage against a ground-truth class mask, and the robustness
ratio of a known-unrelated feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .blackbox import BlackBoxModel
from .ecdf import DistanceMeasure
from .explainers import explain_tabular
from .perturbation import TabularPerturbationConfig
from .surrogate import KernelConfig, SurrogateFit, select_top_features

__all__ = [
    "GroundTruthMask",
    "StabilityReport",
    "jaccard_index",
    "stability_experiment",
    "coverage",
    "weighted_coverage",
    "robustness_ratio",
]


@dataclass(frozen=True)
class GroundTruthMask:
    """Per-pixel class ids plus the class of interest."""

    labels: np.ndarray  # (H, W) int
    coi: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError("labels must be a 2-D pixel map")
        if not np.any(self.labels == self.coi):
            raise ValueError("class of interest absent from the mask")


@dataclass(frozen=True)
class StabilityReport:
    runs: int
    k: int
    pairwise_jaccards: list[float]
    mean_jaccard: float
    coefficients: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "runs": self.runs,
            "k": self.k,
            "pairwise_jaccards": self.pairwise_jaccards,
            "mean_jaccard": self.mean_jaccard,
        }


def jaccard_index(a, b) -> float:
    """|A n B| / |A u B|; undefined when both sets are empty."""
    a, b = set(a), set(b)
    if not a and not b:
        raise ValueError("undefined Jaccard: both sets empty")
    return len(a & b) / len(a | b)


def stability_experiment(
    model: BlackBoxModel,
    x,
    cfg: TabularPerturbationConfig,
    measure: DistanceMeasure,
    runs: int,
    k: int,
    seeds,
    kernel: KernelConfig | None = None,
    lambda_: float = 1e-6,
    target_class: int | None = None,
) -> StabilityReport:
    """Re-run the explainer once per seed and score top-k set agreement
    with all pairwise Jaccard indices."""
    seeds = list(seeds)
    if runs < 2:
        raise ValueError("runs must be >= 2")
    if len(seeds) != runs or len(set(seeds)) != runs:
        raise ValueError("need exactly `runs` distinct seeds")

    top_sets = []
    coef_table = []
    for seed in seeds:
        run_cfg = TabularPerturbationConfig(
            n_primary=cfg.n_primary,
            m_local=cfg.m_local,
            sigma1=cfg.sigma1,
            sigma2=cfg.sigma2,
            seed=int(seed),
        )
        expl = explain_tabular(
            model, x, run_cfg, measure=measure, kernel=kernel, lambda_=lambda_, target_class=target_class
        )
        fit = SurrogateFit(expl.coefficients, expl.intercept, lambda_, expl.weighted_r2)
        top_sets.append({idx for idx, _ in select_top_features(fit, k)})
        coef_table.append([float(c) for c in expl.coefficients])

    pairwise = [jaccard_index(a, b) for a, b in combinations(top_sets, 2)]
    return StabilityReport(
        runs=runs,
        k=k,
        pairwise_jaccards=pairwise,
        mean_jaccard=float(np.mean(pairwise)),
        coefficients=coef_table,
    )


def coverage(expl_pixels, mask: GroundTruthMask) -> float:
    """(positive hits inside the class of interest - positive hits outside)
    divided by the class-of-interest pixel count. Depends only on the sign
    pattern of the explanation."""
    X = np.asarray(expl_pixels, dtype=np.float64)
    if X.shape != mask.labels.shape:
        raise ValueError("explanation and mask dimensions differ")
    inside = mask.labels == mask.coi
    n_coi = int(inside.sum())
    hits = X > 0
    return float((np.sum(hits & inside) - np.sum(hits & ~inside)) / n_coi)


def weighted_coverage(expl_pixels, mask: GroundTruthMask) -> float:
    """Mean of X * s over all pixels, with s = +1 inside the class of
    interest and -1 outside. Linear in X."""
    X = np.asarray(expl_pixels, dtype=np.float64)
    if X.shape != mask.labels.shape:
        raise ValueError("explanation and mask dimensions differ")
    sign = np.where(mask.labels == mask.coi, 1.0, -1.0)
    return float(np.sum(X * sign) / X.size)


def robustness_ratio(coefficients, unrelated_index: int) -> float:
    """|coefficient of the unrelated feature| / L1 norm of all coefficients.

    0 means the explainer ignored the unrelated feature entirely; 1 means
    it attributed everything to it.
    """
    coefs = np.asarray(coefficients, dtype=np.float64).ravel()
    if not (0 <= unrelated_index < coefs.size):
        raise ValueError("unrelated_index out of range")
    total = float(np.sum(np.abs(coefs)))
    if total == 0:
        raise ValueError("all coefficients are zero")
    return float(abs(coefs[unrelated_index]) / total)
