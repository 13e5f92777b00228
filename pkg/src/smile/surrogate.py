"""Kernel weighting and the weighted linear surrogate.

The surrogate minimizes  sum_i w_i (y_i - b0 - b.x_i)^2 + lambda ||b||^2
with the intercept left unpenalized, solved by normal equations with a
Cholesky factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

__all__ = ["KernelConfig", "SurrogateFit", "kernel_weight", "fit_weighted_ridge", "select_top_features"]


@dataclass(frozen=True)
class KernelConfig:
    """Width (sigma) of the exponential kernel exp(-d^2 / sigma^2)."""

    width: float

    def __post_init__(self):
        if not (self.width > 0):
            raise ValueError("kernel width must be positive")


@dataclass(frozen=True)
class SurrogateFit:
    coefficients: np.ndarray
    intercept: float
    lambda_: float
    weighted_r2: float


def kernel_weight(distance: float, cfg: KernelConfig) -> float:
    """exp(-distance^2 / width^2); strictly decreasing in distance."""
    distance = float(distance)
    if not np.isfinite(distance) or distance < 0:
        raise ValueError("distance must be finite and non-negative")
    return float(np.exp(-(distance**2) / cfg.width**2))


def fit_weighted_ridge(features, targets, weights, lambda_: float) -> SurrogateFit:
    """Weighted ridge with unpenalized intercept, via normal equations."""
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(targets, dtype=np.float64).ravel()
    w = np.asarray(weights, dtype=np.float64).ravel()
    n, d = X.shape
    if y.size != n or w.size != n:
        raise ValueError("features, targets, and weights disagree in length")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite entries in the regression inputs")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if np.count_nonzero(w) == 0:
        raise ValueError("all weights are zero")
    if np.count_nonzero(w) < d + 1:
        raise ValueError(f"need at least {d + 1} positively weighted rows")
    if lambda_ < 0:
        raise ValueError("lambda must be >= 0")

    # Center by the weighted means: with the intercept unpenalized this is
    # algebraically identical and keeps the system well conditioned when
    # features barely vary.
    xbar = np.average(X, axis=0, weights=w)
    ybar = np.average(y, weights=w)
    Xc = X - xbar
    yc = y - ybar
    A = (Xc * w[:, None]).T @ Xc + lambda_ * np.eye(d)
    b = (Xc * w[:, None]).T @ yc
    try:
        factor = cho_factor(A)
    except LinAlgError:
        raise ValueError("singular design; set lambda>0") from None
    coefs = cho_solve(factor, b)
    intercept = float(ybar - xbar @ coefs)

    resid = yc - Xc @ coefs
    ss_tot = float(np.sum(w * yc**2))
    ss_res = float(np.sum(w * resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    coefs = coefs.copy()
    coefs.flags.writeable = False
    return SurrogateFit(coefficients=coefs, intercept=intercept, lambda_=float(lambda_), weighted_r2=r2)


def select_top_features(fit: SurrogateFit, k: int) -> list[tuple[int, float]]:
    """Top-k features by |coefficient|, ties broken by ascending index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    coefs = fit.coefficients
    order = sorted(range(coefs.size), key=lambda i: (-abs(coefs[i]), i))
    return [(i, float(coefs[i])) for i in order[: min(k, coefs.size)]]
