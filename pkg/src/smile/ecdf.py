"""Empirical CDFs and the statistical distances between them.

All two-sample distances here operate on :class:`Ecdf` pairs and are
computed exactly from the step functions (no quadrature, no binning).
``euclidean`` and ``cosine_distance`` are the point-to-point baselines
and operate on raw vectors instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Ecdf",
    "DistanceMeasure",
    "build_ecdf",
    "wasserstein",
    "kolmogorov_smirnov",
    "kuiper",
    "cramer_von_mises",
    "anderson_darling",
    "euclidean",
    "cosine_distance",
    "ecdf_distance",
]


class DistanceMeasure(Enum):
    """Names of the supported distance measures.

    The ECDF-based members compare two empirical samples as distributions;
    EUCLIDEAN and COSINE compare two raw vectors point-to-point.
    """

    WASSERSTEIN = "wasserstein"
    KOLMOGOROV_SMIRNOV = "kolmogorov-smirnov"
    KUIPER = "kuiper"
    CRAMER_VON_MISES = "cramer-von-mises"
    ANDERSON_DARLING = "anderson-darling"
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"

    @property
    def is_ecdf_based(self) -> bool:
        return self not in (DistanceMeasure.EUCLIDEAN, DistanceMeasure.COSINE)

    @classmethod
    def from_name(cls, name: str) -> "DistanceMeasure":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown distance measure {name!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class Ecdf:
    """One-dimensional empirical distribution: a sorted sample of size n.

    F(t) = (number of samples <= t) / n, a right-continuous step function.
    Ties are kept as repeated values; no jitter is applied.
    """

    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.values.size

    def evaluate(self, t) -> np.ndarray:
        """F evaluated at t (scalar or array)."""
        return np.searchsorted(self.values, t, side="right") / self.n


def build_ecdf(samples) -> Ecdf:
    """Build an Ecdf from an unordered sample.

    Raises ValueError on an empty sample or any non-finite value.
    """
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty sample set")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite sample")
    arr = np.sort(arr)
    arr.flags.writeable = False
    return Ecdf(arr)


def _pooled_gaps(a: Ecdf, b: Ecdf):
    """Pooled sorted sample (with multiplicity) and F_a - F_b at each point."""
    pooled = np.sort(np.concatenate([a.values, b.values]))
    fa = np.searchsorted(a.values, pooled, side="right") / a.n
    fb = np.searchsorted(b.values, pooled, side="right") / b.n
    return pooled, fa - fb


def wasserstein(a: Ecdf, b: Ecdf) -> float:
    """Area between the two step functions: integral of |F_a - F_b|.

    Exact merge over the union of breakpoints; the integrand is
    piecewise constant between consecutive pooled sample values.
    """
    pooled, gaps = _pooled_gaps(a, b)
    return float(np.sum(np.abs(gaps[:-1]) * np.diff(pooled)))


def kolmogorov_smirnov(a: Ecdf, b: Ecdf) -> float:
    """sup_t |F_a(t) - F_b(t)|, attained at a pooled sample point."""
    _, gaps = _pooled_gaps(a, b)
    return float(np.max(np.abs(gaps)))


def kuiper(a: Ecdf, b: Ecdf) -> float:
    """D+ + D-: largest positive plus largest negative ECDF deviation."""
    _, gaps = _pooled_gaps(a, b)
    d_plus = max(float(np.max(gaps)), 0.0)
    d_minus = max(float(np.max(-gaps)), 0.0)
    return d_plus + d_minus


def cramer_von_mises(a: Ecdf, b: Ecdf) -> float:
    """Sum of squared ECDF gaps over all pooled sample points / pooled size.

    Pooled points are counted with multiplicity. Any fixed positive
    normalization gives the same kernel-weight ordering; this is the
    simplest symmetric one.
    """
    _, gaps = _pooled_gaps(a, b)
    return float(np.sum(gaps**2) / gaps.size)


def anderson_darling(a: Ecdf, b: Ecdf) -> float:
    """Tail-weighted squared-gap sum over pooled points / pooled size.

    Each term is weighted by 1 / (H(t)(1 - H(t))) with H the pooled ECDF;
    points where H is 0 or 1 are skipped (the weight is undefined there).
    """
    pooled, gaps = _pooled_gaps(a, b)
    if pooled[0] == pooled[-1]:
        raise ValueError("degenerate pooled sample")
    h = np.searchsorted(pooled, pooled, side="right") / pooled.size
    interior = (h > 0.0) & (h < 1.0)
    terms = gaps[interior] ** 2 / (h[interior] * (1.0 - h[interior]))
    return float(np.sum(terms) / pooled.size)


def euclidean(u, v) -> float:
    """L2 norm of u - v."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.linalg.norm(u - v))


def cosine_distance(u, v) -> float:
    """1 - cos(angle between u and v); in [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("undefined cosine distance")
    return float(1.0 - np.dot(u, v) / (nu * nv))


_ECDF_DISPATCH = {
    DistanceMeasure.WASSERSTEIN: wasserstein,
    DistanceMeasure.KOLMOGOROV_SMIRNOV: kolmogorov_smirnov,
    DistanceMeasure.KUIPER: kuiper,
    DistanceMeasure.CRAMER_VON_MISES: cramer_von_mises,
    DistanceMeasure.ANDERSON_DARLING: anderson_darling,
}


def ecdf_distance(a: Ecdf, b: Ecdf, measure: DistanceMeasure) -> float:
    """Dispatch to the named ECDF-based distance."""
    try:
        return _ECDF_DISPATCH[measure](a, b)
    except KeyError:
        raise ValueError(f"{measure.value} is not an ECDF-based measure") from None
