"""Random sample generation for the explainers.

Tabular data gets a two-stage Gaussian scheme: N primary samples around
the instance, then M local samples around each primary (and around the
instance itself, so a reference cloud exists for the distance step).
Images get binary keep/drop masks over superpixels.

All randomness comes from ``numpy.random.Generator`` seeded with PCG64,
which is deterministic and platform-independent for a fixed seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TabularPerturbationConfig",
    "PerturbationSet",
    "MaskSet",
    "perturb_tabular",
    "generate_masks",
    "apply_mask",
]


@dataclass
class TabularPerturbationConfig:
    """Knobs for two-stage Gaussian perturbation.

    sigma1/sigma2 may be scalars or per-feature arrays. sigma2 defaults
    to 0.25 * sigma1 so local clouds stay tighter than the primary spread.
    """

    n_primary: int = 1000
    m_local: int = 50
    sigma1: float | np.ndarray = 1.0
    sigma2: float | np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_primary < 2:
            raise ValueError("n_primary must be >= 2")
        if self.m_local < 2 and self.m_local != 1:
            raise ValueError("m_local must be >= 2 (or exactly 1 for the point baseline)")
        if np.any(np.asarray(self.sigma1) <= 0):
            raise ValueError("sigma1 must be positive")
        if self.sigma2 is None:
            self.sigma2 = 0.25 * np.asarray(self.sigma1, dtype=np.float64)
            if np.isscalar(self.sigma1):
                self.sigma2 = float(self.sigma2)
        if np.any(np.asarray(self.sigma2) <= 0):
            raise ValueError("sigma2 must be positive")
        if np.isscalar(self.sigma1) and np.isscalar(self.sigma2) and self.sigma2 >= self.sigma1:
            warnings.warn(
                "sigma2 >= sigma1: local clouds are as wide as the primary spread",
                stacklevel=2,
            )


@dataclass(frozen=True)
class PerturbationSet:
    """N primaries around the origin, M locals around each, plus M locals
    around the origin itself (the reference cloud for ECDF distances)."""

    origin: np.ndarray  # (d,)
    primaries: np.ndarray  # (N, d)
    locals_: np.ndarray  # (N, M, d)
    origin_locals: np.ndarray  # (M, d)

    @property
    def n_primary(self) -> int:
        return self.primaries.shape[0]

    @property
    def m_local(self) -> int:
        return self.locals_.shape[1]


def perturb_tabular(x, cfg: TabularPerturbationConfig) -> PerturbationSet:
    """Draw the full two-stage perturbation set around x.

    Deterministic given cfg.seed. Draw order is fixed (primaries, then
    locals, then origin locals) so results never depend on consumers.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input point")
    d = x.size
    n, m = cfg.n_primary, cfg.m_local
    rng = np.random.default_rng(cfg.seed)
    primaries = x + rng.standard_normal((n, d)) * cfg.sigma1
    locals_ = primaries[:, None, :] + rng.standard_normal((n, m, d)) * cfg.sigma2
    origin_locals = x + rng.standard_normal((m, d)) * cfg.sigma2
    for arr in (primaries, locals_, origin_locals):
        arr.flags.writeable = False
    return PerturbationSet(origin=x, primaries=primaries, locals_=locals_, origin_locals=origin_locals)


@dataclass(frozen=True)
class MaskSet:
    """K binary keep/drop vectors over superpixels. Mask 0 is all-ones so
    the unperturbed image is always part of the regression design."""

    masks: np.ndarray  # (K, n_segments), dtype uint8
    keep_probability: float

    @property
    def k(self) -> int:
        return self.masks.shape[0]

    @property
    def n_segments(self) -> int:
        return self.masks.shape[1]


def generate_masks(n_segments: int, k: int, keep_probability: float, seed: int) -> MaskSet:
    """K masks: the first all-ones, the rest i.i.d. Bernoulli(keep_probability)."""
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if k < 2:
        raise ValueError("k must be >= 2")
    if not (0.0 < keep_probability < 1.0):
        raise ValueError("keep_probability must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    masks = (rng.random((k, n_segments)) < keep_probability).astype(np.uint8)
    masks[0, :] = 1
    masks.flags.writeable = False
    return MaskSet(masks=masks, keep_probability=float(keep_probability))


def apply_mask(image, segments, mask) -> np.ndarray:
    """Replace dropped segments with the per-channel mean color of the image.

    image: (H, W, C) array in [0, 1]; segments: SuperpixelMap; mask: binary
    vector of length segments.n_segments.
    """
    pixels = np.asarray(image, dtype=np.float64)
    labels = segments.labels
    mask = np.asarray(mask)
    if mask.size != segments.n_segments:
        raise ValueError("mask length does not match segment count")
    if labels.shape != pixels.shape[:2]:
        raise ValueError("image and segment map dimensions differ")
    mean_color = pixels.reshape(-1, pixels.shape[2]).mean(axis=0)
    out = pixels.copy()
    dropped = mask[labels] == 0
    out[dropped] = mean_color
    return out
