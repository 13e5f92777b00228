"""End-to-end explanation pipelines.

Tabular: two-stage Gaussian perturbation -> expected predictions over each
local cloud -> per-feature ECDF distance between the origin cloud and each
primary's cloud -> exponential kernel weights -> weighted ridge surrogate.
Choosing the Euclidean or cosine measure switches the distance step to the
point-to-point comparison used by LIME; everything else stays identical.

Image: binary superpixel masks -> masked images -> target-class
probabilities -> per-channel ECDF distance between original and perturbed
pixel intensity distributions -> kernel weights -> ridge on the mask
vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .blackbox import BlackBoxModel
from .ecdf import DistanceMeasure, build_ecdf, cosine_distance, ecdf_distance, euclidean
from .perturbation import (
    MaskSet,
    TabularPerturbationConfig,
    apply_mask,
    generate_masks,
    perturb_tabular,
)
from .segmentation import Image, SuperpixelMap, save_image
from .surrogate import KernelConfig, fit_weighted_ridge, kernel_weight, select_top_features

__all__ = [
    "Explanation",
    "expected_prediction",
    "tabular_distance",
    "explain_tabular",
    "image_distance",
    "explain_image",
    "render_heatmap",
    "render_segment_overlay",
]

DEFAULT_LAMBDA = 1e-6


@dataclass(frozen=True)
class Explanation:
    """Per-feature (or per-superpixel) surrogate coefficients plus the
    configuration needed to reproduce them."""

    coefficients: np.ndarray
    intercept: float
    measure: DistanceMeasure
    sample_weights: np.ndarray
    weighted_r2: float
    seed: int
    target_class: int | None = None
    config_echo: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "measure": self.measure.value,
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": float(self.intercept),
            "weighted_r2": float(self.weighted_r2),
            "target_class": self.target_class,
            "config": self.config_echo,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def expected_prediction(model: BlackBoxModel, locals_, target_class: int | None = None) -> float:
    """Mean model output over a local sample cloud.

    Classifiers average the probability of target_class (required);
    regressors average the raw output (target_class forbidden).
    """
    locals_ = np.atleast_2d(np.asarray(locals_, dtype=np.float64))
    if locals_.shape[0] < 1:
        raise ValueError("need at least one local sample")
    out = model.predict(locals_)
    if model.is_classifier:
        if target_class is None:
            raise ValueError("target_class is required for classifiers")
        return float(np.mean(out[:, target_class]))
    if target_class is not None:
        raise ValueError("target_class is only valid for classifiers")
    return float(np.mean(out))


def tabular_distance(origin_locals, locals_i, measure: DistanceMeasure) -> float:
    """Mean over features of the ECDF distance between the two clouds.

    Each feature column is summarized as its own ECDF; the per-feature
    distances are averaged so the kernel scale does not grow with the
    feature count.
    """
    if not measure.is_ecdf_based:
        raise ValueError(f"{measure.value} is a point-to-point baseline, not an ECDF measure")
    a = np.atleast_2d(np.asarray(origin_locals, dtype=np.float64))
    b = np.atleast_2d(np.asarray(locals_i, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError("feature dimensions differ")
    dists = [ecdf_distance(build_ecdf(a[:, j]), build_ecdf(b[:, j]), measure) for j in range(a.shape[1])]
    return float(np.mean(dists))


def _resolve_width(distances: np.ndarray, d: int, kernel: KernelConfig | None) -> float:
    """Explicit width wins; otherwise 0.75 sqrt(d) scaled by the median
    observed distance (falling back to 0.75 sqrt(d) when all distances
    vanish), so mid-range samples keep non-negligible weight."""
    if kernel is not None:
        return kernel.width
    med = float(np.median(distances))
    base = 0.75 * np.sqrt(d)
    return base * med if med > 0 else base


def explain_tabular(
    model: BlackBoxModel,
    x,
    cfg: TabularPerturbationConfig,
    measure: DistanceMeasure = DistanceMeasure.WASSERSTEIN,
    kernel: KernelConfig | None = None,
    lambda_: float = DEFAULT_LAMBDA,
    target_class: int | None = None,
) -> Explanation:
    """Explain one tabular prediction. Deterministic given cfg.seed."""
    x = np.asarray(x, dtype=np.float64).ravel()
    pset = perturb_tabular(x, cfg)
    n, m, d = cfg.n_primary, cfg.m_local, x.size

    flat = pset.locals_.reshape(n * m, d)
    out = model.predict(flat)
    if model.is_classifier:
        if target_class is None:
            raise ValueError("target_class is required for classifiers")
        y = out[:, target_class].reshape(n, m).mean(axis=1)
    else:
        if target_class is not None:
            raise ValueError("target_class is only valid for classifiers")
        y = np.asarray(out, dtype=np.float64).reshape(n, m).mean(axis=1)

    if measure.is_ecdf_based:
        distances = np.array(
            [tabular_distance(pset.origin_locals, pset.locals_[i], measure) for i in range(n)]
        )
    elif measure is DistanceMeasure.EUCLIDEAN:
        distances = np.array([euclidean(x, p) for p in pset.primaries])
    else:
        distances = np.array([cosine_distance(x, p) for p in pset.primaries])

    width = _resolve_width(distances, d, kernel)
    kcfg = KernelConfig(width=width)
    weights = np.array([kernel_weight(di, kcfg) for di in distances])

    fit = fit_weighted_ridge(pset.primaries, y, weights, lambda_)
    echo = {
        "n_primary": n,
        "m_local": m,
        "sigma1": _echo_sigma(cfg.sigma1),
        "sigma2": _echo_sigma(cfg.sigma2),
        "kernel_width": width,
        "lambda": lambda_,
        "point": [float(v) for v in x],
    }
    return Explanation(
        coefficients=fit.coefficients,
        intercept=fit.intercept,
        measure=measure,
        sample_weights=weights,
        weighted_r2=fit.weighted_r2,
        seed=cfg.seed,
        target_class=target_class,
        config_echo=echo,
    )


def _echo_sigma(sigma) -> float | list[float]:
    if np.isscalar(sigma):
        return float(sigma)
    return [float(s) for s in np.asarray(sigma).ravel()]


def image_distance(original: Image, perturbed, measure: DistanceMeasure) -> float:
    """ECDF distance between the pixel-intensity distributions of two
    images, averaged over channels."""
    if not measure.is_ecdf_based:
        raise ValueError(f"{measure.value} does not apply to pixel distributions")
    a = original.pixels if isinstance(original, Image) else np.asarray(original, dtype=np.float64)
    b = perturbed.pixels if isinstance(perturbed, Image) else np.asarray(perturbed, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("image dimensions differ")
    dists = [
        ecdf_distance(build_ecdf(a[:, :, c].ravel()), build_ecdf(b[:, :, c].ravel()), measure)
        for c in range(a.shape[2])
    ]
    return float(np.mean(dists))


def explain_image(
    model: BlackBoxModel,
    img: Image,
    segments: SuperpixelMap,
    k_masks: int = 1000,
    measure: DistanceMeasure = DistanceMeasure.WASSERSTEIN,
    kernel: KernelConfig | None = None,
    lambda_: float = DEFAULT_LAMBDA,
    target_class: int = 0,
    top_m: int = 5,
    keep_probability: float = 0.5,
    seed: int = 0,
) -> tuple[Explanation, list[tuple[int, float]]]:
    """Explain one image prediction; returns the explanation plus the
    top-m segments by |coefficient|. Deterministic given seed."""
    if img.pixels.shape[:2] != segments.labels.shape:
        raise ValueError("image and segment map dimensions differ")
    maskset: MaskSet = generate_masks(segments.n_segments, k_masks, keep_probability, seed)

    perturbed = np.stack([apply_mask(img.pixels, segments, mk) for mk in maskset.masks])
    probs = model.predict(perturbed)
    if not model.is_classifier:
        raise ValueError("image explanation expects a classifier")
    y = probs[:, target_class]

    ones = np.ones(segments.n_segments)
    if measure.is_ecdf_based:
        distances = np.array([image_distance(img, pert, measure) for pert in perturbed])
    elif measure is DistanceMeasure.COSINE:
        distances = np.array([cosine_distance(ones, mk) if mk.any() else 2.0 for mk in maskset.masks])
    else:
        distances = np.array([euclidean(ones, mk) for mk in maskset.masks])

    width = _resolve_width(distances, segments.n_segments, kernel)
    kcfg = KernelConfig(width=width)
    weights = np.array([kernel_weight(di, kcfg) for di in distances])

    fit = fit_weighted_ridge(maskset.masks.astype(np.float64), y, weights, lambda_)
    top = select_top_features(fit, top_m)
    echo = {
        "k_masks": k_masks,
        "keep_probability": keep_probability,
        "n_segments": segments.n_segments,
        "kernel_width": width,
        "lambda": lambda_,
        "top_m": top_m,
    }
    expl = Explanation(
        coefficients=fit.coefficients,
        intercept=fit.intercept,
        measure=measure,
        sample_weights=weights,
        weighted_r2=fit.weighted_r2,
        seed=seed,
        target_class=target_class,
        config_echo=echo,
    )
    return expl, top


def coefficients_to_pixels(coefficients, segments: SuperpixelMap) -> np.ndarray:
    """Broadcast per-segment coefficients to an (H, W) pixel map."""
    coefs = np.asarray(coefficients, dtype=np.float64)
    if coefs.size != segments.n_segments:
        raise ValueError("coefficient count does not match segment count")
    return coefs[segments.labels]


def render_heatmap(expl: Explanation, segments: SuperpixelMap, out_path: str) -> None:
    """Write a diverging-scale PNG: negative blue, zero white, positive red,
    normalized by the largest |coefficient|."""
    values = coefficients_to_pixels(expl.coefficients, segments)
    peak = np.max(np.abs(values))
    norm = values / peak if peak > 0 else np.zeros_like(values)
    h, w = norm.shape
    rgb = np.ones((h, w, 3))
    pos = norm > 0
    neg = norm < 0
    rgb[pos, 1] = 1.0 - norm[pos]
    rgb[pos, 2] = 1.0 - norm[pos]
    rgb[neg, 0] = 1.0 + norm[neg]
    rgb[neg, 1] = 1.0 + norm[neg]
    save_image(rgb, out_path)


def render_segment_overlay(img: Image, segments: SuperpixelMap, selected, out_path: str) -> None:
    """Write the image with non-selected segments dimmed to 30% intensity."""
    keep = np.zeros(segments.n_segments, dtype=bool)
    for idx in selected:
        keep[idx] = True
    pixels = img.pixels
    if pixels.shape[2] == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    dim = np.where(keep[segments.labels][:, :, None], pixels, 0.3 * pixels)
    save_image(dim, out_path)
