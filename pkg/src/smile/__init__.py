"""SMILE: local model-agnostic explanations weighted by ECDF statistical
distances, with LIME-style Euclidean/cosine baselines, a built-in model
zoo, and an evaluation harness."""

from .blackbox import (
    BlackBoxModel,
    OutputKind,
    biased_model_with_unrelated_feature,
    fit_linear_model,
    mars_function,
    mars_model,
    square_region_classifier,
)
from .ecdf import (
    DistanceMeasure,
    Ecdf,
    anderson_darling,
    build_ecdf,
    cosine_distance,
    cramer_von_mises,
    ecdf_distance,
    euclidean,
    kolmogorov_smirnov,
    kuiper,
    wasserstein,
)
from .evaluation import (
    GroundTruthMask,
    StabilityReport,
    coverage,
    jaccard_index,
    robustness_ratio,
    stability_experiment,
    weighted_coverage,
)
from .explainers import (
    Explanation,
    coefficients_to_pixels,
    expected_prediction,
    explain_image,
    explain_tabular,
    image_distance,
    render_heatmap,
    render_segment_overlay,
    tabular_distance,
)
from .perturbation import (
    MaskSet,
    PerturbationSet,
    TabularPerturbationConfig,
    apply_mask,
    generate_masks,
    perturb_tabular,
)
from .segmentation import Image, SuperpixelMap, grid_segments, load_image, save_image, slic_segments
from .surrogate import KernelConfig, SurrogateFit, fit_weighted_ridge, kernel_weight, select_top_features

__version__ = "0.1.0"
