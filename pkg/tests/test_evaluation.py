import numpy as np
import pytest

from smile.blackbox import mars_model
from smile.ecdf import DistanceMeasure
from smile.evaluation import (
    GroundTruthMask,
    coverage,
    jaccard_index,
    robustness_ratio,
    stability_experiment,
    weighted_coverage,
)
from smile.perturbation import TabularPerturbationConfig


def test_jaccard_examples():
    assert jaccard_index({1, 2}, {1, 2}) == 1.0
    assert jaccard_index({1}, {2}) == 0.0
    assert jaccard_index({1, 2, 3}, {2, 3, 4}) == 0.5


def test_jaccard_symmetric_and_identity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = set(rng.integers(0, 10, size=rng.integers(1, 6)).tolist())
        b = set(rng.integers(0, 10, size=rng.integers(1, 6)).tolist())
        assert jaccard_index(a, b) == jaccard_index(b, a)
        assert (jaccard_index(a, b) == 1.0) == (a == b)


def test_jaccard_both_empty():
    with pytest.raises(ValueError, match="undefined Jaccard"):
        jaccard_index(set(), set())


# ---------------------------------------------------------------------------
# coverage


def test_coverage_hand_evaluation():
    mask = GroundTruthMask(labels=np.array([[1, 1], [0, 0]]), coi=1)
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert coverage(X, mask) == pytest.approx(0.5)  # (1 - 0)/2


def test_coverage_perfect():
    mask = GroundTruthMask(labels=np.array([[1, 0], [0, 1]]), coi=1)
    X = (mask.labels == 1).astype(float)
    assert coverage(X, mask) == 1.0


def test_coverage_no_hits():
    mask = GroundTruthMask(labels=np.array([[1, 0], [0, 1]]), coi=1)
    assert coverage(np.zeros((2, 2)), mask) == 0.0


def test_coverage_sign_pattern_only():
    mask = GroundTruthMask(labels=np.array([[1, 1], [0, 0]]), coi=1)
    X = np.array([[0.3, -0.2], [0.0, 0.7]])
    assert coverage(X, mask) == coverage(17.0 * X, mask)


def test_coverage_coi_absent():
    with pytest.raises(ValueError, match="absent"):
        GroundTruthMask(labels=np.zeros((2, 2), dtype=int), coi=1)


def test_coverage_dimension_mismatch():
    mask = GroundTruthMask(labels=np.array([[1, 0], [0, 1]]), coi=1)
    with pytest.raises(ValueError):
        coverage(np.zeros((3, 3)), mask)


# ---------------------------------------------------------------------------
# weighted coverage


def test_weighted_coverage_hand_evaluation():
    mask = GroundTruthMask(labels=np.array([[1, 1], [0, 0]]), coi=1)
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert weighted_coverage(X, mask) == pytest.approx(0.25)  # 1/4


def test_weighted_coverage_zero_cases():
    mask = GroundTruthMask(labels=np.array([[1, 1], [0, 0]]), coi=1)
    assert weighted_coverage(np.zeros((2, 2)), mask) == 0.0
    assert weighted_coverage(np.ones((2, 2)), mask) == 0.0  # symmetry cancels


def test_weighted_coverage_linear_in_x():
    rng = np.random.default_rng(1)
    mask = GroundTruthMask(labels=rng.integers(0, 2, size=(5, 5)), coi=1)
    X = rng.normal(size=(5, 5))
    c = -3.2
    assert weighted_coverage(c * X, mask) == pytest.approx(c * weighted_coverage(X, mask))


# ---------------------------------------------------------------------------
# robustness ratio


def test_robustness_ratio_examples():
    assert robustness_ratio([0.1, 0.1, 0.8], 2) == pytest.approx(0.8)
    assert robustness_ratio([0.5, 0.0, 0.5], 1) == 0.0


def test_robustness_ratio_scale_invariant():
    coefs = np.array([0.2, -0.5, 0.3])
    assert robustness_ratio(coefs, 1) == pytest.approx(robustness_ratio(9.0 * coefs, 1))


def test_robustness_ratio_errors():
    with pytest.raises(ValueError):
        robustness_ratio([0.0, 0.0], 0)
    with pytest.raises(ValueError):
        robustness_ratio([1.0], 3)


# ---------------------------------------------------------------------------
# stability experiment


def test_stability_pair_count():
    model = mars_model()
    cfg = TabularPerturbationConfig(n_primary=50, m_local=5, sigma1=0.1, seed=0)
    rep = stability_experiment(
        model, [0.51, 0.49, 0.5, 0.5, 0.5], cfg, DistanceMeasure.WASSERSTEIN, 2, 2, [0, 1]
    )
    assert len(rep.pairwise_jaccards) == 1
    assert rep.runs == 2


def test_stability_noise_free_is_one():
    # with vanishing perturbation scale the ranking locks onto the local
    # gradient and every seed agrees
    from smile.blackbox import BlackBoxModel, OutputKind

    model = BlackBoxModel(
        predict=lambda b: 3 * b[:, 0] - 2 * b[:, 1] + 0.5 * b[:, 2],
        output_kind=OutputKind.REGRESSION,
    )
    cfg = TabularPerturbationConfig(n_primary=100, m_local=3, sigma1=1e-12, sigma2=1e-13, seed=0)
    rep = stability_experiment(
        model, [0.0, 0.0, 0.0], cfg, DistanceMeasure.WASSERSTEIN, 5, 2, list(range(5))
    )
    assert rep.mean_jaccard == 1.0


def test_stability_validation():
    model = mars_model()
    cfg = TabularPerturbationConfig(n_primary=20, m_local=3, sigma1=0.1, seed=0)
    with pytest.raises(ValueError):
        stability_experiment(model, [0.5] * 5, cfg, DistanceMeasure.WASSERSTEIN, 1, 2, [0])
    with pytest.raises(ValueError, match="distinct seeds"):
        stability_experiment(model, [0.5] * 5, cfg, DistanceMeasure.WASSERSTEIN, 2, 2, [3, 3])


def test_stability_report_mean_consistency():
    model = mars_model()
    cfg = TabularPerturbationConfig(n_primary=100, m_local=10, sigma1=0.1, seed=0)
    rep = stability_experiment(
        model, [0.51, 0.49, 0.5, 0.5, 0.5], cfg, DistanceMeasure.WASSERSTEIN, 4, 2, [0, 1, 2, 3]
    )
    assert len(rep.pairwise_jaccards) == 6
    assert rep.mean_jaccard == pytest.approx(np.mean(rep.pairwise_jaccards))
    assert len(rep.coefficients) == 4
