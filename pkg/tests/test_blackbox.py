import numpy as np
import pytest

from smile.blackbox import (
    OutputKind,
    biased_model_with_unrelated_feature,
    fit_linear_model,
    load_csv_dataset,
    mars_function,
    mars_model,
    square_region_classifier,
)


def mars_reference(x):
    # independent evaluation, different operation order
    x1, x2, x3, x4, x5 = (float(v) for v in x)
    total = 5.0 * x5
    total += 5.0 * x4
    total += 20.0 * (x3 * x3 - 0.1 * x3 + 0.0025)
    total += 10.0 * np.sin(np.pi * (x1 * x2))
    return total


def test_mars_pinned_values():
    assert mars_function([0, 0, 0.05, 0, 0]) == pytest.approx(0.0, abs=1e-12)
    assert mars_function([0, 0, 0.05, 1, 0]) == pytest.approx(5.0, abs=1e-12)
    # recomputed by hand from the formula at the benchmark test point
    assert mars_function([0.51, 0.49, 0.5, 0.5, 0.5]) == pytest.approx(16.118846021, abs=1e-8)


def test_mars_matches_independent_evaluation():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, size=(10_000, 5))
    batch = mars_model().predict(pts)
    for i in range(0, 10_000, 97):
        assert mars_function(pts[i]) == pytest.approx(mars_reference(pts[i]), abs=1e-12)
        assert batch[i] == pytest.approx(mars_reference(pts[i]), abs=1e-12)


def test_mars_wrong_length():
    with pytest.raises(ValueError):
        mars_function([1, 2, 3])
    with pytest.raises(ValueError):
        mars_model().predict(np.zeros((2, 4)))


# ---------------------------------------------------------------------------
# fit_linear_model


def test_two_point_line():
    m = fit_linear_model([[0.0], [1.0]], [0.0, 1.0], regularization=0.0)
    assert m.output_kind is OutputKind.REGRESSION
    pred = m.predict([[0.0], [1.0]])
    assert pred[0] == pytest.approx(0.0, abs=1e-9)
    assert pred[1] == pytest.approx(1.0, abs=1e-9)


def test_regression_recovers_coefficients():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 2))
    y = 3 * X[:, 0] - 2 * X[:, 1]
    m = fit_linear_model(X, y, regularization=1e-8)
    # closed-form least squares oracle
    Xa = np.hstack([np.ones((100, 1)), X])
    beta_ols, *_ = np.linalg.lstsq(Xa, y, rcond=None)
    got = m.predict(np.eye(2)) - m.predict(np.zeros((2, 2)))
    assert got[0] == pytest.approx(3.0, abs=1e-3)
    assert got[1] == pytest.approx(-2.0, abs=1e-3)
    assert beta_ols[1] == pytest.approx(3.0, abs=1e-9)


def test_logistic_separable():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(-3, 0.5, size=(30, 2)), rng.normal(3, 0.5, size=(30, 2))])
    y = np.array([0] * 30 + [1] * 30)
    m = fit_linear_model(X, y, regularization=1e-6)
    assert m.output_kind is OutputKind.CLASS_PROBABILITIES
    assert m.n_classes == 2
    probs = m.predict(X)
    assert np.all(np.argmax(probs, axis=1) == y)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_fit_linear_model_errors():
    with pytest.raises(ValueError):
        fit_linear_model([[1.0]], [1.0])
    with pytest.raises(ValueError, match="degenerate"):
        fit_linear_model([[1.0], [1.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        fit_linear_model([[0.0], [1.0]], [1, 1], task="classification")


def test_csv_ingestion(tmp_path):
    p = tmp_path / "flu.csv"
    p.write_text("fever,cough,congestion,sick\n1,1,0,1\n0,0,1,0\n1,0,0,1\n0,1,1,0\n")
    X, y, names, target = load_csv_dataset(str(p))
    assert names == ["fever", "cough", "congestion"]
    assert target == "sick"
    assert X.shape == (4, 3)
    assert np.array_equal(y, [1, 0, 1, 0])


# ---------------------------------------------------------------------------
# square region classifier


def test_square_region_extremes():
    m = square_region_classifier((2, 2, 6, 6), 0.5)
    white = np.ones((1, 8, 8, 1))
    black = np.zeros((1, 8, 8, 1))
    assert m.predict(white)[0, 1] > 0.99
    assert m.predict(black)[0, 1] < 0.01


def test_square_region_localized():
    m = square_region_classifier((0, 0, 2, 2), 0.5)
    inside = np.zeros((1, 4, 4, 1))
    inside[0, :2, :2, 0] = 1.0
    outside = np.zeros((1, 4, 4, 1))
    outside[0, 2:, 2:, 0] = 1.0
    assert m.predict(inside)[0, 1] > 0.99
    assert m.predict(outside)[0, 1] < 0.5


def test_square_region_out_of_bounds():
    m = square_region_classifier((0, 0, 10, 10), 0.5)
    with pytest.raises(ValueError, match="region outside image bounds"):
        m.predict(np.zeros((1, 4, 4, 1)))
    with pytest.raises(ValueError, match="empty region"):
        square_region_classifier((3, 3, 3, 5), 0.5)


# ---------------------------------------------------------------------------
# biased model


def test_biased_flips_only_on_bias_feature():
    m = biased_model_with_unrelated_feature(0, 2)
    lo = np.array([[-1.0, 5.0, 5.0]])
    hi = np.array([[1.0, 5.0, 5.0]])
    assert m.predict(lo)[0, 1] == 0.0
    assert m.predict(hi)[0, 1] == 1.0
    # flipping any other feature never flips the prediction
    for j in (1, 2):
        flipped = hi.copy()
        flipped[0, j] *= -1
        assert m.predict(flipped)[0, 1] == m.predict(hi)[0, 1]


def test_biased_index_collision():
    with pytest.raises(ValueError):
        biased_model_with_unrelated_feature(1, 1)


def test_adversarial_matches_biased_in_distribution():
    rng = np.random.default_rng(3)
    ref = rng.normal(size=(200, 2))
    plain = biased_model_with_unrelated_feature(0, 1)
    adv = biased_model_with_unrelated_feature(0, 1, adversarial=True, reference=ref)
    # on the stored reference points themselves, decisions agree
    assert np.array_equal(adv.predict(ref), plain.predict(ref))


def test_adversarial_routes_far_points_through_unrelated():
    rng = np.random.default_rng(4)
    ref = rng.normal(size=(200, 2))
    adv = biased_model_with_unrelated_feature(0, 1, adversarial=True, reference=ref)
    far = np.array([[50.0, -50.0], [50.0, 50.0]])  # bias feature high in both
    probs = adv.predict(far)
    assert probs[0, 1] == 0.0  # unrelated < 0 decides
    assert probs[1, 1] == 1.0


def test_adversarial_requires_reference():
    with pytest.raises(ValueError, match="reference"):
        biased_model_with_unrelated_feature(0, 1, adversarial=True)


# ---------------------------------------------------------------------------
# contracts shared by all models


@pytest.mark.parametrize(
    "model,batch",
    [
        (mars_model(), np.random.default_rng(5).uniform(0, 1, (16, 5))),
        (biased_model_with_unrelated_feature(0, 1), np.random.default_rng(6).normal(size=(16, 3))),
        (square_region_classifier((0, 0, 2, 2), 0.5), np.random.default_rng(7).uniform(0, 1, (16, 4, 4, 1))),
    ],
)
def test_batch_consistency(model, batch):
    whole = model.predict(batch)
    rows = np.concatenate([np.atleast_1d(model.predict(batch[i : i + 1])) for i in range(len(batch))])
    assert np.allclose(np.asarray(whole).ravel(), rows.ravel(), atol=1e-12)


def test_classifier_rows_sum_to_one():
    rng = np.random.default_rng(8)
    X = np.vstack([rng.normal(-1, 1, (20, 2)), rng.normal(1, 1, (20, 2))])
    y = np.array([0] * 20 + [1] * 20)
    probs = fit_linear_model(X, y).predict(rng.normal(size=(50, 2)))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
    probs = biased_model_with_unrelated_feature(0, 1).predict(rng.normal(size=(50, 2)))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
    probs = square_region_classifier((0, 0, 2, 2), 0.5).predict(rng.uniform(0, 1, (50, 4, 4, 1)))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
