"""Opaque-model contract plus a small zoo of built-in models.

Every model exposes batch prediction only: tabular models take (B, d)
feature matrices, image models take (B, H, W, C) stacks. Classifiers
return per-row probability vectors that sum to one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "OutputKind",
    "BlackBoxModel",
    "mars_function",
    "mars_model",
    "fit_linear_model",
    "load_csv_dataset",
    "square_region_classifier",
    "biased_model_with_unrelated_feature",
]


class OutputKind(Enum):
    REGRESSION = "regression"
    CLASS_PROBABILITIES = "class-probabilities"


@dataclass(frozen=True)
class BlackBoxModel:
    """A deterministic batch predict function with a declared output kind."""

    predict: Callable[[np.ndarray], np.ndarray]
    output_kind: OutputKind
    n_classes: int | None = None

    @property
    def is_classifier(self) -> bool:
        return self.output_kind is OutputKind.CLASS_PROBABILITIES


def mars_function(x) -> float:
    """Smooth 5-dimensional benchmark:
    10 sin(pi x1 x2) + 20 (x3 - 0.05)^2 + 5 x4 + 5 x5."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != 5:
        raise ValueError("mars_function expects a length-5 input")
    return float(
        10.0 * np.sin(np.pi * x[0] * x[1]) + 20.0 * (x[2] - 0.05) ** 2 + 5.0 * x[3] + 5.0 * x[4]
    )


def mars_model() -> BlackBoxModel:
    """The benchmark function wrapped as a batch regression model."""

    def predict(rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != 5:
            raise ValueError("expected a (B, 5) batch")
        return (
            10.0 * np.sin(np.pi * rows[:, 0] * rows[:, 1])
            + 20.0 * (rows[:, 2] - 0.05) ** 2
            + 5.0 * rows[:, 3]
            + 5.0 * rows[:, 4]
        )

    return BlackBoxModel(predict=predict, output_kind=OutputKind.REGRESSION)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def fit_linear_model(rows, targets, regularization: float = 1e-8, task: str = "auto") -> BlackBoxModel:
    """Train a ridge regressor or a logistic classifier and wrap it.

    task="classification" fits softmax logistic regression by full-batch
    gradient descent (to gradient norm < 1e-6 or 1e5 iterations);
    task="regression" solves ridge in closed form. "auto" picks
    classification when the targets have an integer dtype.
    """
    if task not in ("auto", "regression", "classification"):
        raise ValueError("task must be auto, regression, or classification")
    X = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    y = np.asarray(targets)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    if X.shape[0] != y.shape[0]:
        raise ValueError("rows and targets disagree in length")
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    n, d = X.shape
    if np.all(X == X[0]) and not np.all(y == y[0]):
        raise ValueError("degenerate input: constant features cannot fit varying targets")

    if task == "auto":
        task = "classification" if np.issubdtype(y.dtype, np.integer) else "regression"
    if task == "classification":
        if np.unique(y).size < 2:
            raise ValueError("classification needs at least 2 classes present")
        classes = np.unique(y.astype(np.int64))
        k = classes.size
        idx = np.searchsorted(classes, y.astype(np.int64))
        onehot = np.eye(k)[idx]
        W = np.zeros((d + 1, k))
        Xa = np.hstack([np.ones((n, 1)), X])
        lr = 4.0 / (np.linalg.norm(Xa, 2) ** 2 / n + regularization + 1e-12)
        for _ in range(100_000):
            p = _softmax(Xa @ W)
            grad = Xa.T @ (p - onehot) / n + regularization * W
            grad[0] -= regularization * W[0]  # intercept unpenalized
            W -= lr * grad
            if np.linalg.norm(grad) < 1e-6:
                break

        def predict_cls(batch: np.ndarray) -> np.ndarray:
            batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
            ba = np.hstack([np.ones((batch.shape[0], 1)), batch])
            return _softmax(ba @ W)

        return BlackBoxModel(predict=predict_cls, output_kind=OutputKind.CLASS_PROBABILITIES, n_classes=k)

    yf = y.astype(np.float64)
    Xa = np.hstack([np.ones((n, 1)), X])
    A = Xa.T @ Xa + regularization * np.eye(d + 1)
    A[0, 0] -= regularization
    beta = np.linalg.solve(A, Xa.T @ yf)

    def predict_reg(batch: np.ndarray) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
        return beta[0] + batch @ beta[1:]

    return BlackBoxModel(predict=predict_reg, output_kind=OutputKind.REGRESSION)


def load_csv_dataset(path: str):
    """Read a numeric CSV with a header row; last column is the target."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if len(header) < 2:
        raise ValueError("CSV needs at least one feature column and a target column")
    data = np.asarray(rows, dtype=np.float64)
    return data[:, :-1], data[:, -1], header[:-1], header[-1]


def square_region_classifier(region, threshold: float) -> BlackBoxModel:
    """Classifier watching the mean intensity of one rectangular region.

    region = (y0, x0, y1, x1), end-exclusive pixel coordinates. Positive
    probability is 1 when the region mean exceeds the threshold and a
    slope-10 sigmoid of (mean - threshold) otherwise.
    """
    y0, x0, y1, x1 = region
    if y1 <= y0 or x1 <= x0:
        raise ValueError("empty region")

    def predict(batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.ndim != 4:
            raise ValueError("expected a (B, H, W, C) image batch")
        h, w = batch.shape[1:3]
        if y0 < 0 or x0 < 0 or y1 > h or x1 > w:
            raise ValueError("region outside image bounds")
        means = batch[:, y0:y1, x0:x1, :].mean(axis=(1, 2, 3))
        p = np.where(means > threshold, 1.0, 1.0 / (1.0 + np.exp(-10.0 * (means - threshold))))
        return np.column_stack([1.0 - p, p])

    return BlackBoxModel(predict=predict, output_kind=OutputKind.CLASS_PROBABILITIES, n_classes=2)


def biased_model_with_unrelated_feature(
    bias_index: int,
    unrelated_index: int,
    threshold: float = 0.0,
    adversarial: bool = False,
    reference=None,
) -> BlackBoxModel:
    """A classifier that thresholds a single feature.

    The plain variant decides on feature ``bias_index`` alone. The
    adversarial variant keeps that behavior in-distribution but, for
    inputs far from the stored reference set (nearest-neighbor distance
    beyond the reference set's own 99th-percentile NN distance), routes
    the decision through ``unrelated_index`` instead.
    """
    if bias_index == unrelated_index:
        raise ValueError("bias and unrelated feature indices must differ")
    ref = None
    radius = None
    if adversarial:
        if reference is None:
            raise ValueError("adversarial variant needs a reference set")
        ref = np.atleast_2d(np.asarray(reference, dtype=np.float64))
        diffs = ref[:, None, :] - ref[None, :, :]
        dist = np.sqrt(np.sum(diffs**2, axis=2))
        np.fill_diagonal(dist, np.inf)
        radius = float(np.percentile(dist.min(axis=1), 99))

    def predict(batch: np.ndarray) -> np.ndarray:
        batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
        if batch.shape[1] <= max(bias_index, unrelated_index):
            raise ValueError("feature width too small for the configured indices")
        decision = (batch[:, bias_index] > threshold).astype(np.float64)
        if adversarial:
            d2 = np.sum(batch**2, axis=1, keepdims=True) - 2.0 * batch @ ref.T + np.sum(ref**2, axis=1)
            nn = np.sqrt(np.maximum(d2.min(axis=1), 0.0))
            ood = nn > radius
            decision[ood] = (batch[ood, unrelated_index] > threshold).astype(np.float64)
        return np.column_stack([1.0 - decision, decision])

    return BlackBoxModel(predict=predict, output_kind=OutputKind.CLASS_PROBABILITIES, n_classes=2)
