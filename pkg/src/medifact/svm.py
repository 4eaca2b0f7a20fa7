"""Linear SVM trained from scratch by stochastic subgradient descent.

Hinge loss with L2 regularization, learning rate 1/(lambda * t), example
order reshuffled each epoch by a seeded generator. Training is
single-threaded and bit-deterministic for a given seed; trained models are
immutable and safe to score concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TrainingError
from .textproc import SparseVector


@dataclass(frozen=True)
class SvmConfig:
    lam: float = 1e-4
    epochs: int = 20
    seed: int = 42
    positive_class_weight: float = 1.0


@dataclass
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    train_config: SvmConfig
    objective_history: list[float] | None = None


def decision_score(model: LinearSvmModel, vector: SparseVector) -> float:
    """w.x + b, exactly."""
    if vector.nnz() == 0:
        return model.bias
    if int(vector.ids[-1]) >= model.weights.shape[0]:
        raise ValueError(
            f"feature id {int(vector.ids[-1])} out of range for {model.weights.shape[0]} weights"
        )
    return float(np.dot(model.weights[vector.ids], vector.values)) + model.bias


def example_subgradient(
    weights: np.ndarray,
    bias: float,
    vector: SparseVector,
    label: int,
    lam: float,
    class_weight: float,
) -> tuple[np.ndarray, float]:
    """Subgradient of lam/2 ||w||^2 + c * hinge(y (w.x + b)) at (w, b)."""
    grad_w = lam * weights.copy()
    grad_b = 0.0
    score = float(np.dot(weights[vector.ids], vector.values)) + bias if vector.nnz() else bias
    if label * score < 1.0:
        if vector.nnz():
            grad_w[vector.ids] -= class_weight * label * vector.values
        grad_b = -class_weight * label
    return grad_w, grad_b


def objective(
    vectors: Sequence[SparseVector],
    labels: Sequence[int],
    weights: np.ndarray,
    bias: float,
    lam: float,
    positive_class_weight: float = 1.0,
) -> float:
    """Full-batch regularized hinge objective."""
    total = 0.0
    for vec, label in zip(vectors, labels):
        score = float(np.dot(weights[vec.ids], vec.values)) + bias if vec.nnz() else bias
        margin = 1.0 - label * score
        if margin > 0.0:
            c = positive_class_weight if label > 0 else 1.0
            total += c * margin
    reg = 0.5 * lam * float(np.dot(weights, weights))
    return reg + total / len(labels)


def train_svm(
    vectors: Sequence[SparseVector],
    labels: Sequence[int],
    config: SvmConfig,
    n_features: int,
) -> LinearSvmModel:
    """Train by per-example subgradient steps with eta_t = 1/(lam * t)."""
    vecs = list(vectors)
    labs = list(labels)
    if len(vecs) != len(labs):
        raise TrainingError(f"{len(vecs)} vectors but {len(labs)} labels")
    if len(vecs) < 2:
        raise TrainingError("need at least 2 training examples")
    distinct = set(labs)
    if not distinct <= {-1, 1}:
        raise TrainingError(f"labels must be +1/-1, got {sorted(distinct)}")
    if len(distinct) < 2:
        raise TrainingError("training requires both classes to be present")
    if config.lam <= 0:
        raise TrainingError("lambda must be positive")
    if config.epochs <= 0:
        raise TrainingError("epochs must be positive")
    if config.positive_class_weight <= 0:
        raise TrainingError("positive_class_weight must be positive")
    for vec in vecs:
        if vec.nnz():
            if int(vec.ids[-1]) >= n_features:
                raise TrainingError(
                    f"feature id {int(vec.ids[-1])} out of range for {n_features} features"
                )
            if not np.all(np.isfinite(vec.values)):
                raise TrainingError("NaN or infinite feature value in training vector")

    rng = np.random.default_rng(config.seed)
    w = np.zeros(n_features, dtype=np.float64)
    b = 0.0
    lam = config.lam
    t = 0
    history: list[float] = []
    n = len(vecs)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            vec = vecs[i]
            y = labs[i]
            c = config.positive_class_weight if y > 0 else 1.0
            score = float(np.dot(w[vec.ids], vec.values)) + b if vec.nnz() else b
            w *= 1.0 - eta * lam
            if y * score < 1.0:
                if vec.nnz():
                    w[vec.ids] += eta * c * y * vec.values
                # The bias sits outside the regularizer, so the schedule's
                # huge early eta would kick it far off and 1/(lam t) decay
                # could never pull it back; cap its step at 1.
                b += min(eta, 1.0) * c * y
        history.append(objective(vecs, labs, w, b, lam, config.positive_class_weight))
    return LinearSvmModel(weights=w, bias=b, train_config=config, objective_history=history)
