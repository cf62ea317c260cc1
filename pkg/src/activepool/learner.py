"""Stand-in learner: linear softmax classifier trained by gradient descent.

Supplies the probability signals consumed by the uncertainty/contrastive
strategies and the macro-F1 evaluation, without any model-runtime
dependencies. Training is full-batch, zero-initialized, and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import validate_probability_matrix


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


@dataclass
class LinearModel:
    weights: np.ndarray  # C x d
    bias: np.ndarray  # C

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(
    model: LinearModel, X: np.ndarray, Y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """L2-regularized mean cross-entropy and its analytic gradients.

    Y is one-hot (n x C). The penalty 0.5 * l2 * ||W||^2 applies to the
    weights only, not the bias.
    """
    n = X.shape[0]
    P = _softmax(X @ model.weights.T + model.bias)
    ce = -np.sum(Y * np.log(np.maximum(P, 1e-300))) / n
    loss = ce + 0.5 * l2 * float(np.sum(model.weights**2))
    diff = P - Y
    grad_w = diff.T @ X / n + l2 * model.weights
    grad_b = diff.mean(axis=0)
    return float(loss), grad_w, grad_b


def train(features, labels, cfg: TrainConfig = TrainConfig()) -> LinearModel:
    """Full-batch gradient descent from zero weights."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError("feature row count must equal label count")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite entries")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("training set must contain at least two classes")
    n_classes = int(classes.max()) + 1
    Y = np.zeros((len(y), n_classes))
    Y[np.arange(len(y)), y] = 1.0

    model = LinearModel(
        weights=np.zeros((n_classes, X.shape[1])), bias=np.zeros(n_classes)
    )
    for _ in range(cfg.epochs):
        _, grad_w, grad_b = loss_and_grads(model, X, Y, cfg.l2)
        model.weights -= cfg.learning_rate * grad_w
        model.bias -= cfg.learning_rate * grad_b
    return model


def predict_proba(model: LinearModel, features) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"feature dimension {X.shape} does not match model {model.weights.shape}"
        )
    P = _softmax(X @ model.weights.T + model.bias)
    return validate_probability_matrix(P)


def predict(model: LinearModel, features) -> np.ndarray:
    return np.argmax(predict_proba(model, features), axis=1)


def macro_f1(predicted, gold) -> float:
    """Unweighted mean of per-class F1; P + R = 0 contributes F1 = 0."""
    pred = np.asarray(predicted, dtype=int)
    true = np.asarray(gold, dtype=int)
    if len(pred) != len(true):
        raise ValueError("predicted and gold lengths differ")
    if len(pred) == 0:
        raise ValueError("empty input")
    classes = np.union1d(np.unique(pred), np.unique(true))
    scores = []
    for c in classes:
        tp = int(np.sum((pred == c) & (true == c)))
        fp = int(np.sum((pred == c) & (true != c)))
        fn = int(np.sum((pred != c) & (true == c)))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))
