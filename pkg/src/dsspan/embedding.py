"""Incidence features and the shallow two-matrix softmax classifier."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dfscode import contains
from .graph import LabeledGraph


MIN_ALPHA_FRACTION = 1e-4


class TrainingDivergedError(FloatingPointError):
    pass


@dataclass
class FeatureMatrix:
    rows: np.ndarray  # (N, K') float64
    feature_codes: list

    @property
    def zero_rows(self) -> int:
        return int((self.rows.sum(axis=1) == 0).sum())


def normalize_incidence(presence: np.ndarray) -> np.ndarray:
    """Scale each binary row by 1 / (number of ones); empty rows stay zero."""
    presence = np.asarray(presence, dtype=np.float64)
    m = presence.sum(axis=1, keepdims=True)
    return np.divide(presence, m, out=np.zeros_like(presence), where=m > 0)


def build_features(graphs: Sequence[LabeledGraph], features: Sequence) -> FeatureMatrix:
    if not features:
        raise ValueError("no features selected")
    presence = np.array([[contains(g, code) for code in features] for g in graphs],
                        dtype=np.float64).reshape(len(graphs), len(features))
    return FeatureMatrix(normalize_incidence(presence), list(features))


@dataclass
class EmbedModel:
    W: np.ndarray        # (K', E)
    W_out: np.ndarray    # (E, C)
    learning_rate: float = 1.0
    epochs: int = 5

    @property
    def dim(self) -> int:
        return self.W.shape[1]


def init_model(n_features: int, n_classes: int, dim: int = 64, learning_rate: float = 1.0,
               epochs: int = 5, rng: np.random.Generator | None = None) -> EmbedModel:
    rng = rng if rng is not None else np.random.default_rng(0)
    half = 0.5 / dim
    W = rng.uniform(-half, half, size=(n_features, dim))
    W_out = rng.uniform(-half, half, size=(dim, n_classes))
    return EmbedModel(W, W_out, learning_rate, epochs)


def softmax(u: np.ndarray) -> np.ndarray:
    z = u - u.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: EmbedModel, x: np.ndarray) -> np.ndarray:
    h = model.W.T @ x
    return softmax(model.W_out.T @ h)


def embed(model: EmbedModel, X: np.ndarray) -> np.ndarray:
    """Hidden-layer vectors, one row per graph."""
    return np.asarray(X) @ model.W


def predict(model: EmbedModel, x: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest class id on ties
    return int(np.argmax(forward(model, x)))


def predict_all(model: EmbedModel, X: np.ndarray) -> np.ndarray:
    probs = softmax(np.asarray(X) @ model.W @ model.W_out)
    return probs.argmax(axis=1)


def loss_and_grads(W: np.ndarray, W_out: np.ndarray, X: np.ndarray,
                   y: Sequence[int]) -> tuple[float, np.ndarray, np.ndarray]:
    """Summed cross-entropy and its gradients w.r.t. ``W`` and ``W_out``."""
    X = np.atleast_2d(X)
    y = np.asarray(y)
    H = X @ W
    P = softmax(H @ W_out)
    n = len(y)
    loss = -float(np.log(P[np.arange(n), y]).sum())
    dU = P.copy()
    dU[np.arange(n), y] -= 1.0
    gW_out = H.T @ dU
    gW = X.T @ (dU @ W_out.T)
    return loss, gW, gW_out


def train(model: EmbedModel, X: np.ndarray, labels: Sequence[int],
          rng: np.random.Generator | None = None) -> tuple[EmbedModel, list[float]]:
    """Per-example gradient descent in shuffled order.

    The step size starts at ``learning_rate`` and decays linearly over the
    whole run (floored at 1e-4 of the start), as in word2vec. A constant
    step of 1.0 oscillates once the 64-wide hidden layer grows.

    Returns the updated model (a copy) and the mean loss of each epoch,
    accumulated as examples are visited.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels)
    if len(X) != len(y):
        raise ValueError(f"{len(X)} feature rows for {len(y)} labels")
    W = model.W.copy()
    W_out = model.W_out.copy()
    lr = model.learning_rate
    steps = max(model.epochs * len(y), 1)
    step = 0
    trace = []
    for epoch in range(model.epochs):
        total = 0.0
        for i in rng.permutation(len(y)):
            alpha = lr * max(1.0 - step / steps, MIN_ALPHA_FRACTION)
            step += 1
            x = X[i]
            h = x @ W
            p = softmax(h @ W_out)
            total -= np.log(p[y[i]])
            du = p
            du[y[i]] -= 1.0
            dh = W_out @ du
            W_out -= alpha * np.outer(h, du)
            W -= alpha * np.outer(x, dh)
        mean = total / max(len(y), 1)
        if not np.isfinite(mean) or not (np.isfinite(W).all() and np.isfinite(W_out).all()):
            raise TrainingDivergedError(f"non-finite loss or weights in epoch {epoch + 1}")
        trace.append(float(mean))
    return EmbedModel(W, W_out, lr, model.epochs), trace
