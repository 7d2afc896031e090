"""Classification loss: softmax, inverse-frequency class weights, and
weighted cross-entropy with its gradient."""

from __future__ import annotations

import numpy as np


class NoClasses(ValueError):
    pass


class EmptyClass(ValueError):
    pass


class LabelOutOfRange(ValueError):
    pass


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis."""
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=float)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def class_weights(counts) -> np.ndarray:
    """Inverse-frequency weights: w_c = (1/n_c) / sum_c' (1/n_c').

    Weights sum to 1, are scale invariant in the counts, and larger
    classes get strictly smaller weights.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        raise NoClasses("at least one class is required")
    if np.any(counts < 1):
        raise EmptyClass("every class needs at least one example")
    inv = 1.0 / counts
    return inv / inv.sum()


def weighted_cross_entropy(logits, label: int, weights=None) -> float:
    """Loss of one example: -w_label * log softmax(logits)[label]."""
    logits = np.asarray(logits, dtype=float)
    n = logits.shape[-1]
    if not 0 <= label < n:
        raise LabelOutOfRange(f"label {label} out of range for {n} classes")
    w = 1.0 if weights is None else float(np.asarray(weights)[label])
    return float(-w * log_softmax(logits)[label])


def batch_loss_grad(logits, labels, weights=None, grad_scale: float | None = None):
    """Per-example weighted NLL and the gradient w.r.t. the logits.

    Returns (losses [B], dlogits [B, C]).  dlogits is scaled by
    grad_scale (default 1/B, i.e. the batch-mean reduction).
    """
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels)
    B, C = logits.shape
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= C:
        raise LabelOutOfRange(f"labels out of range for {C} classes")
    logp = log_softmax(logits)
    w = np.ones(B) if weights is None else np.asarray(weights, dtype=float)[labels]
    losses = -w * logp[np.arange(B), labels]
    dlogits = np.exp(logp)
    dlogits[np.arange(B), labels] -= 1.0
    dlogits *= w[:, None]
    dlogits *= (1.0 / B) if grad_scale is None else grad_scale
    return losses, dlogits
