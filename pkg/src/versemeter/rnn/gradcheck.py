"""Finite-difference verification of the hand-derived gradients.

Central differences with a fixed step; dropout, when checked, uses
frozen masks so the loss is a deterministic function of the parameters.
"""

from __future__ import annotations

import numpy as np

from .loss import batch_loss_grad
from .network import RecurrentStack, backward_batch, forward_batch, make_dropout_masks

TOLERANCE = 1e-4
#: Denominator floor: below this magnitude the check is effectively an
#: absolute one, which keeps near-zero gradients from tripping the ratio.
REL_FLOOR = 1e-4


def batch_loss(stack: RecurrentStack, X, labels, weights=None, masks=None) -> float:
    logits, _ = forward_batch(X, stack, masks)
    losses, _ = batch_loss_grad(logits, labels, weights)
    return float(losses.mean())


def analytic_gradients(stack, X, labels, weights=None, masks=None) -> dict:
    logits, cache = forward_batch(X, stack, masks)
    _, dlogits = batch_loss_grad(logits, labels, weights)
    return backward_batch(stack, cache, dlogits)


def numeric_gradients(stack, X, labels, weights=None, masks=None, eps: float = 1e-5) -> dict:
    """Central-difference gradient of the batch loss for every tensor."""
    grads = {}
    for name, p in stack.named_parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = p[idx]
            p[idx] = original + eps
            up = batch_loss(stack, X, labels, weights, masks)
            p[idx] = original - eps
            down = batch_loss(stack, X, labels, weights, masks)
            p[idx] = original
            g[idx] = (up - down) / (2.0 * eps)
            it.iternext()
        grads[name] = g
    return grads


def max_relative_errors(analytic: dict, numeric: dict) -> dict:
    """Per-tensor max of |a - n| / max(|a|, |n|, floor)."""
    out = {}
    for name, a in analytic.items():
        n = numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), REL_FLOOR)
        out[name] = float(np.max(np.abs(a - n) / denom))
    return out


def run_gradient_check(
    cell_kind: str,
    direction: str,
    n_layers: int,
    seed: int,
    *,
    dropout: float = 0.0,
    hidden_size: int | None = None,
    corrupt: str | None = None,
) -> dict:
    """Build a small random stack and batch, return per-tensor errors.

    `corrupt` names a gradient tensor to perturb before comparison (or
    "head.W" typically); it exists so the gate itself can be tested.
    """
    rng = np.random.default_rng(seed)
    input_size = int(rng.integers(3, 7))
    hidden = hidden_size or int(rng.integers(3, 7))
    n_classes = int(rng.integers(2, 5))
    steps = int(rng.integers(2, 6))
    batch = int(rng.integers(2, 4))

    stack = RecurrentStack(
        cell_kind=cell_kind,
        direction=direction,
        input_size=input_size,
        hidden_size=hidden,
        n_layers=n_layers,
        n_classes=n_classes,
        dropout=dropout,
        rng=rng,
    )
    X = rng.normal(size=(batch, steps, input_size))
    labels = rng.integers(0, n_classes, size=batch)
    weights = None
    if rng.random() < 0.5:
        raw = rng.uniform(0.5, 2.0, n_classes)
        weights = raw / raw.sum()
    masks = make_dropout_masks(stack, batch, steps, rng) if dropout > 0 else None

    analytic = analytic_gradients(stack, X, labels, weights, masks)
    if corrupt is not None:
        if corrupt not in analytic:
            raise KeyError(f"no such tensor: {corrupt}")
        analytic[corrupt] = analytic[corrupt] + 1e-2
    numeric = numeric_gradients(stack, X, labels, weights, masks)
    return max_relative_errors(analytic, numeric)
