"""Adam optimizer over flat {name: array} parameter dicts."""

from __future__ import annotations

import numpy as np

from .cells import ShapeMismatch

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


def adam_init(params: dict) -> dict:
    """Fresh moment estimates and step counter for the given tensors."""
    return {
        "t": 0,
        "m": {name: np.zeros_like(p) for name, p in params.items()},
        "v": {name: np.zeros_like(p) for name, p in params.items()},
    }


def adam_step(
    params: dict,
    grads: dict,
    state: dict,
    learning_rate: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPS,
):
    """One bias-corrected Adam update; parameters are updated in place."""
    state["t"] += 1
    t = state["t"]
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatch(f"{name}: gradient {g.shape} vs parameter {p.shape}")
        m = state["m"][name]
        v = state["v"][name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        p -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return params, state
