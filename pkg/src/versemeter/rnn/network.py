"""Stacked (bi)directional recurrent classifier over encoded verses.

The stack runs each layer over all time steps (forward and, for the
bidirectional variant, backward with the outputs concatenated per step),
applies inverted dropout between layers in training mode, and feeds the
final step's hidden state (both directions' final states concatenated
when bidirectional) into a dense softmax head.

Gradients are hand-derived; `backward_batch` walks the cache produced by
`forward_batch` in reverse.
"""

from __future__ import annotations

import numpy as np

from .cells import (
    GruCellParams,
    LstmCellParams,
    ShapeMismatch,
    gru_step,
    gru_step_backward,
    init_gru,
    init_lstm,
    lstm_step,
    lstm_step_backward,
)

LSTM = "lstm"
GRU = "gru"
UNI = "uni"
BI = "bi"


class EmptySequence(ValueError):
    pass


class StaleCache(RuntimeError):
    pass


class RecurrentStack:
    """Layered recurrent cells plus a dense classification head."""

    def __init__(
        self,
        *,
        cell_kind: str,
        direction: str,
        input_size: int,
        hidden_size: int,
        n_layers: int,
        n_classes: int,
        dropout: float = 0.0,
        seed: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        if cell_kind not in (LSTM, GRU):
            raise ValueError(f"cell_kind must be '{LSTM}' or '{GRU}'")
        if direction not in (UNI, BI):
            raise ValueError(f"direction must be '{UNI}' or '{BI}'")
        if not 0.0 <= dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if min(input_size, hidden_size, n_layers, n_classes) < 1:
            raise ValueError("sizes must be positive")
        self.cell_kind = cell_kind
        self.direction = direction
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.n_layers = n_layers
        self.n_classes = n_classes
        self.dropout = dropout

        if rng is None:
            rng = np.random.default_rng(seed)
        init = init_lstm if cell_kind == LSTM else init_gru
        self.layers: list[dict] = []
        for l in range(n_layers):
            in_size = input_size if l == 0 else hidden_size * self.directions
            layer = {"fwd": init(in_size, hidden_size, rng)}
            layer["bwd"] = init(in_size, hidden_size, rng) if self.is_bi else None
            self.layers.append(layer)
        bound = 1.0 / np.sqrt(self.feature_size)
        self.head_w = rng.uniform(-bound, bound, (n_classes, self.feature_size))
        self.head_b = np.zeros(n_classes)

    @property
    def is_bi(self) -> bool:
        return self.direction == BI

    @property
    def directions(self) -> int:
        return 2 if self.is_bi else 1

    @property
    def feature_size(self) -> int:
        """Width of the head input (per-layer output width)."""
        return self.hidden_size * self.directions

    def named_parameters(self) -> list[tuple[str, np.ndarray]]:
        """Flat (name, array) pairs; arrays are the live tensors."""
        out = []
        for l, layer in enumerate(self.layers):
            for tag in ("fwd", "bwd"):
                cell = layer[tag]
                if cell is None:
                    continue
                out.extend((f"layers.{l}.{tag}.{k}", arr) for k, arr in cell.named())
        out.append(("head.W", self.head_w))
        out.append(("head.b", self.head_b))
        return out

    def config(self) -> dict:
        return {
            "cell_kind": self.cell_kind,
            "direction": self.direction,
            "input_size": self.input_size,
            "hidden_size": self.hidden_size,
            "n_layers": self.n_layers,
            "n_classes": self.n_classes,
            "dropout": self.dropout,
        }


def make_dropout_masks(stack: RecurrentStack, batch: int, steps: int, rng) -> list | None:
    """Inverted-dropout masks for each layer boundary, or None when off."""
    if stack.dropout == 0.0 or stack.n_layers < 2:
        return None
    keep = 1.0 - stack.dropout
    return [
        (rng.random((batch, steps, stack.feature_size)) < keep) / keep
        for _ in range(stack.n_layers - 1)
    ]


def forward_batch(X, stack: RecurrentStack, dropout_masks=None):
    """Run a batch of equal-length sequences; returns (logits, cache).

    X is [batch, steps, input_size].  Pass dropout_masks (from
    `make_dropout_masks`) for a training-mode forward; None means eval.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 3:
        raise ShapeMismatch(f"expected [batch, steps, input] array, got {X.shape}")
    B, T, D = X.shape
    if T == 0:
        raise EmptySequence("cannot run a zero-length sequence")
    if D != stack.input_size:
        raise ShapeMismatch(f"input width {D} != stack input size {stack.input_size}")

    H = stack.hidden_size
    lstm = stack.cell_kind == LSTM
    seq = X
    layer_caches = []
    fwd_h = bwd_h = None
    for l, layer in enumerate(stack.layers):
        fwd_steps = []
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        fwd_h = np.empty((B, T, H))
        for t in range(T):
            if lstm:
                h, c, step_cache = lstm_step(seq[:, t], h, c, layer["fwd"])
            else:
                h, step_cache = gru_step(seq[:, t], h, layer["fwd"])
            fwd_steps.append(step_cache)
            fwd_h[:, t] = h
        bwd_steps = None
        if stack.is_bi:
            bwd_steps = [None] * T
            h = np.zeros((B, H))
            c = np.zeros((B, H))
            bwd_h = np.empty((B, T, H))
            for t in range(T - 1, -1, -1):
                if lstm:
                    h, c, step_cache = lstm_step(seq[:, t], h, c, layer["bwd"])
                else:
                    h, step_cache = gru_step(seq[:, t], h, layer["bwd"])
                bwd_steps[t] = step_cache
                bwd_h[:, t] = h
            out = np.concatenate([fwd_h, bwd_h], axis=2)
        else:
            out = fwd_h
        mask = None
        if dropout_masks is not None and l < stack.n_layers - 1:
            mask = dropout_masks[l]
            out = out * mask
        layer_caches.append({"fwd": fwd_steps, "bwd": bwd_steps, "mask": mask})
        seq = out

    if stack.is_bi:
        final = np.concatenate([fwd_h[:, -1], bwd_h[:, 0]], axis=1)
    else:
        final = fwd_h[:, -1]
    logits = final @ stack.head_w.T + stack.head_b
    cache = {
        "layers": layer_caches,
        "final": final,
        "shape": (B, T),
        "consumed": False,
    }
    return logits, cache


def backward_batch(stack: RecurrentStack, cache: dict, dlogits) -> dict:
    """Backpropagate dlogits through the cached forward pass.

    Returns a flat {parameter name: gradient} dict matching
    `stack.named_parameters()`.  A cache can be consumed once.
    """
    if cache.get("consumed"):
        raise StaleCache("this forward cache was already used by a backward pass")
    cache["consumed"] = True

    dlogits = np.asarray(dlogits, dtype=float)
    B, T = cache["shape"]
    H = stack.hidden_size
    lstm = stack.cell_kind == LSTM
    grads = {name: np.zeros_like(arr) for name, arr in stack.named_parameters()}

    final = cache["final"]
    grads["head.W"] += dlogits.T @ final
    grads["head.b"] += dlogits.sum(axis=0)
    dfinal = dlogits @ stack.head_w

    d_out = None  # gradient w.r.t. the current layer's output sequence
    for l in range(stack.n_layers - 1, -1, -1):
        lc = cache["layers"][l]
        width = stack.feature_size
        if l == stack.n_layers - 1:
            d_out = np.zeros((B, T, width))
            if stack.is_bi:
                d_out[:, T - 1, :H] += dfinal[:, :H]
                d_out[:, 0, H:] += dfinal[:, H:]
            else:
                d_out[:, T - 1] += dfinal
        if lc["mask"] is not None:
            d_out = d_out * lc["mask"]

        in_size = stack.input_size if l == 0 else stack.feature_size
        dX = np.zeros((B, T, in_size))

        def run_direction(tag, step_caches, d_slice, time_order):
            cell = stack.layers[l][tag]
            cell_grads = {k: grads[f"layers.{l}.{tag}.{k}"] for k, _ in cell.named()}
            dh_carry = np.zeros((B, H))
            dc_carry = np.zeros((B, H))
            for t in time_order:
                dh = d_out[:, t, d_slice] + dh_carry
                if lstm:
                    dx, dh_carry, dc_carry = lstm_step_backward(
                        dh, dc_carry, step_caches[t], cell, cell_grads
                    )
                else:
                    dx, dh_carry = gru_step_backward(
                        dh, step_caches[t], cell, cell_grads
                    )
                dX[:, t] += dx

        # the forward direction consumed steps 0..T-1, so unroll in reverse
        run_direction("fwd", lc["fwd"], slice(0, H), range(T - 1, -1, -1))
        if stack.is_bi:
            run_direction("bwd", lc["bwd"], slice(H, 2 * H), range(T))
        d_out = dX
    return grads


def forward_sequence(matrix, stack: RecurrentStack, mode: str = "eval", rng=None):
    """Classify one encoded verse; returns (logits vector, cache).

    `matrix` is an EncodedMatrix or a raw [input_size x steps] array.
    mode "train" draws dropout masks from `rng`; "eval" is deterministic.
    """
    values = getattr(matrix, "values", matrix)
    X = np.asarray(values, dtype=float).T[None, :, :]
    masks = None
    if mode == "train":
        if rng is None and stack.dropout > 0.0:
            raise ValueError("training-mode forward with dropout needs an rng")
        if rng is not None:
            masks = make_dropout_masks(stack, 1, X.shape[1], rng)
    elif mode != "eval":
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    logits, cache = forward_batch(X, stack, masks)
    return logits[0], cache
