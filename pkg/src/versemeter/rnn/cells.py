"""LSTM and GRU cells: parameters, single-step forward, and backward.

Everything is double precision.  Step functions operate on a batch
dimension ([B, dim] arrays); the public `*_cell_forward` wrappers accept
plain vectors.  Backward functions consume the cache emitted by the
matching forward step and accumulate parameter gradients in place.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


class ShapeMismatch(ValueError):
    pass


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LstmCellParams:
    """Forget / input / output gates plus the candidate cell update.

    W_* are [hidden x input], U_* are [hidden x hidden], b_* are [hidden].
    """

    w_f: np.ndarray
    u_f: np.ndarray
    b_f: np.ndarray
    w_i: np.ndarray
    u_i: np.ndarray
    b_i: np.ndarray
    w_o: np.ndarray
    u_o: np.ndarray
    b_o: np.ndarray
    w_c: np.ndarray
    u_c: np.ndarray
    b_c: np.ndarray

    names = ("W_f", "U_f", "b_f", "W_i", "U_i", "b_i",
             "W_o", "U_o", "b_o", "W_c", "U_c", "b_c")

    @property
    def hidden_size(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_f.shape[1]

    def named(self):
        return zip(self.names, (getattr(self, f.name) for f in fields(self)))


@dataclass
class GruCellParams:
    """Update gate z, reset gate r, and candidate state h-tilde."""

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray

    names = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")

    @property
    def hidden_size(self) -> int:
        return self.w_z.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_z.shape[1]

    def named(self):
        return zip(self.names, (getattr(self, f.name) for f in fields(self)))


def _uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(cols)  # fan-in is the number of columns
    return rng.uniform(-bound, bound, (rows, cols))


def init_lstm(input_size: int, hidden_size: int, rng: np.random.Generator) -> LstmCellParams:
    """Uniform +-1/sqrt(fan-in) weights, zero biases, forget bias +1."""
    def gate():
        return (
            _uniform(rng, hidden_size, input_size),
            _uniform(rng, hidden_size, hidden_size),
            np.zeros(hidden_size),
        )

    p = LstmCellParams(*gate(), *gate(), *gate(), *gate())
    p.b_f += 1.0
    return p


def init_gru(input_size: int, hidden_size: int, rng: np.random.Generator) -> GruCellParams:
    def gate():
        return (
            _uniform(rng, hidden_size, input_size),
            _uniform(rng, hidden_size, hidden_size),
            np.zeros(hidden_size),
        )

    return GruCellParams(*gate(), *gate(), *gate())


def lstm_step(x, h_prev, c_prev, p: LstmCellParams):
    """One batched LSTM step; returns (h, c, cache)."""
    f = sigmoid(x @ p.w_f.T + h_prev @ p.u_f.T + p.b_f)
    i = sigmoid(x @ p.w_i.T + h_prev @ p.u_i.T + p.b_i)
    o = sigmoid(x @ p.w_o.T + h_prev @ p.u_o.T + p.b_o)
    g = np.tanh(x @ p.w_c.T + h_prev @ p.u_c.T + p.b_c)
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (x, h_prev, c_prev, f, i, o, g, tc)


def lstm_step_backward(dh, dc, cache, p: LstmCellParams, grads: dict):
    """Backward through one LSTM step.

    dh/dc are the loss gradients flowing into h_t and c_t; returns
    (dx, dh_prev, dc_prev) and adds parameter gradients into `grads`
    (keys matching LstmCellParams.names).
    """
    x, h_prev, c_prev, f, i, o, g, tc = cache
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc * tc)
    d_af = dc * c_prev * f * (1.0 - f)
    d_ai = dc * g * i * (1.0 - i)
    d_ag = dc * i * (1.0 - g * g)
    d_ao = do * o * (1.0 - o)
    dc_prev = dc * f

    dx = d_af @ p.w_f + d_ai @ p.w_i + d_ao @ p.w_o + d_ag @ p.w_c
    dh_prev = d_af @ p.u_f + d_ai @ p.u_i + d_ao @ p.u_o + d_ag @ p.u_c

    for da, w_key, u_key, b_key in (
        (d_af, "W_f", "U_f", "b_f"),
        (d_ai, "W_i", "U_i", "b_i"),
        (d_ao, "W_o", "U_o", "b_o"),
        (d_ag, "W_c", "U_c", "b_c"),
    ):
        grads[w_key] += da.T @ x
        grads[u_key] += da.T @ h_prev
        grads[b_key] += da.sum(axis=0)
    return dx, dh_prev, dc_prev


def gru_step(x, h_prev, p: GruCellParams):
    """One batched GRU step; returns (h, cache)."""
    z = sigmoid(x @ p.w_z.T + h_prev @ p.u_z.T + p.b_z)
    r = sigmoid(x @ p.w_r.T + h_prev @ p.u_r.T + p.b_r)
    rh = r * h_prev
    g = np.tanh(x @ p.w_h.T + rh @ p.u_h.T + p.b_h)
    h = (1.0 - z) * h_prev + z * g
    return h, (x, h_prev, z, r, rh, g)


def gru_step_backward(dh, cache, p: GruCellParams, grads: dict):
    """Backward through one GRU step; returns (dx, dh_prev)."""
    x, h_prev, z, r, rh, g = cache
    d_az = dh * (g - h_prev) * z * (1.0 - z)
    d_ag = dh * z * (1.0 - g * g)
    drh = d_ag @ p.u_h
    d_ar = drh * h_prev * r * (1.0 - r)

    dh_prev = dh * (1.0 - z) + drh * r + d_az @ p.u_z + d_ar @ p.u_r
    dx = d_az @ p.w_z + d_ar @ p.w_r + d_ag @ p.w_h

    grads["W_z"] += d_az.T @ x
    grads["U_z"] += d_az.T @ h_prev
    grads["b_z"] += d_az.sum(axis=0)
    grads["W_r"] += d_ar.T @ x
    grads["U_r"] += d_ar.T @ h_prev
    grads["b_r"] += d_ar.sum(axis=0)
    grads["W_h"] += d_ag.T @ x
    grads["U_h"] += d_ag.T @ rh
    grads["b_h"] += d_ag.sum(axis=0)
    return dx, dh_prev


def _check_vector(name, v, size):
    v = np.asarray(v, dtype=float)
    if v.shape != (size,):
        raise ShapeMismatch(f"{name}: expected shape ({size},), got {v.shape}")
    return v


def lstm_cell_forward(x_t, h_prev, c_prev, params: LstmCellParams):
    """Single-example LSTM step on plain vectors; returns (h_t, c_t)."""
    x = _check_vector("x_t", x_t, params.input_size)
    h = _check_vector("h_prev", h_prev, params.hidden_size)
    c = _check_vector("c_prev", c_prev, params.hidden_size)
    h_t, c_t, _ = lstm_step(x[None], h[None], c[None], params)
    return h_t[0], c_t[0]


def gru_cell_forward(x_t, h_prev, params: GruCellParams):
    """Single-example GRU step on plain vectors; returns h_t."""
    x = _check_vector("x_t", x_t, params.input_size)
    h = _check_vector("h_prev", h_prev, params.hidden_size)
    h_t, _ = gru_step(x[None], h[None], params)
    return h_t[0]
