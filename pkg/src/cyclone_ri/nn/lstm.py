"""Single LSTM layer: batched forward pass and backpropagation through time.

Weights for the four gates are stored side by side along the last axis in
the order input, forget, output, candidate::

    W_x : (input_size, 4 * hidden)
    W_h : (hidden, 4 * hidden)
    b   : (4 * hidden,)

Gates are always sigmoid. The candidate and the cell-output nonlinearity
use the configured hidden activation (tanh or relu).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import NumericError

GATES = ("i", "f", "o", "g")


class Activation(str, enum.Enum):
    TANH = "tanh"
    RELU = "relu"


def sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def act(x, kind: Activation):
    if kind is Activation.TANH:
        return np.tanh(x)
    return np.maximum(x, 0.0)


def act_grad_from_pre(pre, post, kind: Activation):
    if kind is Activation.TANH:
        return 1.0 - post * post
    return (pre > 0).astype(float)


def gate_slice(k: int, hidden: int) -> slice:
    return slice(k * hidden, (k + 1) * hidden)


@dataclass
class LstmCache:
    x: np.ndarray        # (B, T, I)
    h: np.ndarray        # (B, T + 1, H); h[:, 0] is the initial state
    c: np.ndarray        # (B, T + 1, H)
    gates: np.ndarray    # (B, T, 4H) post-activation
    g_pre: np.ndarray    # (B, T, H) candidate pre-activation
    c_act: np.ndarray    # (B, T, H) act(c_t)
    activation: Activation


def check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}", parameter=what)


def lstm_forward(params: dict, x: np.ndarray, activation: Activation = Activation.TANH):
    """Run the layer over ``x`` of shape (B, T, I) or (T, I).

    Returns hidden states of shape (B, T, H) (or (T, H) for unbatched input)
    and the cache needed by :func:`lstm_backward`.
    """
    activation = Activation(activation)
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    check_finite(x, "input sequence")
    B, T, _ = x.shape
    if T < 1:
        raise ValueError("sequence must have at least one step")
    W_x, W_h, b = params["W_x"], params["W_h"], params["b"]
    H = W_h.shape[0]

    h = np.zeros((B, T + 1, H))
    c = np.zeros((B, T + 1, H))
    gates = np.empty((B, T, 4 * H))
    g_pre = np.empty((B, T, H))
    c_act = np.empty((B, T, H))
    xw = x @ W_x + b  # input projections for all steps at once
    for t in range(T):
        z = xw[:, t] + h[:, t] @ W_h
        gates[:, t, :3 * H] = sigmoid(z[:, :3 * H])
        g_pre[:, t] = z[:, 3 * H:]
        g = act(g_pre[:, t], activation)
        gates[:, t, 3 * H:] = g
        i, f, o = gates[:, t, :H], gates[:, t, H:2 * H], gates[:, t, 2 * H:3 * H]
        c[:, t + 1] = f * c[:, t] + i * g
        c_act[:, t] = act(c[:, t + 1], activation)
        h[:, t + 1] = o * c_act[:, t]

    cache = LstmCache(x, h, c, gates, g_pre, c_act, activation)
    hs = h[:, 1:]
    return (hs[0] if squeeze else hs), cache


def lstm_backward(params: dict, cache: LstmCache, dhs: np.ndarray) -> dict:
    """Gradients of a scalar loss w.r.t. W_x, W_h, b given dL/dh_t for every step."""
    W_h = params["W_h"]
    H = W_h.shape[0]
    x, h, c, gates = cache.x, cache.h, cache.c, cache.gates
    B, T, _ = x.shape
    kind = cache.activation

    dW_x = np.zeros_like(params["W_x"])
    dW_h = np.zeros_like(W_h)
    db = np.zeros_like(params["b"])
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    dz = np.empty((B, 4 * H))

    for t in reversed(range(T)):
        i, f, o, g = (gates[:, t, gate_slice(k, H)] for k in range(4))
        dh = dhs[:, t] + dh_next
        ct = cache.c_act[:, t]
        dc = dc_next + dh * o * act_grad_from_pre(c[:, t + 1], ct, kind)
        dz[:, :H] = dc * g * i * (1.0 - i)
        dz[:, H:2 * H] = dc * c[:, t] * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dh * ct * o * (1.0 - o)
        dz[:, 3 * H:] = dc * i * act_grad_from_pre(cache.g_pre[:, t], g, kind)
        dW_x += x[:, t].T @ dz
        dW_h += h[:, t].T @ dz
        db += dz.sum(axis=0)
        dh_next = dz @ W_h.T
        dc_next = dc * f

    return {"W_x": dW_x, "W_h": dW_h, "b": db}
