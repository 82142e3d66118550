"""Numeric building blocks: scaled dot-product attention, multi-head
attention, LSTM / BiLSTM, dropout.

Every layer comes as a forward returning (output, cache) plus a backward
consuming (upstream gradient, cache). Backward passes are hand-derived and
verified against central finite differences by the gradient-check fixture.
All math is float64.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericError


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - z.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
# Scaled dot-product self-attention
# ---------------------------------------------------------------------------


def self_attention_forward(X, Wq, Wk, Wv):
    """Rows of X attend over each other: softmax(Q K^T / sqrt(d_k)) V with
    Q = X Wq, K = X Wk, V = X Wv. Returns (output, weights, cache)."""
    if not np.isfinite(X).all():
        raise NumericError("non-finite attention input")
    Q = X @ Wq
    K = X @ Wk
    V = X @ Wv
    scale = 1.0 / np.sqrt(Wk.shape[1])
    S = (Q @ K.T) * scale
    A = softmax(S, axis=1)
    Y = A @ V
    cache = (X, Q, K, V, A, Wq, Wk, Wv, scale)
    return Y, A, cache


def self_attention_backward(dY, cache):
    X, Q, K, V, A, Wq, Wk, Wv, scale = cache
    dV = A.T @ dY
    dA = dY @ V.T
    dS = A * (dA - (dA * A).sum(axis=1, keepdims=True))
    dQ = (dS @ K) * scale
    dK = (dS.T @ Q) * scale
    dWq = X.T @ dQ
    dWk = X.T @ dK
    dWv = X.T @ dV
    dX = dQ @ Wq.T + dK @ Wk.T + dV @ Wv.T
    return dX, dWq, dWk, dWv


def self_attention(X, Wq, Wk, Wv):
    Y, _, _ = self_attention_forward(X, Wq, Wk, Wv)
    return Y


# ---------------------------------------------------------------------------
# Multi-head attention: independent heads over d/num_heads-dim projections,
# concatenated and output-projected.
# ---------------------------------------------------------------------------


def multi_head_forward(X, head_weights, Wo):
    d = X.shape[1]
    if d % len(head_weights) != 0:
        raise ConfigError(f"input dim {d} not divisible by {len(head_weights)} heads")
    outs, weights, caches = [], [], []
    for Wq, Wk, Wv in head_weights:
        Y, A, cache = self_attention_forward(X, Wq, Wk, Wv)
        outs.append(Y)
        weights.append(A)
        caches.append(cache)
    C = np.concatenate(outs, axis=1)
    Y = C @ Wo
    return Y, weights, (caches, C, Wo, [o.shape[1] for o in outs])


def multi_head_backward(dY, cache):
    caches, C, Wo, widths = cache
    dC = dY @ Wo.T
    dWo = C.T @ dY
    dX = None
    dheads = []
    col = 0
    for head_cache, w in zip(caches, widths):
        dXh, dWq, dWk, dWv = self_attention_backward(dC[:, col : col + w], head_cache)
        dheads.append((dWq, dWk, dWv))
        dX = dXh if dX is None else dX + dXh
        col += w
    return dX, dheads, dWo


def multi_head_attention(X, head_weights, Wo):
    Y, _, _ = multi_head_forward(X, head_weights, Wo)
    return Y


# ---------------------------------------------------------------------------
# LSTM (standard input/forget/cell/output gates) and BiLSTM
# ---------------------------------------------------------------------------


def lstm_forward(X, W, U, b):
    """Unidirectional LSTM over X (T, d_in); W (d_in, 4h), U (h, 4h), b (4h,).
    Gate order i, f, g, o; zero initial state. Returns (H (T, h), cache)."""
    T = X.shape[0]
    h = U.shape[0]
    H = np.zeros((T, h))
    steps = []
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(T):
        a = X[t] @ W + h_prev @ U + b
        i = _sigmoid(a[:h])
        f = _sigmoid(a[h : 2 * h])
        g = np.tanh(a[2 * h : 3 * h])
        o = _sigmoid(a[3 * h :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        H[t] = o * tc
        steps.append((X[t], h_prev, c_prev, i, f, g, o, tc))
        h_prev = H[t]
        c_prev = c
    return H, (steps, W, U)


def lstm_backward(dH, cache):
    steps, W, U = cache
    T = dH.shape[0]
    h = U.shape[0]
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * h)
    dX = np.zeros((T, W.shape[0]))
    dh_carry = np.zeros(h)
    dc_carry = np.zeros(h)
    for t in range(T - 1, -1, -1):
        x_t, h_prev, c_prev, i, f, g, o, tc = steps[t]
        dh = dH[t] + dh_carry
        do = dh * tc
        dc = dc_carry + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_carry = dc * f
        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ]
        )
        dW += np.outer(x_t, da)
        dU += np.outer(h_prev, da)
        db += da
        dX[t] = da @ W.T
        dh_carry = da @ U.T
    return dX, dW, dU, db


def bilstm_forward(X, fw, bw):
    """fw/bw are (W, U, b) triples. Output row t concatenates the forward
    state over 1..t and the backward state over T..t."""
    Hf, cache_f = lstm_forward(X, *fw)
    Hb_rev, cache_b = lstm_forward(X[::-1], *bw)
    H = np.concatenate([Hf, Hb_rev[::-1]], axis=1)
    return H, (cache_f, cache_b, fw[1].shape[0])


def bilstm_backward(dH, cache):
    cache_f, cache_b, h = cache
    dXf, dWf, dUf, dbf = lstm_backward(dH[:, :h], cache_f)
    dXb_rev, dWb, dUb, dbb = lstm_backward(dH[:, h:][::-1], cache_b)
    dX = dXf + dXb_rev[::-1]
    return dX, (dWf, dUf, dbf), (dWb, dUb, dbb)


def bilstm_encode(X, fw, bw):
    H, _ = bilstm_forward(X, fw, bw)
    return H


# ---------------------------------------------------------------------------
# Inverted dropout
# ---------------------------------------------------------------------------


def dropout_forward(X, rate: float, rng: np.random.Generator):
    if rate <= 0.0:
        return X, None
    mask = (rng.random(X.shape) >= rate) / (1.0 - rate)
    return X * mask, mask


def dropout_backward(dY, mask):
    if mask is None:
        return dY
    return dY * mask
