"""Oracle tests for the numeric layers: every vectorized implementation is
checked against a straight-line scalar recomputation of the same formulas."""

import math

import numpy as np
import pytest

from actim.errors import ConfigError, NumericError
from actim.model.layers import (
    bilstm_encode,
    bilstm_forward,
    log_softmax,
    lstm_forward,
    multi_head_attention,
    multi_head_forward,
    self_attention,
    self_attention_forward,
    softmax,
)

RNG = np.random.default_rng(42)


def naive_self_attention(X, Wq, Wk, Wv):
    """Element-by-element recomputation of scaled dot-product attention."""
    n, d = X.shape
    dk = Wq.shape[1]
    Q = np.array([[sum(X[i, a] * Wq[a, j] for a in range(d)) for j in range(dk)] for i in range(n)])
    K = np.array([[sum(X[i, a] * Wk[a, j] for a in range(d)) for j in range(dk)] for i in range(n)])
    V = np.array([[sum(X[i, a] * Wv[a, j] for a in range(d)) for j in range(dk)] for i in range(n)])
    out = np.zeros((n, dk))
    for i in range(n):
        scores = [sum(Q[i, a] * K[j, a] for a in range(dk)) / math.sqrt(dk) for j in range(n)]
        m = max(scores)
        exps = [math.exp(s - m) for s in scores]
        total = sum(exps)
        weights = [e / total for e in exps]
        for a in range(dk):
            out[i, a] = sum(weights[j] * V[j, a] for j in range(n))
    return out


def naive_lstm(X, W, U, b):
    """Step-by-step gate recomputation (input, forget, cell, output order)."""
    T, din = X.shape
    h = U.shape[0]
    sig = lambda z: 1.0 / (1.0 + math.exp(-z))
    h_prev = [0.0] * h
    c_prev = [0.0] * h
    out = np.zeros((T, h))
    for t in range(T):
        a = [
            sum(X[t, i] * W[i, j] for i in range(din))
            + sum(h_prev[i] * U[i, j] for i in range(h))
            + b[j]
            for j in range(4 * h)
        ]
        i_g = [sig(a[j]) for j in range(h)]
        f_g = [sig(a[h + j]) for j in range(h)]
        g_g = [math.tanh(a[2 * h + j]) for j in range(h)]
        o_g = [sig(a[3 * h + j]) for j in range(h)]
        c = [f_g[j] * c_prev[j] + i_g[j] * g_g[j] for j in range(h)]
        h_now = [o_g[j] * math.tanh(c[j]) for j in range(h)]
        out[t] = h_now
        h_prev, c_prev = h_now, c
    return out


class TestSoftmax:
    def test_rows_sum_to_one(self):
        z = RNG.normal(size=(7, 13)) * 10
        s = softmax(z, axis=1)
        np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-12)
        assert (s >= 0).all()

    def test_log_softmax_consistent(self):
        z = RNG.normal(size=(4, 9))
        np.testing.assert_allclose(np.exp(log_softmax(z, axis=1)), softmax(z, axis=1), atol=1e-12)

    def test_shift_invariance(self):
        z = RNG.normal(size=(3, 5))
        np.testing.assert_allclose(softmax(z + 100.0, axis=1), softmax(z, axis=1), atol=1e-12)


class TestSelfAttention:
    def test_single_token_returns_v_projection(self):
        X = RNG.normal(size=(1, 4))
        Wq, Wk, Wv = (RNG.normal(size=(4, 4)) for _ in range(3))
        np.testing.assert_allclose(self_attention(X, Wq, Wk, Wv), X @ Wv, atol=1e-12)

    def test_zero_query_gives_uniform_attention(self):
        X = RNG.normal(size=(5, 4))
        Wk, Wv = RNG.normal(size=(4, 4)), RNG.normal(size=(4, 4))
        out, weights, _ = self_attention_forward(X, np.zeros((4, 4)), Wk, Wv)
        np.testing.assert_allclose(weights, 1.0 / 5, atol=1e-12)
        V = X @ Wv
        for row in out:
            np.testing.assert_allclose(row, V.mean(axis=0), atol=1e-12)

    def test_matches_naive_recomputation(self):
        X = RNG.normal(size=(2, 4))
        Wq, Wk, Wv = (RNG.normal(size=(4, 4)) for _ in range(3))
        np.testing.assert_allclose(
            self_attention(X, Wq, Wk, Wv), naive_self_attention(X, Wq, Wk, Wv), atol=1e-10
        )

    def test_weights_rows_normalized(self):
        X = RNG.normal(size=(6, 8)) * 3
        Wq, Wk, Wv = (RNG.normal(size=(8, 8)) for _ in range(3))
        _, weights, _ = self_attention_forward(X, Wq, Wk, Wv)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-9)

    def test_output_shape_preserved(self):
        X = RNG.normal(size=(3, 6))
        Wq, Wk, Wv = (RNG.normal(size=(6, 6)) for _ in range(3))
        assert self_attention(X, Wq, Wk, Wv).shape == X.shape

    def test_non_finite_input_rejected(self):
        X = np.full((2, 4), np.nan)
        W = np.eye(4)
        with pytest.raises(NumericError):
            self_attention(X, W, W, W)


class TestMultiHead:
    def _weights(self, d, nh):
        dk = d // nh
        heads = [tuple(RNG.normal(size=(d, dk)) for _ in range(3)) for _ in range(nh)]
        Wo = RNG.normal(size=(d, d))
        return heads, Wo

    def test_one_head_identity_projection_equals_self_attention(self):
        d = 6
        X = RNG.normal(size=(4, d))
        heads, _ = self._weights(d, 1)
        out = multi_head_attention(X, heads, np.eye(d))
        np.testing.assert_allclose(out, self_attention(X, *heads[0]), atol=1e-12)

    def test_head_permutation_with_permuted_projection_rows(self):
        d, nh = 8, 2
        X = RNG.normal(size=(3, d))
        heads, Wo = self._weights(d, nh)
        base = multi_head_attention(X, heads, Wo)
        dk = d // nh
        perm_heads = [heads[1], heads[0]]
        perm_Wo = np.vstack([Wo[dk:], Wo[:dk]])
        np.testing.assert_allclose(multi_head_attention(X, perm_heads, perm_Wo), base, atol=1e-12)

    def test_matches_per_head_oracle(self):
        d, nh = 8, 2
        X = RNG.normal(size=(3, d))
        heads, Wo = self._weights(d, nh)
        parts = [naive_self_attention(X, *h) for h in heads]
        expected = np.concatenate(parts, axis=1) @ Wo
        np.testing.assert_allclose(multi_head_attention(X, heads, Wo), expected, atol=1e-10)

    def test_divisibility_enforced(self):
        X = RNG.normal(size=(3, 7))
        heads, Wo = [tuple(RNG.normal(size=(7, 3)) for _ in range(3))] * 2, RNG.normal(size=(7, 7))
        with pytest.raises(ConfigError):
            multi_head_forward(X, heads, Wo)

    def test_weight_matrices_normalized(self):
        d, nh = 12, 3
        X = RNG.normal(size=(5, d))
        heads, Wo = self._weights(d, nh)
        _, weights, _ = multi_head_forward(X, heads, Wo)
        assert len(weights) == nh
        for A in weights:
            np.testing.assert_allclose(A.sum(axis=1), 1.0, atol=1e-9)


class TestLstm:
    def _params(self, din, h):
        return (
            RNG.uniform(-0.5, 0.5, (din, 4 * h)),
            RNG.uniform(-0.5, 0.5, (h, 4 * h)),
            RNG.uniform(-0.5, 0.5, 4 * h),
        )

    def test_matches_naive_gates(self):
        X = RNG.normal(size=(4, 3))
        W, U, b = self._params(3, 2)
        H, _ = lstm_forward(X, W, U, b)
        np.testing.assert_allclose(H, naive_lstm(X, W, U, b), atol=1e-10)

    def test_length_one_sequence(self):
        X = RNG.normal(size=(1, 3))
        W, U, b = self._params(3, 2)
        H, _ = lstm_forward(X, W, U, b)
        assert H.shape == (1, 2)
        np.testing.assert_allclose(H, naive_lstm(X, W, U, b), atol=1e-12)


class TestBiLstm:
    def test_concatenates_directions(self):
        X = RNG.normal(size=(5, 3))
        fw = TestLstm()._params(3, 2)
        bw = TestLstm()._params(3, 2)
        H = bilstm_encode(X, fw, bw)
        assert H.shape == (5, 4)
        Hf, _ = lstm_forward(X, *fw)
        Hb, _ = lstm_forward(X[::-1], *bw)
        np.testing.assert_allclose(H[:, :2], Hf, atol=1e-12)
        np.testing.assert_allclose(H[:, 2:], Hb[::-1], atol=1e-12)

    def test_reversal_swaps_halves_with_tied_weights(self):
        X = RNG.normal(size=(6, 3))
        shared = TestLstm()._params(3, 2)
        H = bilstm_encode(X, shared, shared)
        H_rev = bilstm_encode(X[::-1], shared, shared)
        np.testing.assert_allclose(H_rev[::-1, :2], H[:, 2:], atol=1e-12)
        np.testing.assert_allclose(H_rev[::-1, 2:], H[:, :2], atol=1e-12)

    def test_matches_step_by_step_oracle(self):
        X = RNG.normal(size=(4, 3))
        fw = TestLstm()._params(3, 2)
        bw = TestLstm()._params(3, 2)
        H, _ = bilstm_forward(X, fw, bw)
        np.testing.assert_allclose(H[:, :2], naive_lstm(X, *fw), atol=1e-10)
        np.testing.assert_allclose(H[:, 2:], naive_lstm(X[::-1], *bw)[::-1], atol=1e-10)
