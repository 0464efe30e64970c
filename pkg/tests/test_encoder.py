"""Mention encoder: span concat, BiLSTM aggregation, affine composition."""

import numpy as np
import pytest

from seqcoref import autodiff as ad
from seqcoref.encoder import aggregate_args, compose_mention, encode_span
from seqcoref.errors import DimMismatch
from seqcoref.params import Config, ModelParams


def reference_bilstm_mean(xs, p):
    """Loop-unrolled reference recurrence, written independently of the
    encoder: explicit per-gate slices, plain numpy, no shared helpers."""

    def run(seq, W, U, b):
        H = b.shape[0] // 4
        h = np.zeros(H)
        c = np.zeros(H)
        outs = []
        for x in seq:
            z = W @ x + U @ h + b
            i = 1 / (1 + np.exp(-z[0:H]))
            f = 1 / (1 + np.exp(-z[H : 2 * H]))
            g = np.tanh(z[2 * H : 3 * H])
            o = 1 / (1 + np.exp(-z[3 * H : 4 * H]))
            c = f * c + i * g
            h = o * np.tanh(c)
            outs.append(h)
        return outs

    fw = run(xs, p.lstm_fw_W, p.lstm_fw_U, p.lstm_fw_b)
    bw = run(xs[::-1], p.lstm_bw_W, p.lstm_bw_U, p.lstm_bw_b)[::-1]
    steps = [np.concatenate([f, b]) for f, b in zip(fw, bw)]
    return np.mean(steps, axis=0)


@pytest.fixture
def params(tiny_entity_config):
    return ModelParams.init(tiny_entity_config, seed=0).as_namespace()


class TestEncodeSpan:
    def test_concatenation(self):
        np.testing.assert_array_equal(
            encode_span(np.array([1.0, 2.0]), np.array([3.0, 4.0])),
            [1.0, 2.0, 3.0, 4.0],
        )

    def test_single_token_span_duplicates(self):
        v = np.array([5.0, -1.0])
        np.testing.assert_array_equal(encode_span(v, v), [5.0, -1.0, 5.0, -1.0])

    def test_zero_vectors(self):
        z = np.zeros(3)
        np.testing.assert_array_equal(encode_span(z, z), np.zeros(6))

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            encode_span(np.zeros(3), np.zeros(4))

    def test_linear(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(2, 4))
        np.testing.assert_allclose(
            encode_span(2.5 * a, 2.5 * b), 2.5 * encode_span(a, b)
        )


class TestAggregateArgs:
    def test_empty_list_is_zero(self, params, tiny_entity_config):
        out = aggregate_args([], params)
        np.testing.assert_array_equal(out, np.zeros(2 * tiny_entity_config.d_arg))

    def test_zero_weights_give_zero(self, tiny_entity_config):
        p = ModelParams.zeros(tiny_entity_config).as_namespace()
        xs = list(np.random.default_rng(1).normal(size=(3, tiny_entity_config.d_m)))
        out = aggregate_args(xs, p)
        np.testing.assert_allclose(out, np.zeros(2 * tiny_entity_config.d_arg),
                                   atol=1e-12)

    def test_matches_unrolled_reference(self, params, tiny_entity_config):
        rng = np.random.default_rng(0)
        xs = list(rng.normal(size=(2, tiny_entity_config.d_m)))
        out = aggregate_args(xs, params)
        ref = reference_bilstm_mean(xs, params)
        np.testing.assert_allclose(out, ref, atol=1e-12)

    def test_longer_sequence_matches_reference(self, params, tiny_entity_config):
        rng = np.random.default_rng(9)
        xs = list(rng.normal(size=(5, tiny_entity_config.d_m)))
        np.testing.assert_allclose(
            aggregate_args(xs, params), reference_bilstm_mean(xs, params), atol=1e-12
        )

    def test_deterministic(self, params, tiny_entity_config):
        xs = list(np.random.default_rng(2).normal(size=(3, tiny_entity_config.d_m)))
        a = aggregate_args(xs, params)
        b = aggregate_args([x.copy() for x in xs], params)
        np.testing.assert_array_equal(a, b)

    def test_order_sensitive(self, params, tiny_entity_config):
        rng = np.random.default_rng(3)
        xs = list(rng.normal(size=(3, tiny_entity_config.d_m)))
        a = aggregate_args(xs, params)
        b = aggregate_args(xs[::-1], params)
        assert not np.allclose(a, b)

    def test_dim_mismatch(self, params):
        with pytest.raises(DimMismatch):
            aggregate_args([np.zeros(3)], params)


class TestComposeMention:
    def test_zero_weight_gives_bias(self, tiny_entity_config):
        p = ModelParams.zeros(tiny_entity_config).as_namespace()
        p.b_a = np.arange(tiny_entity_config.d_m, dtype=np.float64)
        h = compose_mention(
            np.ones(tiny_entity_config.d_m),
            np.ones(2 * tiny_entity_config.d_arg),
            p,
        )
        np.testing.assert_array_equal(h, p.b_a)

    def test_identity_block_passes_span(self, tiny_entity_config):
        cfg = tiny_entity_config
        p = ModelParams.zeros(cfg).as_namespace()
        p.W_a = np.concatenate(
            [np.eye(cfg.d_m), np.zeros((cfg.d_m, 2 * cfg.d_arg))], axis=1
        )
        rng = np.random.default_rng(4)
        h_span = rng.normal(size=cfg.d_m)
        out = compose_mention(h_span, rng.normal(size=2 * cfg.d_arg), p)
        np.testing.assert_allclose(out, h_span)

    def test_matches_dense_oracle(self, params, tiny_entity_config):
        cfg = tiny_entity_config
        rng = np.random.default_rng(5)
        h_span = rng.normal(size=cfg.d_m)
        h_args = rng.normal(size=2 * cfg.d_arg)
        out = compose_mention(h_span, h_args, params)
        # naive triple-loop matrix multiply
        joined = np.concatenate([h_span, h_args])
        expect = np.array(params.b_a, dtype=np.float64, copy=True)
        W = np.asarray(params.W_a, dtype=np.float64)
        for i in range(W.shape[0]):
            acc = 0.0
            for j in range(W.shape[1]):
                acc += W[i, j] * joined[j]
            expect[i] += acc
        np.testing.assert_allclose(out, expect, atol=1e-9)

    def test_affine_scaling_property(self, params, tiny_entity_config):
        cfg = tiny_entity_config
        rng = np.random.default_rng(6)
        u_span = rng.normal(size=cfg.d_m)
        u_args = rng.normal(size=2 * cfg.d_arg)
        zero = compose_mention(np.zeros(cfg.d_m), np.zeros(2 * cfg.d_arg), params)
        f_u = compose_mention(u_span, u_args, params)
        f_au = compose_mention(3.0 * u_span, 3.0 * u_args, params)
        np.testing.assert_allclose(f_au - zero, 3.0 * (f_u - zero), atol=1e-6)

    def test_gradient_flows_through_lstm(self, tiny_entity_config):
        """End-to-end graph: scalar of compose(aggregate(...)) vs finite diff
        on one LSTM weight entry."""
        cfg = tiny_entity_config
        base = ModelParams.init(cfg, seed=1)
        values = {k: v.astype(np.float64) for k, v in base.items()}
        rng = np.random.default_rng(7)
        xs = list(rng.normal(size=(3, cfg.d_m)))
        h_span = rng.normal(size=cfg.d_m)
        probe = rng.normal(size=cfg.d_m)

        def loss_for(vals):
            from seqcoref.trainer import array_namespace

            ns = array_namespace(vals)
            return float(compose_mention(h_span, aggregate_args(xs, ns), ns) @ probe)

        from seqcoref.trainer import tensor_namespace

        ns, handles = tensor_namespace(values)
        out = ad.dot(compose_mention(h_span, aggregate_args(xs, ns), ns), probe)
        out.backward()
        h = 1e-5
        for name in ("lstm_fw_W", "lstm_bw_U", "lstm_fw_b"):
            idx = (0,) if values[name].ndim == 1 else (1, 2)
            plus = {k: v.copy() for k, v in values.items()}
            minus = {k: v.copy() for k, v in values.items()}
            plus[name][idx] += h
            minus[name][idx] -= h
            num = (loss_for(plus) - loss_for(minus)) / (2 * h)
            np.testing.assert_allclose(handles[name].grad[idx], num, atol=1e-6)
