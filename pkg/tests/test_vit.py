import numpy as np
import pytest

from pvc.conditioning import ada_ln, relative_timestamps
from pvc.tensor import Rng, layer_norm, silu, softmax
from pvc.verification import randomize_gates, toy_config
from pvc.vit import (
    AttentionParams,
    PatchEmbedParams,
    PvcConfig,
    VideoBatch,
    expected_added_params,
    init_attention,
    init_layer,
    init_model,
    layer_te,
    patchify,
    plain_vit_forward,
    progressive_layer_forward,
    spatial_mha,
    temporal_mha_causal,
    vit_forward,
)


def make_batch(rng, cfg, b=1, t=4):
    x = rng.normal((b, t, cfg.tokens_per_frame, cfg.channels))
    return VideoBatch(features=x, timestamps=relative_timestamps(t))


class TestConfig:
    def test_vit_l_geometry(self):
        cfg = PvcConfig()
        assert cfg.tokens_per_frame == 1024  # 448/14 = 32 per side
        assert cfg.compressed_tokens == 64
        assert cfg.layers == 24 and cfg.temporal_layers == 8

    def test_invalid_configs(self):
        with pytest.raises(ValueError):
            PvcConfig(image_size=450)
        with pytest.raises(ValueError):
            PvcConfig(channels=1000, heads=16)
        with pytest.raises(ValueError):
            PvcConfig(temporal_layers=30)


class TestPatchify:
    def test_token_count_448(self):
        cfg = PvcConfig(channels=4, heads=1, ffn_dim=8)
        rng = Rng(1)
        patch = PatchEmbedParams(weight=rng.normal((14 * 14 * 3, 4), 0.02),
                                 bias=np.zeros(4),
                                 pos=rng.normal((1024, 4), 0.02))
        v = patchify(np.zeros((1, 1, 448, 448, 3)), cfg, patch)
        assert v.features.shape == (1, 1, 1024, 4)

    def test_zero_image_gives_pos_only(self):
        cfg = PvcConfig(image_size=28, patch_size=14, channels=4, heads=1,
                        ffn_dim=8, shuffle_kernel=2)
        rng = Rng(2)
        patch = PatchEmbedParams(weight=rng.normal((14 * 14 * 3, 4)),
                                 bias=np.zeros(4),
                                 pos=rng.normal((4, 4)))
        v = patchify(np.zeros((1, 2, 28, 28, 3)), cfg, patch)
        assert np.array_equal(v.features[0, 0], patch.pos)
        assert np.array_equal(v.features[0, 1], patch.pos)

    def test_pixel_identity_oracle(self):
        # 2x2 image, patch 1, projection picking the red channel
        cfg = PvcConfig(image_size=2, patch_size=1, channels=3, heads=1,
                        ffn_dim=4, shuffle_kernel=2)
        w = np.eye(3)
        patch = PatchEmbedParams(weight=w, bias=np.zeros(3), pos=np.zeros((4, 3)))
        img = np.arange(12.0).reshape(1, 1, 2, 2, 3)
        v = patchify(img, cfg, patch)
        # row-major patch order: (0,0), (0,1), (1,0), (1,1)
        assert np.array_equal(v.features[0, 0], img[0, 0].reshape(4, 3))

    def test_static_flag(self):
        cfg = PvcConfig(image_size=28, patch_size=14, channels=4, heads=1,
                        ffn_dim=8, shuffle_kernel=2)
        rng = Rng(3)
        patch = PatchEmbedParams(weight=rng.normal((588, 4)), bias=np.zeros(4),
                                 pos=np.zeros((4, 4)))
        frame = rng.normal((1, 1, 28, 28, 3))
        static = np.repeat(frame, 3, axis=1)
        assert patchify(static, cfg, patch).is_static
        moving = static.copy()
        moving[0, 2, 0, 0, 0] += 1
        assert not patchify(moving, cfg, patch).is_static


class TestSpatialMha:
    def test_single_token(self):
        rng = Rng(4)
        p = init_attention(rng, c=6, heads=2, std=0.3)
        x = rng.normal((2, 1, 6))
        expect = (x @ p.wv + p.bv) @ p.wo + p.bo
        assert np.max(np.abs(spatial_mha(x, p) - expect)) < 1e-12

    def test_identical_tokens_identical_outputs(self):
        rng = Rng(5)
        p = init_attention(rng, c=6, heads=2, std=0.3)
        x = np.repeat(rng.normal((1, 1, 6)), 5, axis=1)
        out = spatial_mha(x, p)
        assert np.max(np.abs(out - out[:, :1])) == 0.0

    def test_explicit_attention_oracle(self):
        rng = Rng(6)
        c = 4
        p = init_attention(rng, c=c, heads=1, std=0.3)
        x = rng.normal((1, 3, c))
        q, k, v = x[0] @ p.wq + p.bq, x[0] @ p.wk + p.bk, x[0] @ p.wv + p.bv
        attn = softmax(q @ k.T / np.sqrt(c), axis=-1)
        expect = (attn @ v) @ p.wo + p.bo
        assert np.max(np.abs(spatial_mha(x, p)[0] - expect)) < 1e-12


class TestTemporalMhaCausal:
    def test_first_frame_sees_only_itself(self):
        rng = Rng(7)
        p = init_attention(rng, c=6, heads=2, std=0.3)
        x = rng.normal((3, 5, 6))
        out = temporal_mha_causal(x, p)
        single = temporal_mha_causal(x[:, :1], p)
        # accumulation order differs between the two shapes
        assert np.max(np.abs(out[:, 0] - single[:, 0])) < 1e-14

    def test_t_equals_one(self):
        rng = Rng(8)
        p = init_attention(rng, c=6, heads=2, std=0.3)
        x = rng.normal((4, 1, 6))
        expect = (x @ p.wv + p.bv) @ p.wo + p.bo
        assert np.max(np.abs(temporal_mha_causal(x, p) - expect)) < 1e-12

    def test_perturbation_causality(self):
        rng = Rng(9)
        p = init_attention(rng, c=8, heads=2, std=0.3)
        x = rng.normal((2, 6, 8))
        base = temporal_mha_causal(x, p)
        for j in range(1, 6):
            xp = x.copy()
            xp[:, j] += rng.normal((2, 8))
            out = temporal_mha_causal(xp, p)
            assert np.array_equal(out[:, :j], base[:, :j])
            assert np.max(np.abs(out[:, j:] - base[:, j:])) > 0


class TestProgressiveLayer:
    def _temporal_layer(self, rng, cfg, gate_std=0.0):
        p = init_layer(rng, cfg, temporal=True)
        if gate_std:
            p.gate_alpha[...] = rng.normal(p.gate_alpha.shape, gate_std)
        return p

    def test_zero_gate_equals_plain_layer(self):
        cfg = toy_config()
        rng = Rng(10)
        p = self._temporal_layer(rng, cfg)
        v = make_batch(rng, cfg)
        out = progressive_layer_forward(v, p).features
        plain = p.__class__(**{**p.__dict__, "tmha": None, "adaln": None,
                               "te": None, "gate_alpha": None})
        ref = progressive_layer_forward(VideoBatch(v.features, v.timestamps),
                                        plain).features
        assert np.max(np.abs(out - ref)) < 1e-15

    def test_static_zero_condition_identical_frames(self):
        cfg = toy_config()
        rng = Rng(11)
        p = self._temporal_layer(rng, cfg, gate_std=0.5)
        for w in (p.adaln.w3, p.adaln.w4, p.adaln.w5, p.adaln.w6):
            w[...] = 0.0
        frame = rng.normal((1, 1, cfg.tokens_per_frame, cfg.channels))
        v = VideoBatch(features=np.repeat(frame, 4, axis=1),
                       timestamps=relative_timestamps(4), is_static=True)
        out = progressive_layer_forward(v, p).features
        assert np.max(np.abs(out - out[:, :1])) == 0.0

    def test_composition_oracle(self):
        cfg = toy_config()
        rng = Rng(12)
        p = self._temporal_layer(rng, cfg, gate_std=0.5)
        v = make_batch(rng, cfg, t=3)
        b, t, n, c = v.features.shape

        x = v.features
        h = layer_norm(x, gamma=p.ln1_gamma, beta=p.ln1_beta)
        x = x + spatial_mha(h.reshape(b * t, n, c), p.smha).reshape(b, t, n, c)
        te = layer_te(v.timestamps, p, cfg.ts_scale)
        z = x + te[None, :, None, :]
        a = ada_ln(x, z, p.adaln).transpose(0, 2, 1, 3).reshape(b * n, t, c)
        tm = temporal_mha_causal(a, p.tmha).reshape(b, n, t, c).transpose(0, 2, 1, 3)
        x = x + p.gate_alpha * tm
        h = layer_norm(x, gamma=p.ln2_gamma, beta=p.ln2_beta)
        expect = x + silu(h @ p.ffn_w_in + p.ffn_b_in) @ p.ffn_w_out + p.ffn_b_out

        out = progressive_layer_forward(v, p).features
        assert np.max(np.abs(out - expect)) < 1e-12

    def test_added_param_count(self):
        cfg = toy_config()
        p = init_layer(Rng(13), cfg, temporal=True)
        c = cfg.channels
        assert p.added_param_count() == expected_added_params(c)
        assert expected_added_params(c) == (4 * c * c + 4 * c) + 4 * c * c \
            + (256 * c + c * c) + c
        assert init_layer(Rng(13), cfg, temporal=False).added_param_count() == 0

    def test_gate_initialized_exactly_zero(self):
        p = init_layer(Rng(14), toy_config(), temporal=True)
        assert np.array_equal(p.gate_alpha, np.zeros_like(p.gate_alpha))


class TestVitForward:
    def test_zero_gates_match_plain_stack(self):
        cfg = toy_config()
        model = init_model(21, cfg)
        v = make_batch(Rng(22), cfg)
        out = vit_forward(v, cfg, model).features
        ref = plain_vit_forward(v, cfg, model).features
        assert np.max(np.abs(out - ref)) < 1e-15

    def test_no_temporal_layers_static_stays_static(self):
        cfg = toy_config(temporal_layers=0)
        model = init_model(23, cfg)
        rng = Rng(24)
        frame = rng.normal((1, 1, cfg.tokens_per_frame, cfg.channels))
        v = VideoBatch(features=np.repeat(frame, 3, axis=1),
                       timestamps=relative_timestamps(3))
        out = vit_forward(v, cfg, model).features
        assert np.array_equal(out[:, 0], out[:, 1])
        assert np.array_equal(out[:, 0], out[:, 2])

    def test_stack_causality(self):
        cfg = toy_config()
        model = init_model(25, cfg)
        rng = Rng(26)
        randomize_gates(model, rng)
        v = make_batch(rng, cfg, t=5)
        base = vit_forward(v, cfg, model).features
        for j in range(1, 5):
            xp = v.features.copy()
            xp[:, j:] += rng.normal(xp[:, j:].shape)
            out = vit_forward(VideoBatch(xp, v.timestamps), cfg, model).features
            assert np.max(np.abs(out[:, :j] - base[:, :j])) <= 1e-12

    def test_static_distinctness(self):
        cfg = toy_config()
        model = init_model(27, cfg)
        rng = Rng(28)
        randomize_gates(model, rng)
        frame = rng.normal((1, 1, cfg.tokens_per_frame, cfg.channels))
        v = VideoBatch(features=np.repeat(frame, 4, axis=1),
                       timestamps=relative_timestamps(4), is_static=True)
        out = vit_forward(v, cfg, model).features
        dists = [np.linalg.norm(out[0, a] - out[0, b])
                 for a in range(4) for b in range(a + 1, 4)]
        assert min(dists) > 0.0

    def test_frame_zero_prefix_consistency(self):
        cfg = toy_config()
        model = init_model(29, cfg)
        rng = Rng(30)
        randomize_gates(model, rng)
        x = rng.normal((1, 4, cfg.tokens_per_frame, cfg.channels))
        full = vit_forward(VideoBatch(x, relative_timestamps(4)), cfg, model)
        solo = vit_forward(VideoBatch(x[:, :1].copy(), relative_timestamps(1)),
                           cfg, model)
        assert np.max(np.abs(full.features[:, 0] - solo.features[:, 0])) <= 1e-12

    def test_layer_order_enforced(self):
        cfg = toy_config()
        model = init_model(31, cfg)
        model.layers.reverse()  # temporal layers now first
        with pytest.raises(ValueError):
            vit_forward(make_batch(Rng(32), cfg), cfg, model)

    def test_deterministic_forward(self):
        cfg = toy_config()
        model_a = init_model(33, cfg)
        model_b = init_model(33, cfg)
        v = make_batch(Rng(34), cfg)
        out_a = vit_forward(v, cfg, model_a).features
        out_b = vit_forward(VideoBatch(v.features.copy(), v.timestamps),
                            cfg, model_b).features
        assert np.array_equal(out_a, out_b)
