import numpy as np
import pytest

from pvc.conditioning import (
    AdaLnParams,
    TemporalEmbeddingParams,
    ada_ln,
    affine_coeffs,
    init_adaln,
    init_temporal_embedding,
    relative_timestamps,
    sinusoidal_embed,
    temporal_embedding,
)
from pvc.tensor import Rng, layer_norm, silu


class TestRelativeTimestamps:
    def test_five_frames(self):
        assert np.array_equal(relative_timestamps(5), [0, 0.25, 0.5, 0.75, 1.0])

    def test_endpoints(self):
        assert np.array_equal(relative_timestamps(2), [0.0, 1.0])

    def test_single_frame(self):
        assert np.array_equal(relative_timestamps(1), [0.0])

    def test_zero_frames_error(self):
        with pytest.raises(ValueError):
            relative_timestamps(0)

    def test_uniform_spacing(self):
        for t in (2, 3, 7, 96):
            d = np.diff(relative_timestamps(t))
            assert d.max() - d.min() < 1e-15


class TestSinusoidalEmbed:
    def test_t_zero(self):
        e = sinusoidal_embed(np.zeros(1))
        assert np.array_equal(e[0, :128], np.zeros(128))
        assert np.array_equal(e[0, 128:], np.ones(128))

    def test_width_256(self):
        e = sinusoidal_embed(relative_timestamps(7))
        assert e.shape == (7, 256)
        assert np.all(np.abs(e) <= 1.0)

    def test_lowest_frequency_at_scale_one(self):
        # j=0 channel at t=1 with scale 1: (sin 1, cos 1)
        e = sinusoidal_embed(np.array([1.0]), scale=1.0)
        assert abs(e[0, 0] - 0.8414709848078965) < 1e-15
        assert abs(e[0, 128] - 0.5403023058681398) < 1e-15

    def test_injective_on_grid(self):
        # distinct timestamps down to 1e-6 spacing give distinct embeddings
        t = np.concatenate([np.linspace(0, 1, 101),
                            np.array([0.5 + 1e-6, 0.25 + 1e-6])])
        e = sinusoidal_embed(t, scale=1.0)
        d = np.linalg.norm(e[:, None, :] - e[None, :, :], axis=-1)
        d[np.diag_indices(len(t))] = np.inf
        assert d.min() > 0.0


class TestTemporalEmbedding:
    def test_zero_w1_gives_zero(self):
        p = TemporalEmbeddingParams(w1=np.zeros((256, 4)), w2=Rng(1).normal((4, 3)))
        t_tilde = sinusoidal_embed(relative_timestamps(3))
        assert np.array_equal(temporal_embedding(t_tilde, p), np.zeros((3, 3)))

    def test_output_shape(self):
        p = init_temporal_embedding(Rng(2), d_out=10)
        out = temporal_embedding(sinusoidal_embed(relative_timestamps(5)), p)
        assert out.shape == (5, 10)

    def test_step_by_step_oracle(self):
        rng = Rng(3)
        p = TemporalEmbeddingParams(w1=rng.normal((256, 4)), w2=rng.normal((4, 3)))
        t_tilde = rng.uniform((1, 256), -1, 1)
        expect = silu(t_tilde @ p.w1) @ p.w2
        assert np.max(np.abs(temporal_embedding(t_tilde, p) - expect)) < 1e-14

    def test_dim_mismatch(self):
        p = init_temporal_embedding(Rng(4), d_out=3)
        with pytest.raises(ValueError):
            temporal_embedding(np.zeros((2, 100)), p)


class TestAffineCoeffs:
    def test_zero_weights(self):
        d = 5
        p = AdaLnParams(*(np.zeros((d, d)) for _ in range(4)))
        g, b = affine_coeffs(Rng(5).normal((2, d)), p)
        assert np.array_equal(g, np.zeros((2, d)))
        assert np.array_equal(b, np.zeros((2, d)))

    def test_zero_condition(self):
        p = init_adaln(Rng(6), dim=5)
        g, b = affine_coeffs(np.zeros((3, 5)), p)
        assert np.array_equal(g, np.zeros((3, 5)))
        assert np.array_equal(b, np.zeros((3, 5)))

    def test_composition_oracle(self):
        rng = Rng(7)
        p = init_adaln(rng, dim=6, std=0.3)
        z = rng.normal((4, 6))
        g, b = affine_coeffs(z, p)
        assert np.max(np.abs(g - silu(z @ p.w3) @ p.w4)) < 1e-14
        assert np.max(np.abs(b - silu(z @ p.w5) @ p.w6)) < 1e-14

    def test_per_token_equivariance(self):
        rng = Rng(8)
        p = init_adaln(rng, dim=4, std=0.3)
        z = rng.normal((6, 4))
        perm = np.array([3, 1, 5, 0, 4, 2])
        g, b = affine_coeffs(z, p)
        gp, bp = affine_coeffs(z[perm], p)
        assert np.array_equal(gp, g[perm])
        assert np.array_equal(bp, b[perm])


class TestAdaLn:
    def test_zero_weights_zero_output(self):
        d = 5
        p = AdaLnParams(*(np.zeros((d, d)) for _ in range(4)))
        rng = Rng(9)
        out = ada_ln(rng.normal((2, 3, d)), rng.normal((2, 3, d)), p)
        assert np.array_equal(out, np.zeros((2, 3, d)))

    def test_constant_x_gives_beta(self):
        rng = Rng(10)
        p = init_adaln(rng, dim=4, std=0.3)
        z = rng.normal((3, 4))
        x = np.full((3, 4), 2.5)
        _, beta = affine_coeffs(z, p)
        assert np.max(np.abs(ada_ln(x, z, p) - beta)) < 1e-13

    def test_composition_oracle(self):
        rng = Rng(11)
        p = init_adaln(rng, dim=8, std=0.3)
        x, z = rng.normal((2, 5, 8)), rng.normal((2, 5, 8))
        g, b = affine_coeffs(z, p)
        expect = g * layer_norm(x) + b
        assert np.max(np.abs(ada_ln(x, z, p) - expect)) < 1e-13

    def test_shape_mismatch(self):
        p = init_adaln(Rng(12), dim=4)
        with pytest.raises(ValueError):
            ada_ln(np.zeros((2, 4)), np.zeros((3, 4)), p)
