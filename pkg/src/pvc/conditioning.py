"""Temporal conditioning: timestamps, sinusoidal encoding, the temporal
embedding MLP, and adaptive layer normalization.

These pieces are shared by the progressive ViT layers (condition width C)
and the compression head (condition width k^2 * C).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Array, Rng, layer_norm, silu

SINUSOID_DIM = 256
DEFAULT_TS_SCALE = 1000.0


@dataclass
class TemporalEmbeddingParams:
    """Two-layer MLP mapping a 256-d sinusoidal code to a conditioning vector."""
    w1: Array  # [256, H]
    w2: Array  # [H, D_out]

    @property
    def d_out(self) -> int:
        return self.w2.shape[1]

    def param_count(self) -> int:
        return self.w1.size + self.w2.size


@dataclass
class AdaLnParams:
    """Weights producing the conditioned scale/bias of adaptive layer norm."""
    w3: Array  # [D, H] -> scale branch
    w4: Array  # [H, D]
    w5: Array  # [D, H] -> bias branch
    w6: Array  # [H, D]

    @property
    def dim(self) -> int:
        return self.w3.shape[0]

    def param_count(self) -> int:
        return self.w3.size + self.w4.size + self.w5.size + self.w6.size


def init_temporal_embedding(rng: Rng, d_out: int, hidden: int | None = None,
                            std: float = 0.02) -> TemporalEmbeddingParams:
    h = d_out if hidden is None else hidden
    return TemporalEmbeddingParams(
        w1=rng.normal((SINUSOID_DIM, h), std),
        w2=rng.normal((h, d_out), std),
    )


def init_adaln(rng: Rng, dim: int, hidden: int | None = None,
               std: float = 0.02) -> AdaLnParams:
    h = dim if hidden is None else hidden
    return AdaLnParams(
        w3=rng.normal((dim, h), std),
        w4=rng.normal((h, dim), std),
        w5=rng.normal((dim, h), std),
        w6=rng.normal((h, dim), std),
    )


def relative_timestamps(t: int) -> Array:
    """Uniform timestamps [0, 1/(T-1), ..., 1]; a single frame gets [0]."""
    if t < 1:
        raise ValueError(f"frame count must be >= 1, got {t}")
    if t == 1:
        return np.zeros(1)
    return np.linspace(0.0, 1.0, t)


def sinusoidal_embed(t: Array, scale: float = DEFAULT_TS_SCALE) -> Array:
    """Encode timestamps in [0,1] as 256-d sinusoids.

    Frequencies are geometric, f_j = 10000^(-j/127) for j in 0..127, the
    sin block first then the cos block. `scale` stretches the timestamps
    before the trig so sub-second spacings reach the high-frequency
    channels.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError(f"timestamps must be 1-D, got shape {t.shape}")
    half = SINUSOID_DIM // 2
    freqs = 10000.0 ** (-np.arange(half) / (half - 1)) * float(scale)
    angles = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


def temporal_embedding(t_tilde: Array, p: TemporalEmbeddingParams) -> Array:
    """TE = SiLU(t_tilde @ W1) @ W2, applied row-wise."""
    t_tilde = np.asarray(t_tilde, dtype=np.float64)
    if t_tilde.shape[-1] != p.w1.shape[0]:
        raise ValueError(
            f"sinusoid width {t_tilde.shape[-1]} != W1 rows {p.w1.shape[0]}")
    return silu(t_tilde @ p.w1) @ p.w2


def affine_coeffs(z: Array, p: AdaLnParams) -> tuple[Array, Array]:
    """Per-token scale gamma(z) and bias beta(z).

    gamma(z) = SiLU(z @ W3) @ W4 and beta(z) = SiLU(z @ W5) @ W6; each
    position in the leading extents of z gets its own coefficients.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != p.dim:
        raise ValueError(f"condition width {z.shape[-1]} != {p.dim}")
    gamma = silu(z @ p.w3) @ p.w4
    beta = silu(z @ p.w5) @ p.w6
    return gamma, beta


def ada_ln(x: Array, z: Array, p: AdaLnParams, eps: float = 1e-6) -> Array:
    """gamma(z) * LayerNorm(x) + beta(z) over the last axis.

    The inner LayerNorm carries no learned affine of its own; the scale
    and bias come entirely from the condition.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError(f"x shape {x.shape} != z shape {z.shape}")
    gamma, beta = affine_coeffs(z, p)
    return gamma * layer_norm(x, axis=-1, eps=eps) + beta
