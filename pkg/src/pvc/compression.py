"""Adaptive token compression: pixel shuffle + conditioned norm + shared MLP.

Per frame, the n x n token grid is cut into non-overlapping k x k blocks;
each block becomes one token whose channels are the k^2 source tokens'
channels concatenated in row-major block order. The widened tokens then
pass through AdaLN conditioned on (token + temporal embedding) and a
two-layer MLP shared across frames.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditioning import (
    AdaLnParams,
    TemporalEmbeddingParams,
    ada_ln,
    init_adaln,
    init_temporal_embedding,
    sinusoidal_embed,
    temporal_embedding,
)
from .tensor import Array, Rng, silu
from .vit import NEW_WEIGHT_STD, PvcConfig, VideoBatch


@dataclass
class CompressionParams:
    adaln: AdaLnParams                 # over D = k^2 * C
    te: TemporalEmbeddingParams        # D_out = k^2 * C
    w_in: Array                        # [k^2*C, F]
    b_in: Array
    w_out: Array                       # [F, C_out]
    b_out: Array

    @property
    def wide_dim(self) -> int:
        return self.w_in.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w_out.shape[1]


def init_compression(rng: Rng, cfg: PvcConfig, mlp_hidden: int | None = None,
                     out_dim: int | None = None) -> CompressionParams:
    wide = cfg.shuffle_kernel ** 2 * cfg.channels
    f = wide if mlp_hidden is None else mlp_hidden
    c_out = cfg.channels if out_dim is None else out_dim
    return CompressionParams(
        adaln=init_adaln(rng, wide),
        te=init_temporal_embedding(rng, wide),
        w_in=rng.normal((wide, f), NEW_WEIGHT_STD),
        b_in=np.zeros(f),
        w_out=rng.normal((f, c_out), NEW_WEIGHT_STD),
        b_out=np.zeros(c_out),
    )


def _grid_side(n: int, k: int) -> int:
    side = int(round(np.sqrt(n)))
    if side * side != n:
        raise ValueError(f"token count {n} is not a perfect square")
    if side % k != 0:
        raise ValueError(f"grid side {side} not divisible by kernel {k}")
    return side


def pixel_shuffle(x: Array, k: int) -> Array:
    """[B,T,N,C] -> [B,T,N/k^2, k^2*C] by k x k block concatenation."""
    x = np.asarray(x, dtype=np.float64)
    b, t, n, c = x.shape
    side = _grid_side(n, k)
    m = side // k
    g = x.reshape(b, t, m, k, m, k, c)
    g = g.transpose(0, 1, 2, 4, 3, 5, 6)  # [B,T,mr,mc,kr,kc,C]
    return np.ascontiguousarray(g.reshape(b, t, m * m, k * k * c))


def pixel_unshuffle(y: Array, k: int) -> Array:
    """Exact inverse of pixel_shuffle; reconstructs [B,T,N,C] bitwise."""
    y = np.asarray(y, dtype=np.float64)
    b, t, m_tokens, wide = y.shape
    if wide % (k * k) != 0:
        raise ValueError(f"channel width {wide} not divisible by k^2={k * k}")
    c = wide // (k * k)
    m = _grid_side(m_tokens, 1)
    g = y.reshape(b, t, m, m, k, k, c)
    g = g.transpose(0, 1, 2, 4, 3, 5, 6)
    return np.ascontiguousarray(g.reshape(b, t, (m * k) ** 2, c))


def compress(v: VideoBatch, p: CompressionParams, cfg: PvcConfig) -> Array:
    """Compress per-frame tokens N -> M = N/k^2; output [B,T,M,C_out]."""
    k = cfg.shuffle_kernel
    xt = pixel_shuffle(v.features, k)
    if xt.shape[-1] != p.wide_dim:
        raise ValueError(f"shuffled width {xt.shape[-1]} != params {p.wide_dim}")
    te = temporal_embedding(sinusoidal_embed(v.timestamps, cfg.ts_scale), p.te)
    z = xt + te[None, :, None, :]
    a = ada_ln(xt, z, p.adaln, eps=cfg.eps)
    return silu(a @ p.w_in + p.b_in) @ p.w_out + p.b_out
