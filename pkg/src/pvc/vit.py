"""Progressive-encoding vision transformer.

The stack is a standard pre-norm ViT whose last `temporal_layers` layers
additionally carry a gated, causally masked attention across frames:

    x += S-MHA(LN(x))                          spatial, per frame
    x += alpha * T-MHA(AdaLN(x; x + TE))       temporal, causal, gated
    x += FFN(LN(x))

The gate alpha starts at exactly zero, so a freshly constructed stack is
bitwise a plain per-frame ViT.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditioning import (
    AdaLnParams,
    TemporalEmbeddingParams,
    ada_ln,
    init_adaln,
    init_temporal_embedding,
    relative_timestamps,
    sinusoidal_embed,
    temporal_embedding,
)
from .tensor import Array, Rng, layer_norm, silu

# Finite stand-in for -inf in masked attention scores; exp underflows to
# exactly 0, which keeps causality bitwise rather than approximately.
MASK_VALUE = -1e30

NEW_WEIGHT_STD = 0.02


@dataclass
class PvcConfig:
    """Architectural constants; defaults follow the ViT-L/14 geometry."""
    image_size: int = 448
    patch_size: int = 14
    channels: int = 1024
    heads: int = 16
    ffn_dim: int = 4096
    layers: int = 24
    temporal_layers: int = 8
    shuffle_kernel: int = 4
    t_img: int = 4
    frame_bounds: tuple[int, int] = (16, 96)
    ts_scale: float = 1000.0
    eps: float = 1e-6
    pixel_mean: tuple[float, float, float] = (0.485, 0.456, 0.406)
    pixel_std: tuple[float, float, float] = (0.229, 0.224, 0.225)

    def __post_init__(self):
        if self.image_size % self.patch_size != 0:
            raise ValueError("image_size must be divisible by patch_size")
        if self.channels % self.heads != 0:
            raise ValueError("channels must be divisible by heads")
        if self.temporal_layers > self.layers:
            raise ValueError("temporal_layers cannot exceed layers")
        if self.tokens_per_frame % (self.shuffle_kernel ** 2) != 0:
            raise ValueError("shuffle kernel^2 must divide tokens per frame")

    @property
    def grid(self) -> int:
        return self.image_size // self.patch_size

    @property
    def tokens_per_frame(self) -> int:
        return self.grid ** 2

    @property
    def compressed_tokens(self) -> int:
        return self.tokens_per_frame // self.shuffle_kernel ** 2

    @property
    def head_dim(self) -> int:
        return self.channels // self.heads


@dataclass
class VideoBatch:
    """Patch-token features [B, T, N, C] with per-frame timestamps."""
    features: Array
    timestamps: Array
    is_static: bool = False

    def __post_init__(self):
        if self.features.ndim != 4:
            raise ValueError(f"features must be [B,T,N,C], got {self.features.shape}")
        if len(self.timestamps) != self.features.shape[1]:
            raise ValueError("timestamps length must equal frame count")

    @property
    def shape(self):
        return self.features.shape


@dataclass
class AttentionParams:
    heads: int
    wq: Array
    wk: Array
    wv: Array
    wo: Array
    bq: Array
    bk: Array
    bv: Array
    bo: Array

    def param_count(self) -> int:
        return sum(w.size for w in (self.wq, self.wk, self.wv, self.wo,
                                    self.bq, self.bk, self.bv, self.bo))


@dataclass
class LayerParams:
    """One ViT layer; temporal fields are None for plain layers."""
    ln1_gamma: Array
    ln1_beta: Array
    smha: AttentionParams
    ln2_gamma: Array
    ln2_beta: Array
    ffn_w_in: Array
    ffn_b_in: Array
    ffn_w_out: Array
    ffn_b_out: Array
    tmha: AttentionParams | None = None
    adaln: AdaLnParams | None = None
    te: TemporalEmbeddingParams | None = None
    gate_alpha: Array | None = None

    @property
    def is_temporal(self) -> bool:
        return self.tmha is not None

    def added_param_count(self) -> int:
        """Parameters beyond a plain layer (the progressive additions)."""
        if not self.is_temporal:
            return 0
        return (self.tmha.param_count() + self.adaln.param_count()
                + self.te.param_count() + self.gate_alpha.size)


@dataclass
class PatchEmbedParams:
    weight: Array  # [patch*patch*3, C]
    bias: Array    # [C]
    pos: Array     # [N, C], shared across frames and tiles


@dataclass
class ModelParams:
    cfg: PvcConfig
    patch: PatchEmbedParams
    layers: list[LayerParams] = field(default_factory=list)


def expected_added_params(c: int, adaln_hidden: int | None = None,
                          te_hidden: int | None = None) -> int:
    """Closed-form count of the per-layer progressive additions."""
    h_a = c if adaln_hidden is None else adaln_hidden
    h_t = c if te_hidden is None else te_hidden
    tmha = 4 * c * c + 4 * c
    adaln = 4 * c * h_a
    te = 256 * h_t + h_t * c
    gate = c
    return tmha + adaln + te + gate


def init_attention(rng: Rng, c: int, heads: int,
                   std: float = NEW_WEIGHT_STD) -> AttentionParams:
    return AttentionParams(
        heads=heads,
        wq=rng.normal((c, c), std), wk=rng.normal((c, c), std),
        wv=rng.normal((c, c), std), wo=rng.normal((c, c), std),
        bq=np.zeros(c), bk=np.zeros(c), bv=np.zeros(c), bo=np.zeros(c),
    )


def init_layer(rng: Rng, cfg: PvcConfig, temporal: bool) -> LayerParams:
    c = cfg.channels
    p = LayerParams(
        ln1_gamma=np.ones(c), ln1_beta=np.zeros(c),
        smha=init_attention(rng, c, cfg.heads),
        ln2_gamma=np.ones(c), ln2_beta=np.zeros(c),
        ffn_w_in=rng.normal((c, cfg.ffn_dim), NEW_WEIGHT_STD),
        ffn_b_in=np.zeros(cfg.ffn_dim),
        ffn_w_out=rng.normal((cfg.ffn_dim, c), NEW_WEIGHT_STD),
        ffn_b_out=np.zeros(c),
    )
    if temporal:
        p.tmha = init_attention(rng, c, cfg.heads)
        p.adaln = init_adaln(rng, c)
        p.te = init_temporal_embedding(rng, c)
        p.gate_alpha = np.zeros(c)  # exact zero: init-identity guarantee
    return p


def init_model(seed: int, cfg: PvcConfig) -> ModelParams:
    rng = Rng(seed)
    n = cfg.tokens_per_frame
    patch = PatchEmbedParams(
        weight=rng.normal((cfg.patch_size * cfg.patch_size * 3, cfg.channels),
                          NEW_WEIGHT_STD),
        bias=np.zeros(cfg.channels),
        pos=rng.normal((n, cfg.channels), NEW_WEIGHT_STD),
    )
    plain = cfg.layers - cfg.temporal_layers
    layers = [init_layer(rng, cfg, temporal=(i >= plain))
              for i in range(cfg.layers)]
    return ModelParams(cfg=cfg, patch=patch, layers=layers)


def patchify(frames: Array, cfg: PvcConfig, patch: PatchEmbedParams) -> VideoBatch:
    """Project [B,T,H,W,3] pixels to patch tokens [B,T,N,C].

    Each patch_size^2 pixel block is flattened row-major (row, col,
    channel) and linearly projected; a learned per-position embedding is
    added, shared across frames.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 5 or frames.shape[-1] != 3:
        raise ValueError(f"expected [B,T,H,W,3] pixels, got {frames.shape}")
    b, t, h, w, _ = frames.shape
    if h != cfg.image_size or w != cfg.image_size:
        raise ValueError(f"frame size {h}x{w} != configured {cfg.image_size}")
    g, ps = cfg.grid, cfg.patch_size
    x = frames.reshape(b, t, g, ps, g, ps, 3)
    x = x.transpose(0, 1, 2, 4, 3, 5, 6).reshape(b, t, g * g, ps * ps * 3)
    tokens = x @ patch.weight + patch.bias
    tokens = tokens + patch.pos[None, None, :, :]
    is_static = t > 1 and bool(np.all(frames == frames[:, :1]))
    return VideoBatch(features=tokens,
                      timestamps=relative_timestamps(t),
                      is_static=is_static)


def _attention(x: Array, p: AttentionParams, causal: bool) -> Array:
    """Multi-head attention over axis 1 of x: [S, L, C] -> [S, L, C]."""
    s, l, c = x.shape
    if c % p.heads != 0:
        raise ValueError(f"channels {c} not divisible by heads {p.heads}")
    d = c // p.heads
    q = (x @ p.wq + p.bq).reshape(s, l, p.heads, d).transpose(0, 2, 1, 3)
    k = (x @ p.wk + p.bk).reshape(s, l, p.heads, d).transpose(0, 2, 1, 3)
    v = (x @ p.wv + p.bv).reshape(s, l, p.heads, d).transpose(0, 2, 1, 3)
    scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(d)
    if causal:
        mask = np.tril(np.ones((l, l), dtype=bool))
        scores = np.where(mask, scores, MASK_VALUE)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    attn = e / e.sum(axis=-1, keepdims=True)
    ctx = (attn @ v).transpose(0, 2, 1, 3).reshape(s, l, c)
    return ctx @ p.wo + p.bo


def spatial_mha(x: Array, p: AttentionParams) -> Array:
    """Self-attention among the N patch tokens of each frame: [B*T, N, C]."""
    return _attention(x, p, causal=False)


def temporal_mha_causal(x: Array, p: AttentionParams) -> Array:
    """Causal self-attention along frames at fixed spatial position: [B*N, T, C]."""
    return _attention(x, p, causal=True)


def layer_te(timestamps: Array, p: LayerParams, ts_scale: float) -> Array:
    """Per-frame conditioning vector [T, C] for one progressive layer."""
    return temporal_embedding(sinusoidal_embed(timestamps, ts_scale), p.te)


def progressive_layer_forward(v: VideoBatch, p: LayerParams,
                              ts_scale: float = 1000.0,
                              eps: float = 1e-6) -> VideoBatch:
    """One ViT layer; applies the gated temporal block only when present."""
    x = v.features
    b, t, n, c = x.shape

    h = layer_norm(x.reshape(b * t, n, c), gamma=p.ln1_gamma, beta=p.ln1_beta,
                   eps=eps)
    x = x + spatial_mha(h, p.smha).reshape(b, t, n, c)

    if p.is_temporal:
        te = layer_te(v.timestamps, p, ts_scale)  # [T, C]
        z = x + te[None, :, None, :]
        a = ada_ln(x, z, p.adaln, eps=eps)
        a = a.transpose(0, 2, 1, 3).reshape(b * n, t, c)
        tm = temporal_mha_causal(a, p.tmha)
        tm = tm.reshape(b, n, t, c).transpose(0, 2, 1, 3)
        x = x + p.gate_alpha * tm

    h = layer_norm(x, gamma=p.ln2_gamma, beta=p.ln2_beta, eps=eps)
    x = x + silu(h @ p.ffn_w_in + p.ffn_b_in) @ p.ffn_w_out + p.ffn_b_out

    return VideoBatch(features=x, timestamps=v.timestamps,
                      is_static=v.is_static)


def plain_layer_forward(x: Array, p: LayerParams, eps: float = 1e-6) -> Array:
    """The layer with the temporal block skipped; operates per frame."""
    h = layer_norm(x, gamma=p.ln1_gamma, beta=p.ln1_beta, eps=eps)
    x = x + spatial_mha(h, p.smha)
    h = layer_norm(x, gamma=p.ln2_gamma, beta=p.ln2_beta, eps=eps)
    return x + silu(h @ p.ffn_w_in + p.ffn_b_in) @ p.ffn_w_out + p.ffn_b_out


def vit_forward(v: VideoBatch, cfg: PvcConfig, model: ModelParams) -> VideoBatch:
    """Run the full stack: plain layers first, progressive layers last."""
    if len(model.layers) != cfg.layers:
        raise ValueError(f"expected {cfg.layers} layers, got {len(model.layers)}")
    plain = cfg.layers - cfg.temporal_layers
    for i, p in enumerate(model.layers):
        if p.is_temporal != (i >= plain):
            raise ValueError(f"layer {i}: temporal={p.is_temporal}, expected "
                             f"{'temporal' if i >= plain else 'plain'}")
        v = progressive_layer_forward(v, p, ts_scale=cfg.ts_scale, eps=cfg.eps)
    return v


def plain_vit_forward(v: VideoBatch, cfg: PvcConfig, model: ModelParams) -> VideoBatch:
    """Reference path: every frame through the per-frame (gate-free) stack."""
    b, t, n, c = v.features.shape
    x = v.features.reshape(b * t, n, c)
    for p in model.layers:
        x = plain_layer_forward(x, p, eps=cfg.eps)
    return VideoBatch(features=x.reshape(b, t, n, c),
                      timestamps=v.timestamps, is_static=v.is_static)
