"""Deterministic dense-tensor primitives.

Everything in this package computes in float64 on contiguous row-major
numpy arrays. Ops are pure: they never write into their inputs, and a
non-finite result (NaN/Inf) raises instead of propagating silently.
"""
from __future__ import annotations

import numpy as np

Array = np.ndarray

EPS_NORM = 1e-6


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or Inf."""


def as_tensor(data) -> Array:
    """Coerce to a contiguous float64 array and verify finiteness."""
    x = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    _check_finite(x, "as_tensor")
    return x


def _check_finite(x: Array, op: str) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"{op}: result contains NaN or Inf")


def matmul(a: Array, b: Array) -> Array:
    """2-D matrix product c[i,j] = sum_p a[i,p] b[p,j]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul inner extents differ: {a.shape} x {b.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        c = a @ b
    _check_finite(c, "matmul")
    return c


def softmax(x: Array, axis: int = -1) -> Array:
    """Numerically stable softmax along `axis` (max-subtracted)."""
    x = np.asarray(x, dtype=np.float64)
    if not -x.ndim <= axis < x.ndim:
        raise ValueError(f"softmax axis {axis} invalid for shape {x.shape}")
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / np.sum(e, axis=axis, keepdims=True)
    _check_finite(out, "softmax")
    return out


def sigmoid(x: Array) -> Array:
    x = np.asarray(x, dtype=np.float64)
    # split by sign to avoid overflow in exp
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(x: Array) -> Array:
    """SiLU (sigmoid-weighted linear unit): x * sigmoid(x)."""
    x = np.asarray(x, dtype=np.float64)
    out = x * sigmoid(x)
    _check_finite(out, "silu")
    return out


def silu_grad(x: Array) -> Array:
    """Elementwise derivative of SiLU at x."""
    s = sigmoid(np.asarray(x, dtype=np.float64))
    return s * (1.0 + x * (1.0 - s))


def layer_norm(x: Array, axis: int = -1, gamma: Array | None = None,
               beta: Array | None = None, eps: float = EPS_NORM) -> Array:
    """Normalize to zero mean / unit variance along `axis`, then affine.

    gamma/beta, when given, are 1-D with the extent of the normalized axis.
    """
    x = np.asarray(x, dtype=np.float64)
    if not -x.ndim <= axis < x.ndim:
        raise ValueError(f"layer_norm axis {axis} invalid for shape {x.shape}")
    ax = axis % x.ndim
    mu = x.mean(axis=ax, keepdims=True)
    var = x.var(axis=ax, keepdims=True)
    out = (x - mu) / np.sqrt(var + eps)
    d = x.shape[ax]
    bshape = [1] * x.ndim
    bshape[ax] = d
    if gamma is not None:
        g = np.asarray(gamma, dtype=np.float64)
        if g.shape != (d,):
            raise ValueError(f"gamma shape {g.shape} != ({d},)")
        out = out * g.reshape(bshape)
    if beta is not None:
        b = np.asarray(beta, dtype=np.float64)
        if b.shape != (d,):
            raise ValueError(f"beta shape {b.shape} != ({d},)")
        out = out + b.reshape(bshape)
    _check_finite(out, "layer_norm")
    return out


def reshape(x: Array, shape) -> Array:
    """Row-major reshape; element count must be preserved."""
    x = np.asarray(x, dtype=np.float64)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != x.size:
        raise ValueError(f"reshape {x.shape} -> {shape}: element count differs")
    return np.ascontiguousarray(x.reshape(shape))


def permute(x: Array, axes) -> Array:
    """Axis permutation (generalized transpose); values are untouched."""
    x = np.asarray(x, dtype=np.float64)
    axes = tuple(int(a) for a in axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ValueError(f"permute axes {axes} invalid for ndim {x.ndim}")
    return np.ascontiguousarray(np.transpose(x, axes))


class Rng:
    """Seeded counter-based random stream (Philox).

    The same 64-bit seed reproduces the same draw sequence on every
    platform, which is what makes `--seed` fully determine a model.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def normal(self, shape, std: float = 1.0) -> Array:
        return self._gen.standard_normal(size=tuple(shape)) * float(std)

    def uniform(self, shape, low: float = 0.0, high: float = 1.0) -> Array:
        return self._gen.uniform(low, high, size=tuple(shape))

    def integers(self, low: int, high: int) -> int:
        return int(self._gen.integers(low, high))
