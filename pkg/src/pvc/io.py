"""PVCT tensor files and flat key/value manifests.

PVCT layout (all little-endian):
    magic  4 bytes  b"PVCT"
    u32    version (1)
    u32    ndim
    u64[]  extents, ndim of them
    f64[]  row-major payload

The byte layout is normative; read(write(t)) round-trips bitwise.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PVCT"
VERSION = 1


class PvctError(IOError):
    """Malformed or truncated PVCT file."""


def write_tensor(path, x: np.ndarray) -> None:
    x = np.asarray(x, dtype=np.float64)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, x.ndim))
        f.write(struct.pack(f"<{x.ndim}Q", *x.shape))
        f.write(x.astype("<f8", copy=False).tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise PvctError(f"{path}: bad magic {raw[:4]!r}")
    version, ndim = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise PvctError(f"{path}: unsupported version {version}")
    off = 12
    if len(raw) < off + 8 * ndim:
        raise PvctError(f"{path}: truncated header")
    shape = struct.unpack_from(f"<{ndim}Q", raw, off)
    off += 8 * ndim
    n = int(np.prod(shape)) if ndim else 1
    payload = raw[off:]
    if len(payload) != 8 * n:
        raise PvctError(f"{path}: payload is {len(payload)} bytes, expected {8 * n}")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return data.reshape(shape)


def write_manifest(path, entries: dict) -> None:
    """Write `key = value` lines; values are stringified."""
    lines = [f"{k} = {v}" for k, v in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    """Parse `key = value` lines; '#' starts a comment, blanks skipped."""
    entries = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PvctError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        entries[k.strip()] = v.strip()
    return entries
