"""Standardize visual inputs as videos.

Images are repeated into static videos; native videos are uniformly
subsampled; high-resolution images are split into fixed-size tiles by
aspect ratio. Pixels travel as 8-bit RGB until `normalize`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Array


@dataclass
class RawImage:
    pixels: np.ndarray  # uint8 [H, W, 3]

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8 [H,W,3], got {p.shape} {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class RawVideo:
    frames: list[RawImage]
    is_static: bool = False

    def __post_init__(self):
        if not self.frames:
            raise ValueError("video needs at least one frame")
        h, w = self.frames[0].height, self.frames[0].width
        for f in self.frames:
            if (f.height, f.width) != (h, w):
                raise ValueError("all frames must share dimensions")

    @property
    def frame_count(self) -> int:
        return len(self.frames)


def read_ppm(path) -> RawImage:
    """Read a binary PPM (P6, maxval 255)."""
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P6"):
        raise IOError(f"{path}: not a P6 PPM")
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them
    fields, pos = [], 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise IOError(f"{path}: only maxval 255 supported, got {maxval}")
    payload = data[pos:pos + 3 * w * h]
    if len(payload) != 3 * w * h:
        raise IOError(f"{path}: truncated pixel data")
    return RawImage(np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3).copy())


def write_ppm(path, img: RawImage) -> None:
    with open(path, "wb") as f:
        f.write(f"P6\n{img.width} {img.height}\n255\n".encode())
        f.write(img.pixels.tobytes())


def image_to_static_video(img: RawImage, t_img: int) -> RawVideo:
    """Repeat one image t_img times into a static video."""
    if t_img < 1:
        raise ValueError(f"t_img must be >= 1, got {t_img}")
    return RawVideo(frames=[RawImage(img.pixels.copy()) for _ in range(t_img)],
                    is_static=True)


def sample_frames(v: RawVideo, t: int) -> RawVideo:
    """Uniformly sample t frames: idx_i = round(i*(L-1)/(t-1)), half up.

    Endpoints are always included for t >= 2. Asking for more frames than
    exist is an error; frames are never duplicated.
    """
    l = v.frame_count
    if t < 1:
        raise ValueError(f"frame count must be >= 1, got {t}")
    if t > l:
        raise ValueError(f"cannot sample {t} frames from a {l}-frame video")
    if t == 1:
        idx = [0]
    else:
        idx = [int(np.floor(i * (l - 1) / (t - 1) + 0.5)) for i in range(t)]
    return RawVideo(frames=[v.frames[i] for i in idx], is_static=v.is_static)


def select_tile_grid(width: int, height: int, max_tiles: int) -> tuple[int, int]:
    """Pick the (rows, cols) grid with r*c <= max_tiles whose aspect c/r is
    closest to the image's; ties go to fewer tiles, then wider grids."""
    if max_tiles < 1:
        raise ValueError("max_tiles must be >= 1")
    aspect = width / height
    best = None
    for r in range(1, max_tiles + 1):
        for c in range(1, max_tiles // r + 1):
            key = (abs(c / r - aspect), r * c, -c)
            if best is None or key < best[0]:
                best = (key, (r, c))
    return best[1]


def bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample uint8 [H,W,3] with half-pixel-centered sampling."""
    h, w, _ = pixels.shape
    src = pixels.astype(np.float64)
    ys = np.clip((np.arange(out_h) + 0.5) * h / out_h - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * w / out_w - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    top = src[y0][:, x0] * (1 - wx) + src[y0][:, x1] * wx
    bot = src[y1][:, x0] * (1 - wx) + src[y1][:, x1] * wx
    out = top * (1 - wy) + bot * wy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def dynamic_tile(img: RawImage, tile_px: int,
                 max_tiles: int) -> tuple[list[RawImage], tuple[int, int]]:
    """Resize to the chosen grid and split into tile_px-square tiles.

    Returns (tiles in row-major order, (rows, cols)). Stacking the tiles
    back on the grid reconstructs the resized image bitwise.
    """
    rows, cols = select_tile_grid(img.width, img.height, max_tiles)
    resized = bilinear_resize(img.pixels, rows * tile_px, cols * tile_px)
    tiles = []
    for r in range(rows):
        for c in range(cols):
            tiles.append(RawImage(resized[r * tile_px:(r + 1) * tile_px,
                                          c * tile_px:(c + 1) * tile_px].copy()))
    return tiles, (rows, cols)


def normalize(images, mean=(0.485, 0.456, 0.406), std=(0.229, 0.224, 0.225)) -> Array:
    """8-bit RGB -> float64, scaled to [0,1] then channel-standardized.

    Accepts a RawImage, a list of RawImage, or a uint8 array whose last
    axis is RGB; output shape is [len, H, W, 3] for lists.
    """
    if isinstance(images, RawImage):
        arr = images.pixels[None]
    elif isinstance(images, (list, tuple)):
        arr = np.stack([im.pixels for im in images])
    else:
        arr = np.asarray(images)
    x = arr.astype(np.float64) / 255.0
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    return (x - mean) / std


def denormalize(x: Array, mean=(0.485, 0.456, 0.406),
                std=(0.229, 0.224, 0.225)) -> Array:
    """Inverse of normalize, back to the [0,1] scale (not re-quantized)."""
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    return np.asarray(x, dtype=np.float64) * std + mean


def video_to_pixel_tensor(v: RawVideo, mean=(0.485, 0.456, 0.406),
                          std=(0.229, 0.224, 0.225)) -> Array:
    """[1, T, H, W, 3] normalized pixel tensor for patchify."""
    return normalize(v.frames, mean, std)[None]
