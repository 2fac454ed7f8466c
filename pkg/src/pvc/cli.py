"""Command-line entry point.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 I/O error.
The default seed comes from --seed, falling back to the PVC_SEED
environment variable, then 0.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io, model_store
from .budget import (
    PRESET_NAMES,
    compare_strategies,
    count_tokens,
    estimate_flops,
    preset,
    specs_from_entries,
)
from .compression import compress, init_compression
from .conditioning import relative_timestamps
from .input_pipeline import (
    dynamic_tile,
    image_to_static_video,
    normalize,
    read_ppm,
    sample_frames,
    RawImage,
    RawVideo,
)
from .tensor import Rng
from .verification import (
    CHECKED_MODULES,
    check_causality,
    check_init_identity,
    run_grad_check,
    toy_config,
)
from .vit import PvcConfig, VideoBatch, init_model, patchify, vit_forward

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("PVC_SEED", "0"))


def _load_or_init_model(args):
    if args.manifest:
        return model_store.load_model(args.manifest)
    cfg = toy_config() if args.toy else PvcConfig()
    return init_model(_default_seed(args), cfg)


def _cmd_forward(args) -> int:
    model = _load_or_init_model(args)
    cfg = model.cfg
    x = io.read_tensor(args.input)
    if x.ndim != 4:
        raise io.PvctError(f"{args.input}: expected [B,T,N,C] tokens, got {x.shape}")
    if x.shape[2] != cfg.tokens_per_frame or x.shape[3] != cfg.channels:
        raise io.PvctError(
            f"{args.input}: tokens {x.shape} do not match model "
            f"(N={cfg.tokens_per_frame}, C={cfg.channels})")
    v = VideoBatch(features=x, timestamps=relative_timestamps(x.shape[1]))
    out = vit_forward(v, cfg, model)
    io.write_tensor(args.output, out.features)
    print(f"forward: wrote {args.output} shape={out.features.shape}")
    return EXIT_OK


def _cmd_compress(args) -> int:
    seed = _default_seed(args)
    x = io.read_tensor(args.input)
    if x.ndim != 4:
        raise io.PvctError(f"{args.input}: expected [B,T,N,C] tokens, got {x.shape}")
    b, t, n, c = x.shape
    # geometry comes from the tokens themselves; only the kernel matters
    cfg = _compress_config(n, c, args.kernel)
    if args.comp_manifest:
        params = model_store.load_compression(args.comp_manifest)
    else:
        params = init_compression(Rng(seed), cfg)
    v = VideoBatch(features=x, timestamps=relative_timestamps(t))
    out = compress(v, params, cfg)
    io.write_tensor(args.output, out)
    ts = " ".join(f"{t_:.12g}" for t_ in v.timestamps)
    io.write_manifest(str(args.output) + ".manifest", {
        "B": b, "T": t, "M": out.shape[2], "C_out": out.shape[3],
        "timestamps": ts,
    })
    print(f"compress: wrote {args.output} shape={out.shape}")
    return EXIT_OK


def _compress_config(n: int, c: int, k: int) -> PvcConfig:
    side = int(round(np.sqrt(n)))
    if side * side != n:
        raise io.PvctError(f"token count {n} is not a square grid")
    # synthesize a config matching the token geometry
    return PvcConfig(image_size=side, patch_size=1, channels=c, heads=1,
                     ffn_dim=max(c, 1), layers=1, temporal_layers=0,
                     shuffle_kernel=k)


def _cmd_check_causality(args) -> int:
    passed, details = check_causality(_default_seed(args))
    print(f"check = causality\nseed = {_default_seed(args)}")
    print(f"forward_leak = {details['forward_leak']:.3e}")
    print(f"grad_leak = {details['grad_leak']:.3e}")
    print(f"result = {'pass' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _cmd_check_init_identity(args) -> int:
    passed, diff = check_init_identity(_default_seed(args))
    print(f"check = init-identity\nseed = {_default_seed(args)}")
    print(f"max_abs_diff = {diff:.3e}")
    print(f"result = {'pass' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _cmd_grad_check(args) -> int:
    report = run_grad_check(args.module, _default_seed(args), tol=args.tol)
    text = report.format_text()
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_budget(args) -> int:
    if args.preset:
        arch, work, reuse = preset(args.preset)
        if args.reuse is not None:
            reuse = args.reuse
        report = estimate_flops(work, arch, reuse=reuse)
        print(f"preset = {args.preset}")
        print(report.format_text())
        if args.compare_baseline:
            b_arch, b_work, b_reuse = preset(args.compare_baseline)
            base = estimate_flops(b_work, b_arch, reuse=b_reuse)
            cmp = compare_strategies([base, report],
                                     names=[args.compare_baseline, args.preset])
            print(cmp.format_text())
        return EXIT_OK
    if not args.config:
        print("budget: need --preset or --config", file=sys.stderr)
        return EXIT_USAGE
    entries = io.read_manifest(args.config)
    arch, work = specs_from_entries(entries)
    report = estimate_flops(work, arch, reuse=bool(args.reuse))
    tokens = count_tokens(work, arch)
    print(f"visual_tokens_per_frame = {tokens.per_frame}")
    print(report.format_text())
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    seed = _default_seed(args)
    cfg = toy_config() if args.toy else PvcConfig()
    if args.tile_px:
        if args.tile_px != cfg.image_size:
            raise io.PvctError(
                f"--tile-px {args.tile_px} does not match model input "
                f"size {cfg.image_size}")

    if args.image:
        img = read_ppm(args.image)
        tiles, grid = dynamic_tile(img, cfg.image_size, args.max_tiles)
        t_img = args.t_img or cfg.t_img
        # tiles ride the batch axis; every tile of a frame shares its timestamp
        pixels = np.stack([
            normalize(image_to_static_video(tile, t_img).frames,
                      cfg.pixel_mean, cfg.pixel_std)
            for tile in tiles
        ])  # [tiles, T, H, W, 3]
        print(f"pipeline: {len(tiles)} tile(s), grid {grid[0]}x{grid[1]}, "
              f"t_img={t_img}")
    elif args.video:
        frames_arr = io.read_tensor(args.video)
        if frames_arr.ndim != 4 or frames_arr.shape[-1] != 3:
            raise io.PvctError(f"{args.video}: expected [T,H,W,3] frames")
        raw = RawVideo(frames=[RawImage(np.clip(f, 0, 255).astype(np.uint8))
                               for f in frames_arr])
        t = args.frames or raw.frame_count
        lo, hi = cfg.frame_bounds
        if not args.no_frame_bounds and not lo <= t <= hi:
            print(f"pipeline: frame count {t} outside validated bounds "
                  f"[{lo}, {hi}] (use --no-frame-bounds to override)",
                  file=sys.stderr)
            return EXIT_USAGE
        sampled = sample_frames(raw, t)
        pixels = normalize(sampled.frames, cfg.pixel_mean, cfg.pixel_std)[None]
        print(f"pipeline: video, {t} sampled frame(s)")
    else:
        print("pipeline: need --image or --video", file=sys.stderr)
        return EXIT_USAGE

    model = (model_store.load_model(args.manifest) if args.manifest
             else init_model(seed, cfg))
    v = patchify(pixels, cfg, model.patch)
    v = vit_forward(v, cfg, model)
    comp = init_compression(Rng(seed + 1), cfg)
    out = compress(v, comp, cfg)
    io.write_tensor(args.output, out)
    ts = " ".join(f"{t_:.12g}" for t_ in v.timestamps)
    io.write_manifest(str(args.output) + ".manifest", {
        "B": out.shape[0], "T": out.shape[1], "M": out.shape[2],
        "C_out": out.shape[3], "timestamps": ts,
    })
    print(f"pipeline: wrote {args.output} shape={out.shape} "
          f"({out.shape[0] * out.shape[1] * out.shape[2]} visual tokens)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pvc",
        description="Progressive visual token compression: forwards, "
                    "checks, and budget accounting")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: $PVC_SEED or 0)")

    p = sub.add_parser("forward", help="run the ViT stack on PVCT tokens")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", help="model manifest (else init from seed)")
    p.add_argument("--toy", action="store_true", help="toy-scale config")
    add_seed(p)
    p.set_defaults(fn=_cmd_forward)

    p = sub.add_parser("compress", help="compress PVCT tokens N -> N/k^2")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--kernel", type=int, default=4)
    p.add_argument("--comp-manifest", help="compression weights manifest")
    add_seed(p)
    p.set_defaults(fn=_cmd_compress)

    p = sub.add_parser("check-causality", help="frame causality, forward and grad")
    add_seed(p)
    p.set_defaults(fn=_cmd_check_causality)

    p = sub.add_parser("check-init-identity",
                       help="zero-gate stack equals plain per-frame ViT")
    add_seed(p)
    p.set_defaults(fn=_cmd_check_init_identity)

    p = sub.add_parser("grad-check", help="analytic backward vs finite differences")
    p.add_argument("--module", required=True, choices=CHECKED_MODULES)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--output", help="also write the report to this file")
    add_seed(p)
    p.set_defaults(fn=_cmd_grad_check)

    p = sub.add_parser("budget", help="token/FLOPs accounting")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--config", help="flat key=value arch/workload file")
    p.add_argument("--compare-baseline", choices=PRESET_NAMES,
                   help="also print a comparison against this preset")
    p.add_argument("--reuse", dest="reuse", action="store_true", default=None)
    p.add_argument("--no-reuse", dest="reuse", action="store_false")
    p.set_defaults(fn=_cmd_budget)

    p = sub.add_parser("pipeline",
                       help="image/video -> tiles -> ViT -> compressed tokens")
    p.add_argument("--image", help="PPM (P6) image")
    p.add_argument("--video", help="PVCT frame stack [T,H,W,3]")
    p.add_argument("--t-img", type=int, default=None)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--max-tiles", type=int, default=12)
    p.add_argument("--tile-px", type=int, default=None)
    p.add_argument("--no-frame-bounds", action="store_true")
    p.add_argument("--manifest", help="model manifest (else init from seed)")
    p.add_argument("--toy", action="store_true", help="toy-scale config")
    p.add_argument("--output", required=True)
    add_seed(p)
    p.set_defaults(fn=_cmd_pipeline)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (io.PvctError, FileNotFoundError, IsADirectoryError, OSError) as e:
        print(f"pvc: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"pvc: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
