#!/usr/bin/env python3
"""Sampling-ratio study: reconstruction quality versus measurement count.

One long acquisition is simulated and progressively truncated (30,000 down to
500 shots by default, mirroring the experimental series), so every point sees
the same measurement prefix. Reports sgi1 CNR and the sampling ratio
n / pixel-count, and exports the images.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import gikit
from gikit.fileio import ManifestRow, write_manifest

DEFAULT_SERIES = "30000,20000,10000,5000,1000,500"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--series", default=DEFAULT_SERIES, help="comma-separated shot counts")
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--outdir", default="out/sampling")
    args = ap.parse_args()

    counts = sorted({int(v) for v in args.series.split(",") if v.strip()}, reverse=True)
    if not counts:
        ap.error("--series must list at least one shot count")

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scene = gikit.binary_demo_scene(args.size, args.size)
    mask = gikit.mask_from_scene(scene)
    pixels = args.size * args.size

    print(f"simulating {counts[0]} shots at {args.size}x{args.size} ...")
    full = gikit.simulate(scene, n=counts[0], seed=args.seed)

    rows = []
    print(f"{'n':>7s} {'ratio':>8s} {'cnr':>8s}")
    for n in counts:
        ds = full.first(n)
        result = gikit.recon_sgi(ds, mode=1)
        quality = gikit.cnr(result.image, mask).cnr
        gikit.export_image(result.image, outdir / f"sgi1_n{n:06d}.pgm")
        rows.append(ManifestRow(
            method="sgi1", n=n, k=1, drift_kind="none", noise_mean=0.0,
            cnr=quality, pair_count=result.count, wall_time_ms=0.0,
            settings={"seed": args.seed, "size": args.size},
        ))
        print(f"{n:7d} {n / pixels:8.4f} {quality:8.3f}")

    write_manifest(rows, outdir / "sampling")
    print(f"images and manifest written to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
