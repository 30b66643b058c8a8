#!/usr/bin/env python3
"""Desk-scale baseline experiment: binary object, iid patterns, all estimators.

Simulates one clean acquisition, reconstructs with every method, exports the
images as 16-bit graymaps, and prints a CNR table. Defaults reproduce the
32x32 / 4096-shot configuration used by the acceptance suite; pass
--size 128 --n 16384 for the full-scale run (needs ~2.2 GB RAM).
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import gikit
from gikit.fileio import ManifestRow, write_manifest


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--outdir", default="out/baseline")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    scene = gikit.binary_demo_scene(args.size, args.size)
    mask = gikit.mask_from_scene(scene)
    gikit.export_image(gikit.ReconImage(scene.transmission), outdir / "scene.pgm")

    print(f"simulating {args.size}x{args.size}, n={args.n}, seed={args.seed} ...")
    dataset = gikit.simulate(scene, n=args.n, seed=args.seed)
    gikit.write_dataset(dataset, outdir / "baseline.gid")

    runs = [
        ("g2", lambda: gikit.recon_g2(dataset)),
        ("dgi-delta", lambda: gikit.recon_delta_gi(dataset)),
        ("dgi", lambda: gikit.recon_dgi(dataset)),
        ("ci", lambda: gikit.recon_ci(dataset)),
        ("sgi1", lambda: gikit.recon_sgi(dataset, mode=1)),
        ("sgi2", lambda: gikit.recon_sgi(dataset, mode=2)),
        ("sgi3", lambda: gikit.recon_sgi(dataset, mode=3)),
    ]
    rows = []
    print(f"{'method':10s} {'cnr':>8s} {'pairs':>6s} {'ms':>8s}")
    for name, run in runs:
        start = time.perf_counter()
        result = run()
        ms = (time.perf_counter() - start) * 1e3
        quality = gikit.cnr(result.images[0], mask).cnr
        suffixes = [""] if len(result.images) == 1 else ["_pos", "_neg"]
        for image, suffix in zip(result.images, suffixes):
            gikit.export_image(image, outdir / f"{name}{suffix}.pgm")
        rows.append(ManifestRow(
            method=name, n=dataset.n, k=1 if name.startswith("sgi") else None,
            drift_kind="none", noise_mean=0.0, cnr=quality,
            pair_count=result.count, wall_time_ms=round(ms, 3),
            settings={"seed": args.seed, "size": args.size},
        ))
        print(f"{name:10s} {quality:8.3f} {result.count:6d} {ms:8.1f}")
    write_manifest(rows, outdir / "baseline")
    print(f"images and manifest written to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
