#!/usr/bin/env python3
"""Coverage experiment: how often does the sampled distance interval
trap the true distance, as a function of sample count?

Each random scene is inverted with parameter ranges centered on the
true bullet speed and miss angle, so misses measure sampling error
alone. Prints one row per sample count.
"""

import argparse
import time

from shotloc.ballistics import Method1Inputs, estimate_method1
from shotloc.oracle import generate_random_scene, report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenes", type=int, default=1000)
    ap.add_argument("--samples", type=int, nargs="+", default=[100, 1000, 10000])
    ap.add_argument("--vb-halfwidth", type=float, default=100.0, help="m/s")
    ap.add_argument("--alpha-halfwidth", type=float, default=5.0, help="deg")
    args = ap.parse_args()

    print(f"{'samples':>8} {'covered':>8} {'rate':>7} {'seconds':>8}")
    for n_samples in args.samples:
        t0 = time.monotonic()
        covered = 0
        for seed in range(args.scenes):
            scene, truth = generate_random_scene(seed)
            arr = report(scene)["cam1"]
            if arr.tdiff is None:
                continue
            a = truth["cam1"].alpha_deg
            est = estimate_method1(
                Method1Inputs(
                    tdiff=arr.tdiff,
                    vb_range=(
                        scene.vb - args.vb_halfwidth,
                        scene.vb + args.vb_halfwidth,
                    ),
                    alpha_deg_range=(
                        max(0.0, a - args.alpha_halfwidth),
                        a + args.alpha_halfwidth,
                    ),
                    n_samples=n_samples,
                ),
                seed=seed,
            )
            covered += est.slant_min <= arr.distance <= est.slant_max
        dt = time.monotonic() - t0
        print(f"{n_samples:>8} {covered:>8} {covered / args.scenes:>7.3f} {dt:>8.2f}")


if __name__ == "__main__":
    main()
