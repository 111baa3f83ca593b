"""Monte-Carlo oracle for level-14 Brownian quadratic variation.

Squares the raw Gaussian increments drawn from the generator's Philox
streams, without building paths, and pins the band statistics and the
shipped seed's values as a fixture.

    python scripts/oracle_brownian_qv.py --seeds 1000
"""

import argparse
import math

import numpy as np

from _common import write_fixture
from pathcalc.generators import STREAM_BROWNIAN, rng_for


def qv_and_cross(seed: int, depth: int, sigma: float):
    n = 2**depth
    dt = 1.0 / n
    z1 = rng_for(seed, STREAM_BROWNIAN, 0).standard_normal(n)
    z2 = rng_for(seed, STREAM_BROWNIAN, 1).standard_normal(n)
    qv = float(np.sum((sigma * math.sqrt(dt) * z1) ** 2))
    cross = float(np.sum(z1 * z2) * sigma**2 * dt)
    return qv, cross


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=14)
    ap.add_argument("--shipped-seed", type=int, default=42)
    args = ap.parse_args()
    lo, hi = 0.95, 1.05
    vals = np.array([qv_and_cross(s, args.depth, 1.0) for s in range(args.seeds)])
    qv, cross = vals[:, 0], vals[:, 1]
    inside = (qv >= lo) & (qv <= hi)
    shipped_qv, shipped_cross = qv_and_cross(args.shipped_seed, args.depth, 1.0)
    payload = {
        "level": args.depth,
        "band": [lo, hi],
        "oracle_seeds": args.seeds,
        "fraction_in_band": float(inside.mean()),
        "in_band_first_100": int(inside[:100].sum()),
        "qv_mean": float(qv.mean()),
        "qv_std": float(qv.std(ddof=1)),
        "cross_abs_q99": float(np.quantile(np.abs(cross), 0.99)),
        "shipped_seed": args.shipped_seed,
        "shipped_qv": shipped_qv,
        "shipped_cross": shipped_cross,
    }
    if not lo <= shipped_qv <= hi:
        raise SystemExit(f"shipped seed {args.shipped_seed} falls outside the band: {shipped_qv}")
    print(write_fixture("brownian_qv.json", payload))
    for k, v in sorted(payload.items()):
        print(f"{k},{v}")


if __name__ == "__main__":
    main()
