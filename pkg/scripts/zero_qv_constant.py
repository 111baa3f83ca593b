"""Measure the constant C in ``sum (db)^2 <= C 2^{n(1 - 2 alpha)}`` for the zero-QV series.

Also records the level-14 QV of the shipped Dirichlet sum (Brownian plus
zero-QV series) relative to the QV of its Brownian part.

    python scripts/zero_qv_constant.py --seeds 200
"""

import argparse

import numpy as np

from _common import write_fixture
from pathcalc.generators import GenSpec, generate


def level_qv(values: np.ndarray, depth: int, n: int) -> float:
    stride = 2 ** (depth - n)
    return float(np.sum(np.diff(values[::stride, 0]) ** 2))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--alpha", type=float, default=0.75)
    ap.add_argument("--amplitude", type=float, default=0.1)
    ap.add_argument("--shipped-seed", type=int, default=42)
    args = ap.parse_args()
    depth, levels = 14, range(8, 15)
    consts, finals, slopes = [], [], []
    for s in range(args.seeds):
        b, _ = generate(GenSpec(kind="zero_qv", seed=s, depth=depth, alpha=args.alpha, amplitude=args.amplitude))
        vals = b.values
        q = np.array([level_qv(vals, depth, n) for n in levels])
        consts.append(float((q / 2.0 ** (np.array(levels) * (1 - 2 * args.alpha))).max()))
        finals.append(q[-1])
        slopes.append(float(np.polyfit(list(levels), np.log2(q), 1)[0]))
    x, _ = generate(GenSpec(kind="brownian", seed=args.shipped_seed, depth=depth))
    b, _ = generate(GenSpec(kind="zero_qv", seed=args.shipped_seed, depth=depth, alpha=args.alpha,
                            amplitude=args.amplitude))
    qx = level_qv(x.values, depth, 14)
    qy = level_qv(x.values + b.values, depth, 14)
    payload = {
        "alpha": args.alpha,
        "amplitude": args.amplitude,
        "oracle_seeds": args.seeds,
        "constant_max": max(consts),
        "level14_qv_max": float(max(finals)),
        "fitted_slope_mean": float(np.mean(slopes)),
        "fitted_slope_range": [float(min(slopes)), float(max(slopes))],
        "expected_slope": 1 - 2 * args.alpha,
        "shipped_seed": args.shipped_seed,
        "shipped_zero_qv_level14": level_qv(b.values, depth, 14),
        "shipped_dirichlet_relative_gap": abs(qy - qx) / qx,
    }
    print(write_fixture("zero_qv.json", payload))
    for k, v in sorted(payload.items()):
        print(f"{k},{v}")


if __name__ == "__main__":
    main()
