"""Closed-form oracle for ``f(t, x) = t x^2`` along dyadic levels.

With left-point quadrature every term telescopes except
``sum h (x_{i+1}^2 - x_i^2)``, so the level-n residual is exactly
``2^-n (x_T^2 - x_0^2)`` on a unit horizon.  The script records it per
level for the shipped Brownian seed.

    python scripts/oracle_ito_reduction.py
"""

import argparse

from _common import write_fixture
from pathcalc.generators import GenSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shipped-seed", type=int, default=42)
    args = ap.parse_args()
    path, _ = generate(GenSpec(kind="brownian", seed=args.shipped_seed, depth=14))
    xT, x0 = float(path.tip[0]), float(path.values[0, 0])
    residuals = {str(n): 2.0**-n * (xT**2 - x0**2) for n in range(8, 15)}
    F_T = 1.0 * xT**2
    payload = {
        "shipped_seed": args.shipped_seed,
        "x_T": xT,
        "F_T": F_T,
        "residual_by_level": residuals,
        "threshold_relative": 1e-2,
        "final_relative": abs(residuals["14"]) / (1 + abs(F_T)),
    }
    print(write_fixture("ito_reduction.json", payload))
    for k, v in residuals.items():
        print(f"{k},{v}")


if __name__ == "__main__":
    main()
