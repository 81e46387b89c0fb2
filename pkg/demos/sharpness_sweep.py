"""Drive the cutoff parameter down and watch the remainder vanish.

The near-optimal functions ``theta_eps * f`` squeeze the Hardy ratio onto
the optimal constant while the remainder decays like a power of eps; the
fitted slope is printed against the predicted rate.

Run:  python3 demos/sharpness_sweep.py [--levels 36] [--mc 400000]
"""

import argparse

import numpy as np

from multipolar_hardy import (
    PoleConfig,
    QuadratureSpec,
    WeightSpec,
    derive_params,
    optimality_sweep,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=36)
    ap.add_argument("--mc", type=int, default=400_000)
    args = ap.parse_args()

    cfg = PoleConfig(dim=3, poles=np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    p = derive_params(cfg, 0.0)
    spec = QuadratureSpec(pole_radius=0.9, far_radius=6.0,
                          radial_levels=args.levels, mc_samples=args.mc,
                          seed=7)
    records, fit = optimality_sweep(cfg, WeightSpec.unit(), p, spec=spec)

    print(f"unit weight, N = 3, two poles; c_N_mu = {p.c_n_mu:g}")
    print(f"{'eps':>8} {'remainder':>12} {'hardy_ratio':>12} {'flux':>10} "
          f"{'truncated':>9}")
    for r in records:
        print(f"{r.eps:8.4f} {r.remainder:12.6f} {r.hardy_ratio:12.6f} "
              f"{r.flux:10.6f} {str(r.truncated):>9}")
    print(f"\nremainder ~ eps^slope: fitted {fit.slope:.4f}, "
          f"predicted {fit.predicted_slope:g}, r^2 {fit.r_squared:.5f}")
    print(f"terminal ratio {records[-1].hardy_ratio:.6f} -> c = {p.c_n_mu:g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
