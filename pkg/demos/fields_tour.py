"""Walk the multipolar potential and its companions along the pole axis.

Prints V, the weight, and the perturbation W on a line through both poles
of a two-pole configuration, then demonstrates the near-pole law
``|x - a|^2 V -> n - 1`` numerically.

Run:  python3 demos/fields_tour.py [--gamma 0.5] [--k-mu -0.6]
"""

import argparse

import numpy as np

from multipolar_hardy import (
    PoleConfig,
    WeightSpec,
    derive_params,
    potential_v,
    potential_w,
    weight_value,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=0.5,
                    help="power-weight exponent (0 disables the weight)")
    ap.add_argument("--k-mu", type=float, default=-0.6,
                    help="K_mu candidate for the perturbation W")
    args = ap.parse_args()

    cfg = PoleConfig(dim=3, poles=np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))
    w = WeightSpec.unit() if args.gamma == 0 else WeightSpec.polyexp(args.gamma)
    p = derive_params(cfg, args.k_mu)

    print(f"poles at 0 and 2 e1; weight {w.kind}, beta = {p.beta:g}, "
          f"c_N_mu = {p.c_n_mu:g}")
    print(f"{'x1':>8} {'V':>12} {'mu':>12} {'W':>12}")
    for x1 in (-1.0, -0.5, 0.25, 0.5, 1.0, 1.5, 1.75, 2.5, 3.0, 4.0):
        x = np.array([[x1, 0.3, 0.0]])
        print(f"{x1:8.2f} {potential_v(x, cfg)[0]:12.5f} "
              f"{weight_value(x, cfg, w)[0]:12.5f} "
              f"{potential_w(x, cfg, w, p)[0]:12.5f}")

    print("\nnear-pole law |x - a_1|^2 V -> n - 1 = 1:")
    for t in (1e-1, 1e-2, 1e-3, 1e-4):
        x = cfg.poles[0] + t * np.array([0.6, 0.8, 0.0])
        print(f"  t = {t:7.0e}:  t^2 V = {t * t * float(potential_v(x, cfg)):.6f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
