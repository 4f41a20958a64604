#!/usr/bin/env python3
"""Scan the golden-rule prefactor as the target twist moves away from the
source sector.

The prefactor is |2c d/dz log(L1/L2)|^2 |S|^2 at z = 0, where L1 is the
diagonal-sector eigenvalue over the v roots and L2 the general-twist
eigenvalue over the u roots.  When the coefficient sets and root sets both
coincide the log-derivative cancels and the rate is exactly zero; this scan
starts at that point and widens the gap, printing the rate as it switches
on.  The overlap factor is normalized to 1 throughout so the derivative
part is isolated (|S|^2 just rescales every line).
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bethe_overlap.chain import DegenerateTwist, SpinChainModel, TwistGeneral
from bethe_overlap.overlap import EigenvalueZeroAtOrigin, rate_prefactor
from bethe_overlap.scalars import ParamSet, Scalar

E = Scalar.exact


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=9)
    args = ap.parse_args()

    c = E(1)
    # inhomogeneities keep lambda2 away from zero at the origin; on the
    # homogeneous chain it has a double zero there and the whole second
    # eigenvalue term drops out of the z=0 log-derivative
    m = SpinChainModel(2, c, (E("1/3"), E("-2/5")))
    alpha = E("5/3")
    rho = E(2)
    v = E("-1/2")
    us = ParamSet([v])
    vs = ParamSet([v])

    print("eps        rate (exact rational)")
    for j in range(args.steps):
        eps = E(j) / E(4)
        # kt - rho1 = 1 + eps and k - rho2 = alpha: the first coefficient
        # pair drifts off the diagonal one as eps grows
        try:
            tw = TwistGeneral.from_shifts(E(1) + eps + rho, alpha - rho,
                                          E(1), rho, -rho)
        except DegenerateTwist:
            print(f"{str(eps.to_json()):<10} twist degenerate, skipped")
            continue
        try:
            r = rate_prefactor(m, alpha, tw, vs, us, E(1))
        except EigenvalueZeroAtOrigin:
            print(f"{str(eps.to_json()):<10} eigenvalue vanishes at origin")
            continue
        print(f"{str(eps.to_json()):<10} {r.to_json()}")


if __name__ == "__main__":
    main()
