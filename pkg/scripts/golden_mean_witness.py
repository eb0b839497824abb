"""Golden-mean shift: empirical measures against the Perron cylinder law.

mu(f^-1[0]) / mu([0]) stays at 2/lambda instead of 1, so the limits are not
shift invariant.
"""
import argparse

from epsn.measures import Cylinder, measure_sequence, partition_masses, perron, preimage_ratio
from epsn.systems import Sft


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--n", type=int, nargs="+", default=list(range(10, 23, 2)))
    args = ap.parse_args()
    g = Sft.golden_mean()
    pd = perron(g.M)
    print(f"lambda={pd.lam:.12f} 2/lambda={2 / pd.lam:.12f}")
    for m in measure_sequence(g, 2.0 ** -args.k, args.n):
        m0, m1 = partition_masses(m, [Cylinder((0,)), Cylinder((1,))])
        print(f"n={m.n:3d} C={m.C:7d} f^-1[0]/[0]={preimage_ratio(m):.6f} [0]/[1]={m0 / m1:.6f}")


if __name__ == "__main__":
    cli()
