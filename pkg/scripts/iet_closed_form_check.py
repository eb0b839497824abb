"""Compare exact MIS complexity of a three-interval exchange with 2(n-1)+1."""
import argparse

from epsn.complexity import complexity_curve, iet_complexity_closed_form, iet_n0
from epsn.systems import Iet, candidates

A = (0.0, 0.29289321881345254, 0.6180339887498949, 1.0)
C = (0.7071067811865475, 0.08907279243665256, -0.6180339887498949)


def cli():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--resolution", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=30, help="number of n values starting at n0")
    args = ap.parse_args()
    iet = Iet(A, C)
    n0 = iet_n0(iet, args.eps)
    ns = range(n0, n0 + args.steps)
    curve = complexity_curve(iet, args.eps, ns, candidates(iet, args.resolution, ns[-1], 0))
    bad = 0
    for n, c, method in zip(curve.n, curve.C, curve.method):
        want = iet_complexity_closed_form(iet.m, n)
        bad += c != want
        print(f"n={n:4d} C={c:5d} closed_form={want:5d} {method}")
    print(f"n0={n0} mismatches={bad}")
    return int(bad > 0)


if __name__ == "__main__":
    raise SystemExit(cli())
