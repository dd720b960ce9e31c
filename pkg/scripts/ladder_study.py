"""Layer-stripping accuracy against mode ladder and expansion depth.

Synthetic data: a(x) = |eta|^2 + 1 + x^2 s (2 + |eta|^2) at tau = 0, solved by
the ODE oracle.  Prints the relative error of the fitted a_2 coefficients.

    python3 scripts/ladder_study.py [--nu 0.3] [--s 1e-2]
"""

import argparse
import time

import numpy as np

from adsdn.inverse import InversionProblem, eta_norm2, layer_strip
from adsdn.model import ModeModel
from adsdn.oracle import ode_dn
from adsdn.scatter import DNRow, DNTable


def synthetic(nu, s, etas):
    table = DNTable()
    for e in etas:
        r = ode_dn(ModeModel(nu, (e * e + 1, 0, s * (2 + e * e))))
        table.add(DNRow(0.0, float(e), r.lam, "ode_oracle", r.err))
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=0.3)
    ap.add_argument("--s", type=float, default=1e-2)
    args = ap.parse_args()
    background = lambda tau, eta: eta_norm2(eta) - tau * tau + 1  # noqa: E731
    print(f"{'ladder':>12} {'depth':>5} {'err const':>10} {'err slope':>10} {'time':>6}")
    for lo, hi in ((0.1, 3.0), (1.0, 10.0), (2.0, 20.0)):
        table = synthetic(args.nu, args.s, np.geomspace(lo, hi, 12))
        for depth in (2, 4, 6):
            t0 = time.perf_counter()
            fit = layer_strip(InversionProblem(args.nu, table, background=background, depth=depth)).fits[2]
            e0 = abs(fit[0] - 2 * args.s) / (2 * args.s)
            e1 = abs(fit[1] - args.s) / args.s
            print(f"{f'[{lo}, {hi}]':>12} {depth:>5} {e0:>10.2e} {e1:>10.2e} {time.perf_counter() - t0:>5.1f}s")


if __name__ == "__main__":
    main()
