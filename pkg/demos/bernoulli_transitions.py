#!/usr/bin/env python3
"""When does a symmetric two-point law become unimodal under each process?

Start from half a unit mass at -1 and half at +1, let it evolve under the
free semicircle flow and the three classical kernels, and watch the number
of modes collapse to one.  The script then bisects for the exact switch time.
"""

import math

import numpy as np

from unimodality import bernoulli, classify, critical_time
from unimodality.kernels import ProcessKind

MU = bernoulli(1.0)
PROCESSES = [
    (ProcessKind.FREE_SEMICIRCLE, (0.5, 16.0), 4.0),
    (ProcessKind.CLASSICAL_GAUSSIAN, (0.1, 4.0), 1.0),
    (ProcessKind.CAUCHY, (0.5, 4.0), math.sqrt(3)),
]


def sweep(kind, times):
    print(f"\n{kind.value}")
    print(f"{'t':>8}  modes  pieces  unimodal  locations")
    for t in times:
        rep = classify(MU, kind, t)
        locs = ", ".join(f"{m:+.4f}" for m in rep.mode_locations)
        print(f"{t:8.3f}  {rep.mode_count:5d}  {rep.support_components:6d}  {str(rep.unimodal):>8}  {locs}")


def main():
    times = np.geomspace(0.1, 10, 9)
    for kind, _, _ in PROCESSES:
        sweep(kind, times)
    # the Levy kernel is one-sided, so the two bumps merge differently
    sweep(ProcessKind.LEVY_HALF, times)

    print("\nbisection for the switch time (tolerance 1e-3)")
    for kind, bracket, exact in PROCESSES:
        res = critical_time(MU, kind, bracket, tol=1e-3)
        lo, hi = res.bracket
        print(f"  {kind.value:20s} t* = {res.t_star:.5f}  in [{lo:.5f}, {hi:.5f}]  closed form {exact:.5f}")


if __name__ == "__main__":
    main()
