#!/usr/bin/env python3
"""Initial laws that keep several bumps for a long time.

Atoms at a, a^2, a^3, ... with rapidly shrinking weights never merge under
any of the four processes when the sequence is infinite.  A truncation to N
atoms is eventually unimodal, so the witnesses below are claims about the
listed times only.  The last part shows why the base matters for the heavy
tailed kernels, then runs the dilated two-point search for a free law whose
level set also cuts a Cauchy convolution at three or more points.
"""

from unimodality.counterexamples import (DEFAULTS, NoWitnessError, build_cauchy_counterexample,
                                         build_levy_counterexample, default_spec,
                                         strong_unimodality_witness_search, witness_non_unimodal)
from unimodality.kernels import ProcessKind

TIMES = (0.5, 1.0, 2.0, 5.0, 10.0)


def describe(w):
    ev = w.evidence
    if "components" in ev:
        return f"{ev['components']} support pieces"
    if "modes" in ev:
        return f"{len(ev['modes'])} modes"
    return "rising after a descent at x={rising_at:.3g}".format(**ev["derivative_sign"])


def witness_table(name, mu, process):
    print(f"\n{name}")
    for t in TIMES:
        try:
            w = witness_non_unimodal(mu, process, t)
            print(f"  t={t:5.1f}: {describe(w):28s} margin {w.margin:.2e}")
        except NoWitnessError:
            print(f"  t={t:5.1f}: no witness (the truncation has merged)")


def main():
    for process in DEFAULTS:
        spec = default_spec(process)
        mu = spec.build()
        witness_table(f"{process.value}: a={spec.a:g}, N={spec.n_atoms}, atoms up to {mu.atoms[-1]:.3g}", mu, process)

    # with a small base the neighbours' tails swamp each bump once t is a few units
    witness_table("cauchy with a=2, N=8", build_cauchy_counterexample(2.0, 8), ProcessKind.CAUCHY)
    witness_table("levy with a=3, N=8", build_levy_counterexample(3.0, 8), ProcessKind.LEVY_HALF)

    w = strong_unimodality_witness_search([0.5, 1.0, 2.0], [0.5, 1.0, 2.0, 4.0, 8.0])
    print(f"\nfirst dilated two-point witness: s={w.s}, t={w.t}, {w.report.mode_count} free modes;"
          f" the level {w.level:.4f} is crossed {w.cauchy_crossings} times by the Cauchy"
          f" convolution at scale {w.cauchy_scale:.4f}")


if __name__ == "__main__":
    main()
