"""Sufficient unimodality times and their numerical verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import modality
from .kernels import ProcessKind
from .measures import AtomicMeasure, abs_moment, diameter, gaussian_tail_functional

LEVY_CONST = 22.5 ** 0.25
TIME_FACTORS = (1.0, 1.5, 2.0, 4.0, 8.0, 16.0)


class Theorem(str, Enum):
    FREE = "free_4D2"
    CLASSICAL = "classical_gaussian_tail"
    CAUCHY = "cauchy_third_moment"
    LEVY = "levy_diameter"

    @property
    def process(self) -> ProcessKind:
        return {Theorem.FREE: ProcessKind.FREE_SEMICIRCLE,
                Theorem.CLASSICAL: ProcessKind.CLASSICAL_GAUSSIAN,
                Theorem.CAUCHY: ProcessKind.CAUCHY,
                Theorem.LEVY: ProcessKind.LEVY_HALF}[self]


class HypothesisError(ValueError):
    pass


def _nonneg(name, x):
    x = float(x)
    if not x >= 0 or not math.isfinite(x):
        raise ValueError(f"{name} must be a finite nonnegative number, got {x}")
    return x


def free_bound(D: float) -> float:
    return 4.0 * _nonneg("D", D) ** 2


def classical_bound(eps: float, alpha: float) -> float:
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not alpha >= 1:
        raise ValueError(f"alpha = {alpha} < 1 is impossible for a probability measure")
    return 36.0 * math.log(2.0 * alpha) / eps


def cauchy_bound(beta: float) -> float:
    return 20.0 * _nonneg("beta", beta) ** (1.0 / 3.0)


def levy_bound(D: float) -> float:
    return LEVY_CONST * math.sqrt(_nonneg("D", D))


@dataclass
class ThresholdReport:
    theorem: Theorem
    inputs: dict
    bound: float
    verified_at: list = field(default_factory=list)

    @property
    def falsified(self) -> bool:
        return any(t >= self.bound and not ok for t, ok in self.verified_at)

    def as_dict(self) -> dict:
        return {"theorem": self.theorem.value, "inputs": dict(self.inputs), "bound": self.bound,
                "verified_at": [[float(t), bool(ok)] for t, ok in self.verified_at],
                "falsified": self.falsified}


def _functional(theorem: Theorem, mu, eps: float) -> dict:
    if theorem is Theorem.CLASSICAL:
        return {"eps": eps, "alpha": gaussian_tail_functional(mu, eps)}
    if theorem is Theorem.CAUCHY:
        return {"beta": abs_moment(mu, 3)}
    return {"D": diameter(mu)}


def theorem_bound(mu, theorem, eps: float = 1.0) -> tuple[float, dict]:
    """Bound for ``mu`` together with the functional values it was computed from."""
    theorem = Theorem(theorem)
    inputs = _functional(theorem, mu, eps)
    if not all(math.isfinite(v) for v in inputs.values()):
        raise HypothesisError(f"{theorem.value}: functional is infinite for this measure")
    if theorem is Theorem.FREE:
        return free_bound(inputs["D"]), inputs
    if theorem is Theorem.CLASSICAL:
        return classical_bound(eps, inputs["alpha"]), inputs
    if theorem is Theorem.CAUCHY:
        return cauchy_bound(inputs["beta"]), inputs
    return levy_bound(inputs["D"]), inputs


def verification_times(bound: float, n_times: int) -> list[float]:
    """Geometric sample above the bound; a zero bound (point mass) is sampled from t = 1."""
    if n_times < 1:
        raise ValueError("n_times must be positive")
    base = bound if bound > 0 else 1.0
    factors = list(TIME_FACTORS) + [TIME_FACTORS[-1] * 2 ** k for k in range(1, n_times)]
    return [base * f for f in factors[:n_times]]


def verify_threshold(mu, theorem, n_times: int = 4, eps: float = 1.0, times=None) -> ThresholdReport:
    """Compute the bound for ``mu`` and check unimodality at times at or above it."""
    theorem = Theorem(theorem)
    bound, inputs = theorem_bound(mu, theorem, eps)
    times = sorted(times) if times is not None else verification_times(bound, n_times)
    checks = [(float(t), modality.is_unimodal(mu, theorem.process, t)) for t in times]
    return ThresholdReport(theorem=theorem, inputs=inputs, bound=bound, verified_at=checks)


def random_atomic(rng: np.random.Generator, n_min: int = 3, n_max: int = 6):
    """Random atomic measure: uniform atoms in [0, 1], Dirichlet(1,...,1) weights."""
    n = int(rng.integers(n_min, n_max + 1))
    atoms = rng.uniform(0.0, 1.0, n)
    w = rng.dirichlet(np.ones(n))
    return AtomicMeasure.from_unnormalized(atoms, w)


@dataclass
class GapProbe:
    max_ratio: float
    window: tuple
    ratios: list
    critical: list


def constant_gap_probe(family, t_grid=None, tol: float = 1e-3) -> GapProbe:
    """Observed ``t*/D^2`` over a family of compactly supported measures (free process).

    ``t_grid`` optionally gives ``(t_min, t_max)`` in units of ``D^2``; the
    default ``(1e-3, 4.5)`` brackets every possible ratio by the ``4 D^2`` bound.
    """
    lo_f, hi_f = t_grid if t_grid is not None else (1e-3, 4.5)
    ratios, crit = [], []
    for mu in family:
        D = diameter(mu)
        if not D > 0:
            raise HypothesisError("constant_gap_probe needs measures with positive diameter")
        res = modality.critical_time(mu, ProcessKind.FREE_SEMICIRCLE, (lo_f * D * D, hi_f * D * D),
                                     tol=tol * D * D)
        crit.append(res)
        ratios.append(res.t_star / (D * D))
    return GapProbe(max_ratio=max(ratios), window=(2.0, 4.0), ratios=ratios, critical=crit)
