"""Truncated never-unimodal initial laws and numerical non-unimodality witnesses.

Each construction places atoms at ``a**n`` with weights decaying fast enough
that every atom keeps its own bump.  The infinite measures are never unimodal;
a truncation to ``N`` atoms has compact support and becomes unimodal eventually,
so a witness is only ever claimed at the times actually checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import biane, modality
from .kernels import ConvolvedDensity, ProcessKind, density, density_derivative, kernel
from .measures import AtomicMeasure, bernoulli, concrete

EVAL_TOL = 1e-12
MARGIN_FACTOR = 10.0
TINY = np.finfo(float).tiny

# Cauchy and Levy defaults need a larger base than 2 and 3: the weight of atom
# k relative to the tails of its neighbours only depends on k, so the base must
# grow for the bumps to survive until t = 10 (see the notes in the README).
DEFAULTS = {
    ProcessKind.FREE_SEMICIRCLE: {"a": 2.0, "n_atoms": 8, "f_tag": "one"},
    ProcessKind.CLASSICAL_GAUSSIAN: {"a": 2.0, "n_atoms": 6, "delta": 1e-4},
    ProcessKind.CAUCHY: {"a": 16.0, "n_atoms": 8, "r": 1.0},
    ProcessKind.LEVY_HALF: {"a": 50.0, "n_atoms": 6},
}


class NoWitnessError(RuntimeError):
    pass


@dataclass
class CounterexampleSpec:
    process: ProcessKind
    a: float
    n_atoms: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.process = ProcessKind.parse(self.process)
        if self.n_atoms < 4:
            raise ValueError("n_atoms must be at least 4")
        if self.process is ProcessKind.LEVY_HALF:
            if not self.a > 2:
                raise ValueError("a must exceed 2 for the Levy construction")
        elif not self.a >= 2:
            raise ValueError("a must be at least 2")

    def build(self) -> AtomicMeasure:
        if self.process is ProcessKind.FREE_SEMICIRCLE:
            return build_free_counterexample(self.a, self.n_atoms, self.extra.get("f_tag", "one"))
        if self.process is ProcessKind.CLASSICAL_GAUSSIAN:
            return build_classical_counterexample(self.a, self.n_atoms, self.extra.get("delta", 1e-4))
        if self.process is ProcessKind.CAUCHY:
            return build_cauchy_counterexample(self.a, self.n_atoms, self.extra.get("r", 1.0))
        return build_levy_counterexample(self.a, self.n_atoms)


def default_spec(process) -> CounterexampleSpec:
    process = ProcessKind.parse(process)
    d = dict(DEFAULTS[process])
    return CounterexampleSpec(process, d.pop("a"), d.pop("n_atoms"), d)


def _check(a, N, strict=False):
    if N < 4:
        raise ValueError("N must be at least 4")
    if strict and not a > 2:
        raise ValueError("a must exceed 2")
    if not a >= 2:
        raise ValueError("a must be at least 2")


def _normalize_log(logw: np.ndarray) -> np.ndarray:
    """Normalize weights given by logs; entries that underflow are clamped to ``TINY``."""
    w = np.exp(logw - logw.max())
    w = np.maximum(w, TINY)
    return w / w.sum()


def _atoms(a, N):
    return float(a) ** np.arange(1, N + 1, dtype=float)


def build_free_counterexample(a: float = 2.0, N: int = 8, f_tag: str = "one") -> AtomicMeasure:
    """Atoms ``a**n``, weights proportional to ``1/(n^2 max(f(a_n), 1))``."""
    _check(a, N)
    atoms = _atoms(a, N)
    n = np.arange(1, N + 1, dtype=float)
    if f_tag == "one":
        logf = np.zeros(N)
    elif f_tag == "exp_square":
        logf = atoms ** 2  # log of e^{x^2}, always >= 0 here
    else:
        raise ValueError(f"unknown f_tag {f_tag!r}")
    logw = -2 * np.log(n) - np.maximum(logf, 0.0)
    return AtomicMeasure(atoms, _normalize_log(logw))


def gap_offsets(atoms: np.ndarray) -> np.ndarray:
    """``b_k = min_{n != k} |a_k - a_n - 1|`` over the truncated index set."""
    diff = np.abs(atoms[:, None] - atoms[None, :] - 1.0)
    np.fill_diagonal(diff, np.inf)
    return diff.min(axis=1)


def build_classical_counterexample(a: float = 2.0, N: int = 6, delta: float = 1e-4) -> AtomicMeasure:
    """Atoms ``a**k``, weights proportional to ``exp(-delta b_k^2 / k)``."""
    _check(a, N)
    if not delta > 0:
        raise ValueError("delta must be positive")
    atoms = _atoms(a, N)
    k = np.arange(1, N + 1, dtype=float)
    logw = -delta * gap_offsets(atoms) ** 2 / k
    return AtomicMeasure(atoms, _normalize_log(logw))


def build_cauchy_counterexample(a: float = 16.0, N: int = 8, r: float = 1.0) -> AtomicMeasure:
    """Atoms ``a**n``, weights proportional to ``n^r a^(-3n)``."""
    _check(a, N)
    if not r > 0:
        raise ValueError("r must be positive")
    n = np.arange(1, N + 1, dtype=float)
    logw = r * np.log(n) - 3 * n * math.log(a)
    return AtomicMeasure(_atoms(a, N), _normalize_log(logw))


def build_levy_counterexample(a: float = 50.0, N: int = 6) -> AtomicMeasure:
    """Atoms ``a**k``, weights proportional to ``k a^(-5k/2)``."""
    _check(a, N, strict=True)
    k = np.arange(1, N + 1, dtype=float)
    logw = np.log(k) - 2.5 * k * math.log(a)
    return AtomicMeasure(_atoms(a, N), _normalize_log(logw))


# -- witnesses ----------------------------------------------------------------

@dataclass
class NonUnimodalWitness:
    t: float
    evidence: dict
    margin: float
    process: str = ""

    def as_dict(self) -> dict:
        return {"t": self.t, "process": self.process, "evidence": _jsonable(self.evidence),
                "margin": self.margin}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def probe_points(mu: AtomicMeasure, kind: ProcessKind, t: float | None = None) -> np.ndarray:
    """Points where the constructions certify a derivative sign.

    For the Levy kernel the own-atom term at ``a_k + 1`` has the sign of
    ``t^2 - 3``, so ``a_k + t^2/6`` (rising side of each bump) is added when
    ``t`` is given.
    """
    atoms = mu.atoms
    if kind is ProcessKind.LEVY_HALF:
        if t is None:
            return atoms + 1.0
        return np.sort(np.concatenate([atoms + 1.0, atoms + t * t / 6.0]))
    if kind is ProcessKind.FREE_SEMICIRCLE:
        return 0.5 * (atoms[:-1] + atoms[1:])
    return atoms - 1.0


def relative_derivative(cd: ConvolvedDensity, x) -> np.ndarray:
    """``f'(x)`` divided by the sum of absolute contributions, a sign-certainty measure."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = concrete(cd.mu)
    d = density_derivative(cd, x, 1)
    scale = np.abs(kernel(cd.kind, cd.t, x[:, None] - m.atoms[None, :], order=1)) @ m.weights
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(scale > 0, d / scale, 0.0)


def _free_witness(mu, t) -> NonUnimodalWitness | None:
    state = biane.BianeState(mu, t)
    iv = state.intervals
    if len(iv) >= 2:
        # relative depth of X below 1/t inside each gap; the smallest is the margin
        depths = []
        for (_, r), (l, _) in zip(iv[:-1], iv[1:]):
            u = np.linspace(r, l, 67)[1:-1]
            depths.append(1.0 - t * float(np.min(biane.x_functional(state.mu, u))))
        margin = min(depths)
        return NonUnimodalWitness(t, {"components": len(iv), "intervals": iv}, margin)
    rep = modality.count_modes_free(mu, t, state=state)
    if rep.mode_count >= 2:
        return NonUnimodalWitness(t, {"modes": rep.mode_locations}, _mode_margin(rep))
    return None


def _mode_margin(rep) -> float:
    """Smallest relative prominence among the detected modes."""
    return float(min(rep.diagnostics["prominence"]))


def witness_non_unimodal(mu, process, t: float) -> NonUnimodalWitness:
    """Strongest numerical evidence that the law at time ``t`` is not unimodal.

    Preference order: several support components, several modes from a full
    derivative scan, a certified positive derivative at a probe point lying to
    the right of a certified descent.
    """
    kind = ProcessKind.parse(process)
    mu = concrete(mu)
    if not isinstance(mu, AtomicMeasure):
        raise TypeError("witness_non_unimodal expects an atomic measure")
    if not t > 0:
        raise ValueError("t must be positive")
    need = MARGIN_FACTOR * EVAL_TOL
    if kind is ProcessKind.FREE_SEMICIRCLE:
        w = _free_witness(mu, t)
        if w is not None and w.margin > need:
            w.process = kind.value
            return w
        raise NoWitnessError(f"no non-unimodality witness for the free process at t={t}")
    cd = ConvolvedDensity(mu, kind, t)
    probes = probe_points(mu, kind, t)
    rep = modality.count_modes_derivative(cd, probes=probes)
    if rep.mode_count >= 2:
        margin = _mode_margin(rep)
        if margin > need:
            return NonUnimodalWitness(t, {"modes": rep.mode_locations}, margin, kind.value)
    rel = relative_derivative(cd, probes)
    for k in np.flatnonzero(rel > need):
        # a certified descent somewhere to the left of the rising probe
        left = np.linspace(probes[k] - 50 * cd.scale() - (probes[k] - mu.atoms[0]), probes[k], 2049)[:-1]
        rl = relative_derivative(cd, left)
        if np.any(rl < -need):
            j = int(np.argmin(rl))
            return NonUnimodalWitness(
                t, {"derivative_sign": {"rising_at": float(probes[k]), "descent_at": float(left[j])}},
                float(min(rel[k], -rl[j])), kind.value)
    raise NoWitnessError(f"no non-unimodality witness for {kind.value} at t={t}")


# -- free strong unimodality --------------------------------------------------

@dataclass
class StrongUnimodalityWitness:
    s: float
    t: float
    report: modality.ModalityReport
    level: float
    cauchy_scale: float
    cauchy_crossings: int

    def as_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "report": self.report.as_dict(), "level": self.level,
                "cauchy_scale": self.cauchy_scale, "cauchy_crossings": self.cauchy_crossings}


def check_scale(s: float, t: float) -> StrongUnimodalityWitness | None:
    """Is ``B_s [+] S(0,t)`` non-unimodal, with the matching Cauchy level set having 3+ points?

    A level ``a`` strictly between the two highest peaks and the valley between
    them is crossed at least 3 times by ``p_t``.  Through ``v_t(u) = R`` iff
    ``xi_R(u) = 1/t`` this is the same as ``B_s * C_R`` crossing ``a`` at least
    3 times when ``R = pi a t``.
    """
    mu = bernoulli(s)
    rep = modality.count_modes_free(mu, t)
    if rep.unimodal:
        return None
    prof = biane.free_density_profile(mu, t, 2049)
    if rep.mode_count >= 2:
        peaks = rep.mode_locations
        heights = np.atleast_1d(biane.free_density(mu, t, np.array(peaks)))
        i, j = sorted(np.argsort(heights)[-2:])
        inside = (prof.x >= peaks[i]) & (prof.x <= peaks[j])
        valley = float(prof.p[inside].min())
        top = float(min(heights[i], heights[j]))
    else:
        valley, top = 0.0, float(prof.p.max())
    level = 0.5 * (valley + top)
    R = math.pi * level * t
    crossings = modality.level_crossings(mu, ProcessKind.CAUCHY, R, level)
    if crossings < 3:
        return None
    return StrongUnimodalityWitness(s, t, rep, level, R, crossings)


def strong_unimodality_witness_search(scale_grid, t_grid) -> StrongUnimodalityWitness | None:
    """First ``(s, t)`` in grid order for which ``check_scale`` succeeds."""
    for s in scale_grid:
        for t in t_grid:
            w = check_scale(float(s), float(t))
            if w is not None:
                return w
    return None
