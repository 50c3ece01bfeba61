"""Densities of ``mu * K_t`` for the Gaussian, Cauchy and Levy (index 1/2) kernels.

Atomic measures are handled by exact kernel sums.  For gridded
(piecewise-linear) densities each cell is integrated in closed form: with
``g(y) = g0 + B (y - x0)`` on ``[x0, x1]`` and ``s = x - y``,

    int K(x-y) g(y) dy = (g0 + B (x - x0)) * [CDF]  -  B * [P]

where ``P`` is a primitive of ``s K(s)``.  Derivatives follow from integrating
by parts, which only needs ``K``, ``K'`` and the CDF at the cell ends.

Note that for the Cauchy kernel ``mu * C_t`` coincides with the free
convolution ``mu [+] C_t``, so every Cauchy result here is also a statement
about the free Cauchy process started at ``mu``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .measures import AtomicMeasure, GriddedDensityMeasure, ProbabilityMeasure, concrete, support_hull

LEVY_UNDERFLOW = 745.0
TAIL_MASS = 1e-8


class ProcessKind(str, enum.Enum):
    CLASSICAL_GAUSSIAN = "classical_gaussian"
    CAUCHY = "cauchy"
    LEVY_HALF = "levy_half"
    FREE_SEMICIRCLE = "free_semicircle"

    @classmethod
    def parse(cls, value) -> "ProcessKind":
        if isinstance(value, cls):
            return value
        aliases = {"gaussian": cls.CLASSICAL_GAUSSIAN, "classical": cls.CLASSICAL_GAUSSIAN,
                   "levy": cls.LEVY_HALF, "free": cls.FREE_SEMICIRCLE}
        if value in aliases:
            return aliases[value]
        return cls(value)


CLASSICAL_KINDS = (ProcessKind.CLASSICAL_GAUSSIAN, ProcessKind.CAUCHY, ProcessKind.LEVY_HALF)


def _check_kind(kind) -> ProcessKind:
    kind = ProcessKind.parse(kind)
    if kind is ProcessKind.FREE_SEMICIRCLE:
        raise ValueError("free_semicircle densities are computed by unimodality.biane")
    return kind


def _check_t(t):
    if not t > 0:
        raise ValueError(f"time must be positive, got {t!r}")


def kernel(kind, t: float, u, order: int = 0):
    """Kernel density at ``u`` (order 0) or its first/second derivative in ``u``."""
    kind = _check_kind(kind)
    _check_t(t)
    u = np.asarray(u, dtype=float)
    if kind is ProcessKind.CLASSICAL_GAUSSIAN:
        phi = np.exp(-u * u / (2 * t)) / math.sqrt(2 * math.pi * t)
        if order == 0:
            return phi
        if order == 1:
            return -u / t * phi
        return (u * u - t) / (t * t) * phi
    if kind is ProcessKind.CAUCHY:
        q = u * u + t * t
        if order == 0:
            return t / (math.pi * q)
        if order == 1:
            return -2 * t * u / (math.pi * q * q)
        return t * (6 * u * u - 2 * t * t) / (math.pi * q ** 3)
    # Levy: (t / sqrt(2 pi)) exp(-t^2 / 2u) u^{-3/2} on u > 0
    pos = u > 0
    expo = t * t / (2 * np.where(pos, u, 1.0))
    live = pos & (expo <= LEVY_UNDERFLOW)
    # masked entries get a harmless placeholder so no overflow is computed there
    us = np.where(live, u, 1.0)
    base = np.where(live, t / math.sqrt(2 * math.pi) * np.exp(-np.where(live, expo, 0.0)), 0.0)
    if order == 0:
        factor = us ** -1.5
    elif order == 1:
        factor = (t * t - 3 * us) / (2 * us ** 3.5)
    else:
        factor = (15 * us * us - 10 * t * t * us + t ** 4) / (4 * us ** 5.5)
    return np.where(live, base * factor, 0.0)


def kernel_cdf(kind, t: float, s):
    kind = _check_kind(kind)
    s = np.asarray(s, dtype=float)
    if kind is ProcessKind.CLASSICAL_GAUSSIAN:
        return special.ndtr(s / math.sqrt(t))
    if kind is ProcessKind.CAUCHY:
        return 0.5 + np.arctan(s / t) / math.pi
    pos = s > 0
    ss = np.where(pos, s, 1.0)
    return np.where(pos, special.erfc(t / np.sqrt(2 * ss)), 0.0)


def kernel_cdf_diff(kind, t: float, hi, lo):
    """``kernel_cdf(hi) - kernel_cdf(lo)`` without cancellation in the right tail."""
    kind = _check_kind(kind)
    hi, lo = np.broadcast_arrays(np.asarray(hi, dtype=float), np.asarray(lo, dtype=float))
    if kind is ProcessKind.CLASSICAL_GAUSSIAN:
        r = math.sqrt(t)
        right = lo > 0
        return np.where(right, special.ndtr(-lo / r) - special.ndtr(-hi / r), special.ndtr(hi / r) - special.ndtr(lo / r))
    if kind is ProcessKind.CAUCHY:
        a, b = hi / t, lo / t
        # arctan a - arctan b = arctan((a - b) / (1 + ab)) when ab > -1
        same = a * b > -1
        den = np.where(same, 1 + a * b, 1.0)
        return np.where(same, np.arctan((a - b) / den), np.arctan(a) - np.arctan(b)) / math.pi
    pos_hi, pos_lo = hi > 0, lo > 0
    a_hi = t / np.sqrt(2 * np.where(pos_hi, hi, 1.0))
    a_lo = t / np.sqrt(2 * np.where(pos_lo, lo, 1.0))
    both = special.erf(a_lo) - special.erf(a_hi)
    return np.where(pos_lo, both, np.where(pos_hi, special.erfc(a_hi), 0.0))


def _first_moment_primitive(kind, t, s):
    """A primitive of ``s * K(s)``."""
    if kind is ProcessKind.CLASSICAL_GAUSSIAN:
        return -t * kernel(kind, t, s)
    if kind is ProcessKind.CAUCHY:
        return t / (2 * math.pi) * np.log(s * s + t * t)
    pos = s > 0
    ss = np.where(pos, s, 1.0)
    expo = np.minimum(t * t / (2 * ss), 800.0)
    val = t * np.sqrt(2 * ss / math.pi) * np.exp(-expo) - t * t * special.erfc(t / np.sqrt(2 * ss))
    return np.where(pos, val, 0.0)


@dataclass(frozen=True)
class ConvolvedDensity:
    """The law ``mu * K_t`` for a classical kernel."""

    mu: ProbabilityMeasure
    kind: ProcessKind
    t: float

    def __post_init__(self):
        object.__setattr__(self, "kind", _check_kind(self.kind))
        _check_t(self.t)

    def scale(self) -> float:
        """Natural spread of the kernel at time t."""
        return kernel_scale(self.kind, self.t)

    def __call__(self, x):
        return density(self, x)


def kernel_scale(kind, t: float) -> float:
    kind = ProcessKind.parse(kind)
    if kind is ProcessKind.CLASSICAL_GAUSSIAN:
        return math.sqrt(t)
    if kind is ProcessKind.CAUCHY:
        return t
    if kind is ProcessKind.LEVY_HALF:
        return t * t
    return 2 * math.sqrt(t)


def _atomic_eval(m: AtomicMeasure, kind, t, x, order):
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    out = np.empty(flat.size)
    # chunk to bound memory for long grids x many atoms
    step = max(1, 2_000_000 // m.atoms.size)
    for i in range(0, flat.size, step):
        diff = flat[i:i + step, None] - m.atoms[None, :]
        out[i:i + step] = kernel(kind, t, diff, order) @ m.weights
    return out.reshape(x.shape)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
FAR_CELL_WIDTHS = 4.0


def _gridded_eval(m: GriddedDensityMeasure, kind, t, x, order):
    """Cells near ``x`` in closed form; distant cells by 15-point Gauss-Legendre.

    The closed form subtracts two terms that grow with the distance to the
    cell, so it is only used within a few cell widths.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    g, v = m.grid, m.values
    keep = (v[:-1] > 0) | (v[1:] > 0)
    x0, x1 = g[:-1][keep], g[1:][keep]
    g0, g1 = v[:-1][keep], v[1:][keep]
    width = x1 - x0
    slope = (g1 - g0) / width
    mid, half = (x0 + x1) / 2, width / 2
    y_nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    g_nodes = (g0[:, None] + slope[:, None] * (y_nodes - x0[:, None])) * (half[:, None] * _GL_WEIGHTS[None, :])
    out = np.empty(flat.size)
    step = max(1, 200_000 // (x0.size * 16))
    for i in range(0, flat.size, step):
        xx = flat[i:i + step, None]
        s_hi, s_lo = xx - x0, xx - x1
        if order == 0:
            m0 = kernel_cdf_diff(kind, t, s_hi, s_lo)
            m1 = _first_moment_primitive(kind, t, s_hi) - _first_moment_primitive(kind, t, s_lo)
            val = (g0 + slope * (xx - x0)) * m0 - slope * m1
        elif order == 1:
            m0 = kernel_cdf_diff(kind, t, s_hi, s_lo)
            val = kernel(kind, t, s_hi) * g0 - kernel(kind, t, s_lo) * g1 + slope * m0
        else:
            val = (kernel(kind, t, s_hi, 1) * g0 - kernel(kind, t, s_lo, 1) * g1
                   + slope * (kernel(kind, t, s_hi) - kernel(kind, t, s_lo)))
        dist = np.maximum(np.maximum(x0 - xx, xx - x1), 0.0)
        far = dist > FAR_CELL_WIDTHS * width
        if far.any():
            rows, cols = np.nonzero(far)
            kv = kernel(kind, t, xx[rows, 0][:, None] - y_nodes[cols], order)
            val[rows, cols] = np.sum(kv * g_nodes[cols], axis=1)
        out[i:i + step] = val.sum(axis=1)
    return out.reshape(x.shape)


def _evaluate(cd: ConvolvedDensity, x, order):
    m = concrete(cd.mu)
    if isinstance(m, AtomicMeasure):
        return _atomic_eval(m, cd.kind, cd.t, x, order)
    return _gridded_eval(m, cd.kind, cd.t, x, order)


def density(cd: ConvolvedDensity, x):
    """Density of ``mu * K_t`` at ``x`` (scalar or array)."""
    out = np.maximum(_evaluate(cd, x, 0), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def density_derivative(cd: ConvolvedDensity, x, order: int = 1):
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    out = _evaluate(cd, x, order)
    return float(out) if np.ndim(out) == 0 else out


def tail_window(cd: ConvolvedDensity, tail: float = TAIL_MASS) -> tuple[float, float]:
    """Window outside which the kernel puts less than ``tail`` mass."""
    lo, hi = support_hull(cd.mu)
    t = cd.t
    if cd.kind is ProcessKind.CLASSICAL_GAUSSIAN:
        w = math.sqrt(2 * t * math.log(1 / tail))
        return lo - w, hi + w
    if cd.kind is ProcessKind.CAUCHY:
        w = min(t * math.tan(math.pi * (0.5 - tail / 2)), 1e8 * max(t, 1.0))
        return lo - w, hi + w
    # Levy: upper quantile 1 - tail of L_t
    q = t * t / (2 * special.erfinv(tail) ** 2)
    return lo, hi + q


def mass_grid(cd: ConvolvedDensity, n_core: int = 4001, ratio: float = 1.002) -> np.ndarray:
    """Grid for quadrature checks: dense around the support, geometric in the tails."""
    lo, hi = support_hull(cd.mu)
    wlo, whi = tail_window(cd)
    sc = cd.scale()
    core_lo = lo - (0.0 if cd.kind is ProcessKind.LEVY_HALF else 10 * sc)
    core_hi = hi + 10 * sc
    parts = [np.linspace(core_lo, core_hi, n_core)]
    m = concrete(cd.mu)
    centers = m.atoms if isinstance(m, AtomicMeasure) else m.grid
    if centers.size <= 64:
        span = np.linspace(-8, 8 + (20 if cd.kind is ProcessKind.LEVY_HALF else 0), 801) * sc
        parts.extend(c + span for c in centers)
    else:
        parts.append(centers)
    step0 = (core_hi - core_lo) / (n_core - 1)
    if whi > core_hi:
        k = math.ceil(math.log1p((whi - core_hi) * (ratio - 1) / step0) / math.log(ratio))
        parts.append(core_hi + step0 * (ratio ** np.arange(1, k + 1) - 1) / (ratio - 1))
        parts.append([whi])
    if wlo < core_lo:
        k = math.ceil(math.log1p((core_lo - wlo) * (ratio - 1) / step0) / math.log(ratio))
        parts.append(core_lo - step0 * (ratio ** np.arange(1, k + 1) - 1) / (ratio - 1))
        parts.append([wlo])
    grid = np.unique(np.concatenate([np.ravel(p) for p in parts]))
    return grid[(grid >= wlo) & (grid <= whi)]


def window_mass(cd: ConvolvedDensity) -> float:
    """Trapezoid mass of the density over :func:`tail_window`."""
    x = mass_grid(cd)
    return float(np.trapezoid(density(cd, x), x))
