"""Mode counting, level crossings and critical unimodality times.

A density is declared unimodal when it has exactly one mode and a connected
support.  Modes found from sampled data must rise and fall strictly, with a
prominence of at least ``PROMINENCE`` times their own height; this removes
floating-point ripples without hiding small but genuine far-away modes.
Plateaus count as a single candidate.  Scans of the exact derivative use the
smaller ``DERIVATIVE_PROMINENCE``, which keeps the two shallow modes that
exist just below a critical time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import biane
from .kernels import (ConvolvedDensity, ProcessKind, density, density_derivative, kernel_scale)
from .measures import AtomicMeasure, concrete, support_hull

log = logging.getLogger(__name__)

PROMINENCE = 1e-9
# exact-derivative scans only need to reject rounding-level ripples
DERIVATIVE_PROMINENCE = 1e-12
PROFILE_FLOOR = 1e-12
LOCATION_TOL = 1e-10
DEFAULT_GRID = 4096
FREE_GRID = 2048


class WindowTooSmallError(ArithmeticError):
    """The density is still rising toward a window edge."""


class DegenerateProfileError(ValueError):
    pass


class BracketError(ValueError):
    pass


@dataclass
class ModalityReport:
    mode_count: int
    mode_locations: list
    support_components: int
    unimodal: bool
    method: str
    grid_size: int
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "mode_count": self.mode_count,
            "mode_locations": [float(x) for x in self.mode_locations],
            "support_components": self.support_components,
            "unimodal": self.unimodal,
            "method": self.method,
            "grid_size": self.grid_size,
        }


@dataclass
class CriticalTimeResult:
    t_star: float
    bracket: tuple
    monotone_verified: bool
    scan_grid: list
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "bracket": [float(b) for b in self.bracket],
            "monotone_verified": self.monotone_verified,
            "scan_grid": [[float(t), bool(u)] for t, u in self.scan_grid],
            "warnings": list(self.warnings),
        }


def _report(modes, components, method, grid_size, **diag) -> ModalityReport:
    modes = sorted(float(m) for m in modes)
    return ModalityReport(mode_count=len(modes), mode_locations=modes, support_components=components,
                          unimodal=(len(modes) == 1 and components == 1), method=method,
                          grid_size=grid_size, diagnostics=diag)


def prune_extrema(extrema, left_edge: float, right_edge: float, rel: float = PROMINENCE, floor: float = 0.0):
    """Drop maxima whose prominence is below ``rel`` times their height or below ``floor``.

    ``extrema`` is an alternating list of ``(kind, location, value)`` with kind
    ``"max"`` or ``"min"``; edge values bound the first and last maxima.
    Returns the surviving maxima as ``(location, value, prominence)``.
    """
    ext = list(extrema)
    changed = True
    while changed:
        changed = False
        for i, (kind, _, val) in enumerate(ext):
            if kind != "max":
                continue
            left = ext[i - 1][2] if i > 0 else left_edge
            right = ext[i + 1][2] if i + 1 < len(ext) else right_edge
            if val - max(left, right) >= max(rel * abs(val), floor) and val > 0:
                continue
            # remove the max together with its higher neighbouring min
            has_l, has_r = i > 0, i + 1 < len(ext)
            if has_l and (not has_r or left >= right):
                del ext[i - 1:i + 1]
            elif has_r:
                del ext[i:i + 2]
            else:
                del ext[i]
            changed = True
            break
    out = []
    for i, (kind, loc, val) in enumerate(ext):
        if kind == "max":
            left = ext[i - 1][2] if i > 0 else left_edge
            right = ext[i + 1][2] if i + 1 < len(ext) else right_edge
            out.append((loc, val, val - max(left, right)))
    return out


def _sign_changes(signs):
    """Indices ``(i, j)`` of consecutive nonzero entries with opposite signs."""
    nz = np.flatnonzero(signs)
    if nz.size < 2:
        return []
    a, b = nz[:-1], nz[1:]
    flip = signs[a] != signs[b]
    return list(zip(a[flip], b[flip]))


def _bisect_vector(sign_fn, lo, hi, iters: int = 80):
    """Vectorized bisection for sign changes; ``sign_fn(lo) > 0`` side is kept on the left."""
    lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    s_lo = np.sign(sign_fn(lo))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(sign_fn(mid))
        same = s_mid == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= np.maximum(LOCATION_TOL, 4 * np.finfo(float).eps * np.abs(hi))):
            break
    return 0.5 * (lo + hi)


# -- classical kernels --------------------------------------------------------

def default_window(cd: ConvolvedDensity) -> tuple[float, float]:
    lo, hi = support_hull(cd.mu)
    t = cd.t
    if cd.kind is ProcessKind.LEVY_HALF:
        return lo, hi + 10 * t * t + 6 * math.sqrt(t) + 10 * t
    pad = 6 * math.sqrt(t) + 10 * t
    return lo - pad, hi + pad


def scan_grid(cd: ConvolvedDensity, window=None, grid_size: int = DEFAULT_GRID, probes=()) -> np.ndarray:
    """Uniform window grid, a dense grid over the hull, local grids at each atom, plus probes."""
    wlo, whi = window if window is not None else default_window(cd)
    lo, hi = support_hull(cd.mu)
    sc = cd.scale()
    levy = cd.kind is ProcessKind.LEVY_HALF
    parts = [np.linspace(wlo, whi, grid_size)]
    core_lo = lo if levy else lo - 8 * sc
    core_hi = hi + (12 if levy else 8) * sc
    if core_hi - core_lo < 50 * (sc + (hi - lo) / 64 + 1e-12) or hi - lo < 1e3 * sc:
        parts.append(np.linspace(core_lo, core_hi, grid_size))
    m = concrete(cd.mu)
    if isinstance(m, AtomicMeasure) and m.atoms.size <= 256:
        n_local = max(256, grid_size // 4)
        if levy:
            offs = sc * np.concatenate([np.linspace(0, 12, n_local), np.geomspace(1e-3, 40, n_local // 2)])
        else:
            offs = sc * np.linspace(-8, 8, n_local)
        parts.extend(a + offs for a in m.atoms)
    parts.append(np.asarray(probes, dtype=float).ravel())
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= wlo) & (grid <= whi)]


def count_modes_derivative(cd: ConvolvedDensity, window=None, grid_size: int = DEFAULT_GRID,
                           probes=()) -> ModalityReport:
    """Modes of ``mu * K_t`` from sign changes of the exact first derivative."""
    if cd.kind is ProcessKind.FREE_SEMICIRCLE:
        raise ValueError("use count_modes_free for the free process")
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    x = scan_grid(cd, window, grid_size, probes)
    d1 = density_derivative(cd, x, 1)
    if d1[0] < 0 or d1[-1] > 0:
        raise WindowTooSmallError(f"density not decreasing outward at window [{x[0]}, {x[-1]}]")
    changes = _sign_changes(np.sign(d1))
    if not changes:
        if np.all(d1 == 0):
            raise DegenerateProfileError("derivative vanishes on the whole window")
        # monotone on the scanned window: the only candidate is an edge
        return _report([], 1, "derivative_scan", x.size)
    i_idx = np.array([c[0] for c in changes])
    j_idx = np.array([c[1] for c in changes])
    crit = _bisect_vector(lambda z: density_derivative(cd, z, 1), x[i_idx], x[j_idx])
    kinds = ["max" if d1[i] > 0 else "min" for i in i_idx]
    vals = density(cd, crit)
    extrema = list(zip(kinds, crit, np.atleast_1d(vals)))
    edge = float(min(density(cd, x[0]), density(cd, x[-1])))
    modes = prune_extrema(extrema, edge, edge, DERIVATIVE_PROMINENCE)
    return _report([m[0] for m in modes], 1, "derivative_scan", x.size,
                   prominence=[m[2] / m[1] for m in modes])


def classical_profile(cd: ConvolvedDensity, window=None, n_points: int = 4096) -> biane.DensityProfile:
    wlo, whi = window if window is not None else default_window(cd)
    x = np.linspace(wlo, whi, n_points)
    return biane.DensityProfile(x=x, p=density(cd, x), process=cd.kind.value, t=cd.t)


# -- free process -------------------------------------------------------------

def count_modes_free(mu, t: float, n_per_interval: int = FREE_GRID, state=None) -> ModalityReport:
    """Modes of ``mu [+] S(0,t)`` from the sign of ``v_t'``.

    Since ``psi_t`` is increasing, modes of ``p_t`` correspond to local maxima
    of ``v_t(u)``.  Differentiating ``xi(u, v_t(u)) = 1/t`` shows ``v_t'`` has
    the sign of ``d xi / du``, which is evaluated exactly.
    """
    state = state or biane.BianeState(mu, t)
    m = state.mu
    modes = []
    for lo, hi in state.intervals:
        u = biane.cosine_nodes(lo, hi, n_per_interval)[1:-1]
        v = state.v(u)
        s = np.sign(biane.xi_du(m, u, v))
        changes = _sign_changes(s)
        if not changes:
            continue
        i_idx = np.array([c[0] for c in changes])
        j_idx = np.array([c[1] for c in changes])

        def sgn(z):
            return biane.xi_du(m, z, state.v(z))

        crit = _bisect_vector(sgn, u[i_idx], u[j_idx])
        vals = np.atleast_1d(state.v(crit))
        kinds = ["max" if s[i] > 0 else "min" for i in i_idx]
        for loc, val, prom in prune_extrema(list(zip(kinds, crit, vals)), 0.0, 0.0, DERIVATIVE_PROMINENCE):
            modes.append((float(state.psi(loc)), prom / val))
    modes.sort()
    return _report([m[0] for m in modes], len(state.intervals), "derivative_scan",
                   n_per_interval * len(state.intervals), intervals=state.intervals,
                   prominence=[m[1] for m in modes])


# -- sampled profiles ---------------------------------------------------------

def count_modes_profile(profile: biane.DensityProfile) -> ModalityReport:
    """Discrete local maxima of a sampled density (flat runs collapsed)."""
    x = np.asarray(profile.x, dtype=float)
    p = np.asarray(profile.p, dtype=float)
    if not np.all(np.diff(x) > 0):
        raise ValueError("profile x must be strictly increasing")
    if not np.any(p > 0):
        raise DegenerateProfileError("profile is identically zero")
    pos = p > 0
    components = int(np.sum(pos[1:] & ~pos[:-1]) + pos[0])
    # collapse flat runs
    keep = np.r_[True, p[1:] != p[:-1]]
    starts = np.flatnonzero(keep)
    ends = np.r_[starts[1:], p.size] - 1
    vals = p[starts]
    centers = 0.5 * (x[starts] + x[ends])
    padded = np.r_[0.0, vals, 0.0]
    is_max = (padded[1:-1] > padded[:-2]) & (padded[1:-1] > padded[2:])
    is_min = (padded[1:-1] < padded[:-2]) & (padded[1:-1] < padded[2:])
    extrema = [("max" if is_max[k] else "min", centers[k], vals[k])
               for k in range(vals.size) if is_max[k] or is_min[k]]
    # far-tail samples carry roundoff on the scale of the peak, not of their own height
    modes = prune_extrema(extrema, 0.0, 0.0, floor=PROFILE_FLOOR * p.max())
    return _report([m[0] for m in modes], components, "profile_scan", x.size)


# -- dispatch -----------------------------------------------------------------

def classify(mu, kind, t: float, grid_size: int | None = None, **kw) -> ModalityReport:
    kind = ProcessKind.parse(kind)
    if kind is ProcessKind.FREE_SEMICIRCLE:
        return count_modes_free(mu, t, grid_size or FREE_GRID)
    return count_modes_derivative(ConvolvedDensity(mu, kind, t), grid_size=grid_size or DEFAULT_GRID, **kw)


def is_unimodal(mu, kind, t: float, **kw) -> bool:
    return classify(mu, kind, t, **kw).unimodal


# -- level sets ---------------------------------------------------------------

def _count_roots(x, g_fn, deriv, tol):
    """Roots of ``g_fn`` sampled on ``x``: sign changes plus tangential touches."""
    g = g_fn(x)
    s = np.where(np.abs(g) <= tol, 0, np.sign(g)).astype(int)
    count = 0
    prev = None
    i, n = 0, s.size
    while i < n:
        if s[i] == 0:
            # a run of grid values within tol of zero is one root
            count += 1
            while i < n and s[i] == 0:
                i += 1
            prev = None
            continue
        if prev is not None and s[i] != prev:
            count += 1
        prev = s[i]
        i += 1
    # extrema between grid points that may reach zero without a sampled sign change
    d = np.sign(deriv(x))
    for i0, j0 in _sign_changes(d):
        if s[i0] == 0 or s[j0] == 0 or s[i0] != s[j0]:
            continue
        if (s[i0] < 0) != (d[i0] > 0):
            continue  # extremum moves away from zero
        z = _bisect_vector(deriv, [x[i0]], [x[j0]])
        gz = float(np.atleast_1d(g_fn(z))[0])
        if abs(gz) <= tol:
            count += 1
        elif np.sign(gz) != s[i0]:
            count += 2
    return count


def level_crossings(mu, kind, t: float, level: float, grid_size: int = 8192) -> int:
    """Number of solutions of ``p(x) = level``.

    Free case: solutions ``u`` of ``xi(u, pi*level*t) = 1/t``, which are in
    bijection with solutions of ``p_t(x) = level`` through ``psi_t``.
    Classical case: solutions of ``density(x) = level`` on the scan window.
    """
    if not level > 0:
        raise ValueError("level must be positive")
    kind = ProcessKind.parse(kind)
    m = concrete(mu)
    if kind is ProcessKind.FREE_SEMICIRCLE:
        R = math.pi * level * t
        lo, hi = support_hull(m)
        pad = math.sqrt(t) + 1.0
        parts = [np.linspace(lo - pad, hi + pad, grid_size)]
        if isinstance(m, AtomicMeasure) and m.atoms.size <= 256:
            parts.extend(a + np.linspace(-pad, pad, max(256, grid_size // 8)) for a in m.atoms)
        x = np.unique(np.concatenate(parts))

        def g_fn(z):
            return biane.xi(m, z, R) - 1.0 / t

        def deriv(z):
            return biane.xi_du(m, z, R)

        tol = 1e-12 / t
    else:
        cd = ConvolvedDensity(m, kind, t)
        x = scan_grid(cd, grid_size=grid_size)

        def g_fn(z):
            return density(cd, z) - level

        def deriv(z):
            return density_derivative(cd, z, 1)

        tol = 1e-12 * level
    return _count_roots(x, g_fn, deriv, tol)


# -- critical times -----------------------------------------------------------

def critical_time(mu, kind, t_range, tol: float = 1e-3, n_scan: int = 32, **kw) -> CriticalTimeResult:
    """Bisect for the time after which the law stays unimodal.

    A log-spaced scan records the verdicts first; when it shows several
    transitions the last false-to-true one is bracketed.
    """
    t_min, t_max = map(float, t_range)
    if not 0 < t_min < t_max:
        raise BracketError("need 0 < t_min < t_max")

    def verdict(t):
        return is_unimodal(mu, kind, t, **kw)

    ts = np.geomspace(t_min, t_max, n_scan)
    verdicts = [verdict(t) for t in ts]
    if verdicts[0] or not verdicts[-1]:
        raise BracketError(f"verdicts at the bracket ends are {verdicts[0]} and {verdicts[-1]}; "
                           "need non-unimodal at t_min and unimodal at t_max")
    flips = sum(a != b for a, b in zip(verdicts, verdicts[1:]))
    warnings = []
    if flips != 1:
        warnings.append(f"non-monotone verdicts: {flips} transitions on the scan grid")
        log.warning(warnings[-1])
    last_false = max(i for i, v in enumerate(verdicts) if not v)
    lo, hi = ts[last_false], ts[last_false + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict(mid):
            hi = mid
        else:
            lo = mid
    return CriticalTimeResult(t_star=0.5 * (lo + hi), bracket=(float(lo), float(hi)),
                              monotone_verified=(flips == 1),
                              scan_grid=[(float(t), bool(v)) for t, v in zip(ts, verdicts)],
                              warnings=warnings)


def mode_location_bound_check(mu, t: float, center: float = 0.0) -> bool:
    """Is ``mu * N(0,t)`` unimodal with its mode in ``[center - sqrt(t)/2, center + sqrt(t)/2]``?"""
    rep = count_modes_derivative(ConvolvedDensity(mu, ProcessKind.CLASSICAL_GAUSSIAN, t))
    if not rep.unimodal:
        return False
    return abs(rep.mode_locations[0] - center) <= math.sqrt(t) / 2
