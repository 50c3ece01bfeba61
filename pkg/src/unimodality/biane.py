"""Density of ``mu [+] S(0, t)`` through Biane's real-variable parametrization.

For ``u`` in ``U_t = {u : int dmu(x) / (x - u)^2 > 1/t}`` let ``v_t(u) > 0`` solve

    int dmu(x) / ((x - u)^2 + v^2) = 1/t

and put ``v_t = 0`` elsewhere.  With

    psi_t(u) = u + t * int (u - x) / ((x - u)^2 + v_t(u)^2) dmu(x)

the free density satisfies ``p_t(psi_t(u)) = v_t(u) / (pi t)`` and ``psi_t`` is
an increasing homeomorphism of the line.

Atomic measures use exact sums.  Piecewise-linear densities use per-cell
closed forms for nearby cells and Gauss-Legendre for distant ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import AtomicMeasure, GriddedDensityMeasure, ProbabilityMeasure, concrete

V_TOL = 1e-10
MAX_BISECT = 200
DIVERGENT = math.inf

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
_FAR = 4.0


class InversionError(ArithmeticError):
    """psi_t failed its monotonicity check; signals a solver or quadrature fault."""


# -- integrals against mu ------------------------------------------------------

def _cells(m: GriddedDensityMeasure):
    g, v = m.grid, m.values
    keep = (v[:-1] > 0) | (v[1:] > 0)
    x0, x1 = g[:-1][keep], g[1:][keep]
    g0, g1 = v[:-1][keep], v[1:][keep]
    return x0, x1, g0, g1, (g1 - g0) / (x1 - x0)


def _gridded(m, u, v, closed, integrand):
    """Sum over cells of ``int g(y) k(y - u, v) dy``.

    ``closed(s0, s1, alpha, slope, v, g0, g1)`` integrates ``(alpha + slope*s) k(s, v)``
    over ``[s0, s1]`` where ``s = y - u``; ``integrand(s, v)`` is ``k`` itself.
    """
    u = np.asarray(u, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), u.shape)
    fu, fv = u.reshape(-1), v.reshape(-1)
    x0, x1, g0, g1, slope = _cells(m)
    width = x1 - x0
    mid, half = (x0 + x1) / 2, width / 2
    y_nodes = mid[:, None] + half[:, None] * _GL_NODES
    w_nodes = (g0[:, None] + slope[:, None] * (y_nodes - x0[:, None])) * (half[:, None] * _GL_WEIGHTS)
    out = np.empty(fu.size)
    step = max(1, 200_000 // (x0.size * 16))
    for i in range(0, fu.size, step):
        uu, vv = fu[i:i + step, None], fv[i:i + step, None]
        s0, s1 = x0 - uu, x1 - uu
        alpha = g0 + slope * (uu - x0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = closed(s0, s1, alpha, slope, vv, g0, g1)
        dist = np.maximum(np.maximum(x0 - uu, uu - x1), 0.0)
        far = dist > _FAR * width
        if far.any():
            r, c = np.nonzero(far)
            s = y_nodes[c] - uu[r]
            val[r, c] = np.sum(integrand(s, vv[r]) * w_nodes[c], axis=1)
        out[i:i + step] = val.sum(axis=1)
    return out.reshape(u.shape)


def _xi_closed(s0, s1, alpha, slope, v, g0, g1):
    return (alpha / v * (np.arctan(s1 / v) - np.arctan(s0 / v))
            + slope / 2 * np.log((s1 * s1 + v * v) / (s0 * s0 + v * v)))


def _xi_du_closed(s0, s1, alpha, slope, v, g0, g1):
    return (g0 / (s0 * s0 + v * v) - g1 / (s1 * s1 + v * v)
            + slope / v * (np.arctan(s1 / v) - np.arctan(s0 / v)))


def _pull_closed(s0, s1, alpha, slope, v, g0, g1):
    # int (alpha + slope s) * (-s) / (s^2 + v^2) ds
    return -(alpha / 2 * np.log((s1 * s1 + v * v) / (s0 * s0 + v * v))
             + slope * ((s1 - s0) - v * (np.arctan(s1 / v) - np.arctan(s0 / v))))


def _x_closed(s0, s1, alpha, slope, v, g0, g1):
    # v == 0, cell away from u:  int (alpha + slope s) / s^2 ds
    return alpha * (1 / s0 - 1 / s1) + slope * np.log(s1 / s0)


def _dx_closed(s0, s1, alpha, slope, v, g0, g1):
    # d/du int g(y) / (y-u)^2 dy = int 2 g(y) / (y-u)^3 dy
    return alpha * (1 / (s0 * s0) - 1 / (s1 * s1)) + 2 * slope * (1 / s0 - 1 / s1)


def xi(mu, u, v):
    """``int dmu(x) / ((x - u)^2 + v^2)`` for ``v > 0`` (arrays broadcast)."""
    m = concrete(mu)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if isinstance(m, AtomicMeasure):
        d = u[..., None] - m.atoms
        return (m.weights / (d * d + v[..., None] ** 2)).sum(-1)
    return _gridded(m, u, v, _xi_closed, lambda s, vv: 1 / (s * s + vv * vv))


def xi_du(mu, u, v):
    """Partial derivative of :func:`xi` in ``u``; its sign is the sign of ``v_t'(u)``."""
    m = concrete(mu)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if isinstance(m, AtomicMeasure):
        d = m.atoms - u[..., None]
        q = d * d + v[..., None] ** 2
        return (m.weights * 2 * d / (q * q)).sum(-1)
    return _gridded(m, u, v, _xi_du_closed, lambda s, vv: 2 * s / (s * s + vv * vv) ** 2)


def _pull(m, u, v):
    """``int (u - x) / ((x - u)^2 + v^2) dmu(x)``."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if isinstance(m, AtomicMeasure):
        d = u[..., None] - m.atoms
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(d == 0, 0.0, d / (d * d + v[..., None] ** 2))
        return (m.weights * terms).sum(-1)
    return _gridded(m, u, v, _pull_closed, lambda s, vv: -s / (s * s + vv * vv))


def _in_support(m: GriddedDensityMeasure, u):
    u = np.asarray(u, dtype=float)
    inside = np.zeros(u.shape, dtype=bool)
    for lo, hi in m.support_pieces():
        inside |= (u >= lo) & (u <= hi)
    return inside


def x_functional(mu, u):
    """``X_mu(u) = int dmu(x) / (u - x)^2``; ``inf`` on atoms and on the density's support."""
    m = concrete(mu)
    u = np.asarray(u, dtype=float)
    if isinstance(m, AtomicMeasure):
        d = u[..., None] - m.atoms
        with np.errstate(divide="ignore", over="ignore"):
            out = (m.weights / (d * d)).sum(-1)
    else:
        inside = _in_support(m, u)
        safe = np.where(inside, m.grid[0] - 1.0, u)
        out = np.where(inside, DIVERGENT, _gridded(m, safe, 0.0, _x_closed, lambda s, vv: 1 / (s * s)))
    return float(out) if out.ndim == 0 else out


def _x_du(m, u):
    u = np.asarray(u, dtype=float)
    if isinstance(m, AtomicMeasure):
        d = m.atoms - u[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            return (m.weights * 2 / d ** 3).sum(-1)
    return _gridded(m, u, 0.0, _dx_closed, lambda s, vv: 2 / s ** 3)


# -- v_t, U_t, psi_t -----------------------------------------------------------

def solve_v(mu, t: float, u, tol: float = V_TOL):
    """``v_t(u)``: 0 off ``U_t``, otherwise the root of ``xi(u, v) = 1/t`` in ``(0, sqrt t]``.

    Works with ``w = v^2`` and ``h(w) = 1/xi(u, sqrt w) - t``, which increases
    from ``1/X_mu(u) - t < 0`` at ``w = 0`` to ``h(t) >= 0`` (since
    ``xi <= 1/v^2``); for a point mass ``h`` is exactly linear.  A bracketed
    Illinois iteration keeps the guarantee of bisection and converges in a few
    steps.  Iterates to machine resolution of ``w``; ``tol`` bounds the residual,
    which is checked by the test-suite rather than here.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    m = concrete(mu)
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    X = np.asarray(x_functional(m, u), dtype=float)
    inside = X > 1.0 / t
    v = np.zeros(u.shape)
    if inside.any():
        uu = u[inside]

        def h(idx, w):
            return 1.0 / xi(m, uu[idx], np.sqrt(w)) - t

        n = uu.size
        lo, hi = np.zeros(n), np.full(n, float(t))
        with np.errstate(divide="ignore"):
            flo = 1.0 / X[inside] - t
        fhi = h(np.arange(n), hi)
        side = np.zeros(n, dtype=int)
        w = 0.5 * (lo + hi)
        active = np.arange(n)
        for _ in range(MAX_BISECT):
            a, b, fa, fb = lo[active], hi[active], flo[active], fhi[active]
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = (a * fb - b * fa) / (fb - fa)
            cand = np.where((cand > a) & (cand < b), cand, 0.5 * (a + b))
            fc = h(active, cand)
            w[active] = cand
            up = fc > 0  # root lies in [a, cand]
            hit = fc == 0
            # Illinois: halve the retained end's value when the same side moves twice
            new_hi = np.where(up, cand, b)
            new_lo = np.where(up, a, cand)
            new_fhi = np.where(up, fc, np.where(side[active] == -1, fb * 0.5, fb))
            new_flo = np.where(up, np.where(side[active] == 1, fa * 0.5, fa), fc)
            side[active] = np.where(up, 1, -1)
            lo[active], hi[active], flo[active], fhi[active] = new_lo, new_hi, new_flo, new_fhi
            done = hit | (new_hi - new_lo <= 4 * np.finfo(float).eps * new_hi)
            active = active[~done]
            if active.size == 0:
                break
        v[inside] = np.sqrt(w)
    return float(v[0]) if scalar else v


def _bisect_sign(f, a: float, b: float, iters: int = MAX_BISECT) -> float:
    """Root of a scalar function with a sign change on ``[a, b]`` (sign-only bisection)."""
    fa = f(a)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _support_pieces(m) -> list[tuple[float, float]]:
    if isinstance(m, AtomicMeasure):
        return [(float(a), float(a)) for a in m.atoms]
    return m.support_pieces()


def ut_intervals(mu, t: float) -> list[tuple[float, float]]:
    """Connected components of ``U_t`` as sorted open intervals.

    Every support piece lies in ``U_t``.  On each gap between consecutive
    pieces ``X_mu`` is convex and blows up at both ends, so the gap is split
    exactly when the minimum of ``X_mu`` there is at most ``1/t``.  Outside
    the hull ``X_mu`` is monotone and ``X_mu(u) <= 1/dist(u, supp)^2``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    m = concrete(mu)
    target = 1.0 / t
    pieces = _support_pieces(m)

    def excess(u):
        x = float(x_functional(m, u))
        return math.inf if math.isnan(x) else x - target

    def off(x, direction):
        # just outside a piece end, far enough to avoid denormal differences
        return x + direction * 4 * np.finfo(float).eps * max(1.0, abs(x))

    def slope(u):
        return float(_x_du(m, np.array(u)))

    def crossing(near, far):
        # a piece end whose density vanishes linearly diverges only
        # logarithmically, so X_mu may already be below 1/t next to it
        if excess(near) <= 0:
            return near
        return _bisect_sign(excess, near, far)

    reach = math.sqrt(t) * 1.001
    start = crossing(off(pieces[0][0], -1), pieces[0][0] - reach)
    intervals = []
    for (l0, r0), (l1, r1) in zip(pieces, pieces[1:]):
        a, b = off(r0, 1), off(l1, -1)
        if b <= a:
            continue
        u_min = _bisect_sign(slope, a, b)
        if excess(u_min) > 0:
            continue
        intervals.append((start, crossing(a, u_min)))
        start = crossing(b, u_min)
    intervals.append((start, crossing(off(pieces[-1][1], 1), pieces[-1][1] + reach)))
    return [(float(l), float(r)) for l, r in intervals]


def psi(mu, t: float, u, v=None):
    """``psi_t(u)``; pass ``v`` to reuse an already solved ``v_t(u)``."""
    m = concrete(mu)
    u = np.asarray(u, dtype=float)
    if v is None:
        v = solve_v(m, t, u)
    out = u + t * _pull(m, u, np.asarray(v, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FreeDensityPoint:
    u: float
    v: float
    psi: float
    p: float


def free_point(mu, t: float, u: float) -> FreeDensityPoint:
    v = solve_v(mu, t, u)
    return FreeDensityPoint(u=float(u), v=v, psi=psi(mu, t, u, v), p=v / (math.pi * t))


@dataclass
class DensityProfile:
    """Sampled density curve with metadata."""

    x: np.ndarray
    p: np.ndarray
    process: str
    t: float
    u: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def mass(self) -> float:
        return float(np.trapezoid(self.p, self.x))


def cosine_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` nodes on ``[lo, hi]`` clustered toward both ends."""
    theta = np.linspace(0.0, math.pi, n)
    nodes = lo + (hi - lo) * (1 - np.cos(theta)) / 2
    nodes[0], nodes[-1] = lo, hi
    return nodes


def _allocate(lengths, n_total, minimum=8):
    lengths = np.asarray(lengths, dtype=float)
    counts = np.maximum(minimum, np.round(n_total * lengths / lengths.sum()).astype(int))
    counts[np.argmax(counts)] += n_total - counts.sum()
    return np.maximum(counts, minimum)


class BianeState:
    """Solved objects for one ``(mu, t)``: ``U_t`` plus evaluators for ``v_t``, ``psi_t``, ``p_t``."""

    def __init__(self, mu: ProbabilityMeasure, t: float, tol: float = V_TOL):
        if not t > 0:
            raise ValueError("t must be positive")
        self.mu = concrete(mu)
        self.t = float(t)
        self.tol = tol
        self.intervals = ut_intervals(self.mu, self.t)

    def v(self, u):
        return solve_v(self.mu, self.t, u, self.tol)

    def psi(self, u, v=None):
        return psi(self.mu, self.t, u, v)

    def u_grid(self, n_per_interval: int) -> list[np.ndarray]:
        return [cosine_nodes(l, r, n_per_interval) for l, r in self.intervals]

    def bracket(self) -> tuple[float, float]:
        pad = 2 * math.sqrt(self.t) + 1.0
        return self.intervals[0][0] - pad, self.intervals[-1][1] + pad

    def check_monotone(self, n: int = 257):
        lo, hi = self.bracket()
        u = np.concatenate([np.linspace(lo, hi, n)] + self.u_grid(max(16, n // 4)))
        u = np.unique(u)
        u = u[np.r_[True, np.diff(u) > 1e-12 * max(1.0, hi - lo)]]
        x = self.psi(u)
        if not np.all(np.diff(x) > 0):
            raise InversionError("psi_t is not strictly increasing on the check grid")

    def invert(self, x: float) -> float:
        """The ``u`` with ``psi_t(u) = x``."""
        lo, hi = self.bracket()
        while self.psi(lo) > x:
            lo -= hi - lo
        while self.psi(hi) < x:
            hi += hi - lo
        return _bisect_sign(lambda u: self.psi(u) - x, lo, hi)

    def density(self, x) -> np.ndarray | float:
        self.check_monotone()
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        us = np.array([self.invert(float(xx)) for xx in xs])
        p = self.v(us) / (math.pi * self.t)
        return float(p[0]) if np.ndim(x) == 0 else p

    def profile(self, n_points: int = 513) -> DensityProfile:
        """Tabulate ``(psi_t(u), v_t(u)/(pi t))`` over a u-grid covering ``U_t``.

        Endpoint images carry ``p = 0``; consecutive components are therefore
        separated by zeros in the profile.
        """
        if n_points < 16:
            raise ValueError("n_points must be at least 16")
        lengths = [r - l for l, r in self.intervals]
        counts = _allocate(lengths, n_points)
        us = []
        for (l, r), c in zip(self.intervals, counts):
            us.append(cosine_nodes(l, r, int(c)))
        u = np.concatenate(us)
        v = np.asarray(self.v(u))
        starts = np.cumsum(np.r_[0, counts[:-1]])
        v[starts] = 0.0
        v[starts + counts - 1] = 0.0
        x = self.psi(u, v)
        # touching components share an endpoint image; keep it once
        keep = np.r_[True, np.diff(x) > 0]
        u, v, x = u[keep], v[keep], x[keep]
        return DensityProfile(x=x, p=v / (math.pi * self.t), process="free_semicircle", t=self.t, u=u,
                              meta={"components": len(self.intervals)})


def free_density(mu, t: float, x, tol: float = V_TOL):
    """``p_t(x)`` by inverting ``psi_t`` (bisection, after a monotonicity check)."""
    return BianeState(mu, t, tol).density(x)


def free_density_profile(mu, t: float, n_points: int = 513) -> DensityProfile:
    return BianeState(mu, t).profile(n_points)
