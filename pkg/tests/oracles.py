"""Independent reference computations used to freeze expected values.

None of these share code paths with the package: they use closed forms,
complex-plane subordination or scipy quadrature directly.
"""

import math

import numpy as np
from scipy import integrate


def bernoulli_v(t, u):
    """v_t(u) for the symmetric Bernoulli law, from the quartic's closed-form root."""
    u = np.asarray(u, dtype=float)
    inner = (-(2 * u * u + 2 - t) + np.sqrt(t * t + 16 * u * u)) / 2
    return np.sqrt(np.clip(inner, 0, None))


def bernoulli_ut(t):
    """Endpoints of U_t for the symmetric Bernoulli law."""
    root = math.sqrt(t * t + 8 * t)
    hi = math.sqrt((2 + t + root) / 2)
    if t > 1:
        return [(-hi, hi)]
    lo = math.sqrt((2 + t - root) / 2)
    return [(-hi, -lo), (lo, hi)]


def semicircle_pdf(x, t=1.0):
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4 * t - x * x, 0, None)) / (2 * math.pi * t)


def _cauchy_transform_pl(grid, vals, w):
    g = 0j
    dg = 0j
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        c1 = (fb - fa) / (b - a)
        c0 = fa - c1 * a
        log = np.log((w - a) / (w - b))
        g += (c0 + c1 * w) * log - c1 * (b - a)
        dg += c1 * log + (c0 + c1 * w) * (1 / (w - a) - 1 / (w - b))
    return g, dg


def free_density_subordination(grid, vals, t, x):
    """Density of mu [+] S(0,t) for a piecewise-linear density, via w = z - t G(w) in C+."""
    z = complex(x, 1e-13)
    w = complex(x, 2 * math.sqrt(t))
    for _ in range(300):
        g, dg = _cauchy_transform_pl(grid, vals, w)
        step = (w + t * g - z) / (1 + t * dg)
        w -= step
        if w.imag <= 0:
            w = complex(w.real, 1e-14)
        if abs(step) < 1e-15:
            break
    return -_cauchy_transform_pl(grid, vals, w)[0].imag / math.pi


def free_density_atomic_subordination(atoms, weights, t, x):
    """Same as above for an atomic law, G(w) = sum w_i / (w - a_i)."""
    atoms = np.asarray(atoms, dtype=float)
    weights = np.asarray(weights, dtype=float)
    z = complex(x, 1e-13)
    w = complex(x, 2 * math.sqrt(t))
    for _ in range(500):
        d = w - atoms
        g = np.sum(weights / d)
        dg = -np.sum(weights / d ** 2)
        step = (w + t * g - z) / (1 + t * dg)
        w -= step
        if w.imag <= 0:
            w = complex(w.real, 1e-14)
        if abs(step) < 1e-15:
            break
    return -np.sum(weights / (w - atoms)).imag / math.pi


def kernel_pdf(kind, t, u):
    if kind == "classical_gaussian":
        return math.exp(-u * u / (2 * t)) / math.sqrt(2 * math.pi * t)
    if kind == "cauchy":
        return t / (math.pi * (u * u + t * t))
    if u <= 0:
        return 0.0
    return t / math.sqrt(2 * math.pi) * math.exp(-t * t / (2 * u)) * u ** -1.5


def convolve_quad(grid, vals, kind, t, x):
    """(mu * K_t)(x) for a piecewise-linear density by scipy quad on each cell."""
    total = 0.0
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        def f(y, a=a, b=b, fa=fa, fb=fb):
            return (fa + (fb - fa) * (y - a) / (b - a)) * kernel_pdf(kind, t, x - y)
        pts = [x] if a < x < b else None
        val, _ = integrate.quad(f, a, b, points=pts, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total


def mixture_derivative_scan(atoms, weights, t, lo, hi, n=2_000_001):
    """Modes of a Gaussian mixture from a dense sign scan of its derivative."""
    x = np.linspace(lo, hi, n)
    d = np.zeros_like(x)
    for a, w in zip(atoms, weights):
        d += -w * (x - a) / t * np.exp(-(x - a) ** 2 / (2 * t))
    s = np.sign(d)
    idx = np.flatnonzero((s[:-1] > 0) & (s[1:] < 0))
    return x[idx] - d[idx] * (x[idx + 1] - x[idx]) / (d[idx + 1] - d[idx])
