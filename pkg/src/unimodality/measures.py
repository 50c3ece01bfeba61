"""Initial distributions and the scalar functionals the threshold theorems use.

Three concrete representations are supported:

* :class:`AtomicMeasure` -- finitely many weighted atoms.
* :class:`GriddedDensityMeasure` -- a piecewise-linear density on a grid, zero
  outside ``[grid[0], grid[-1]]`` (jumps at the ends are allowed, so a uniform
  law is represented exactly).
* :class:`NamedMeasure` -- a named analytic family that resolves to one of the
  two above and carries closed-form functionals where they exist.

Every public function accepts any of the three.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate


class MeasureValidationError(ValueError):
    """Invalid measure parameters; ``field`` names the offending JSON path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class QuadratureError(ArithmeticError):
    pass


WEIGHT_SUM_BAND = (0.999, 1.001)
QUAD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.size == 0 or atoms.size != weights.size:
            raise MeasureValidationError("atoms", "atoms and weights must be nonempty and of equal length")
        if not np.all(np.isfinite(atoms)):
            raise MeasureValidationError("atoms", "atoms must be finite")
        if not np.all(weights > 0):
            raise MeasureValidationError("weights", "weights must be strictly positive")
        total = weights.sum()
        if abs(total - 1.0) > 1e-12:
            raise MeasureValidationError("weights", f"weights sum to {total!r}, expected 1")
        # merge duplicates, sort
        uniq, inverse = np.unique(atoms, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, weights)
        object.__setattr__(self, "atoms", uniq)
        object.__setattr__(self, "weights", merged)
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def from_unnormalized(cls, atoms, weights) -> "AtomicMeasure":
        w = np.asarray(weights, dtype=float)
        return cls(atoms, w / w.sum())

    def __eq__(self, other):
        return (isinstance(other, AtomicMeasure)
                and np.array_equal(self.atoms, other.atoms)
                and np.array_equal(self.weights, other.weights))

    def __repr__(self):
        return f"AtomicMeasure(atoms={self.atoms.tolist()}, weights={self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class GriddedDensityMeasure:
    """Piecewise-linear density through ``(grid[i], values[i])``.

    The values are renormalized at construction so the exact integral of the
    interpolant is one.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if grid.size < 2 or grid.size != values.size:
            raise MeasureValidationError("grid", "need at least two grid points and matching values")
        if not np.all(np.diff(grid) > 0):
            raise MeasureValidationError("grid", "grid must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise MeasureValidationError("values", "density values must be finite and nonnegative")
        mass = np.trapezoid(values, grid)
        if not mass > 0:
            raise MeasureValidationError("values", "density has zero mass")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values / mass)
        self.grid.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.grid)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.grid[0]) & (x <= self.grid[-1])
        return np.where(inside, np.interp(x, self.grid, self.values), 0.0)

    def support_pieces(self) -> list[tuple[float, float]]:
        """Closed intervals where the density is positive (up to closure)."""
        g, v = self.grid, self.values
        pos_cell = (v[:-1] > 0) | (v[1:] > 0)
        pieces = []
        i = 0
        n = pos_cell.size
        while i < n:
            if pos_cell[i]:
                j = i
                while j + 1 < n and pos_cell[j + 1]:
                    j += 1
                pieces.append((float(g[i]), float(g[j + 1])))
                i = j + 1
            else:
                i += 1
        return pieces

    def __eq__(self, other):
        return (isinstance(other, GriddedDensityMeasure)
                and np.array_equal(self.grid, other.grid)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"GriddedDensityMeasure(n={self.grid.size}, [{self.grid[0]}, {self.grid[-1]}])"


_FAMILIES = {
    "bernoulli": ("a",),
    "point_mass": ("a",),
    "uniform": ("l", "r"),
    "triangle": ("l", "m", "r"),
    "semicircle": ("t",),
}

SEMICIRCLE_NODES = 257


@dataclass(frozen=True)
class NamedMeasure:
    family: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise MeasureValidationError("type", f"unknown family {self.family!r}")
        names = _FAMILIES[self.family]
        params = tuple(float(p) for p in self.params)
        if len(params) != len(names):
            raise MeasureValidationError(self.family, f"expected parameters {names}")
        if not all(math.isfinite(p) for p in params):
            raise MeasureValidationError(self.family, "parameters must be finite")
        object.__setattr__(self, "params", params)
        if self.family == "uniform" and not params[0] < params[1]:
            raise MeasureValidationError("r", "uniform needs l < r")
        if self.family == "triangle" and not (params[0] <= params[1] <= params[2] and params[0] < params[2]):
            raise MeasureValidationError("m", "triangle needs l <= m <= r and l < r")
        if self.family == "semicircle" and not params[0] > 0:
            raise MeasureValidationError("t", "semicircle variance must be positive")

    @property
    def p(self) -> dict:
        return dict(zip(_FAMILIES[self.family], self.params))

    def resolve(self) -> Union[AtomicMeasure, GriddedDensityMeasure]:
        p = self.p
        if self.family == "bernoulli":
            a = p["a"]
            if a == 0:
                return AtomicMeasure([0.0], [1.0])
            return AtomicMeasure([-a, a], [0.5, 0.5])
        if self.family == "point_mass":
            return AtomicMeasure([p["a"]], [1.0])
        if self.family == "uniform":
            h = 1.0 / (p["r"] - p["l"])
            return GriddedDensityMeasure([p["l"], p["r"]], [h, h])
        if self.family == "triangle":
            l, m, r = p["l"], p["m"], p["r"]
            h = 2.0 / (r - l)
            if m == l:
                return GriddedDensityMeasure([l, r], [h, 0.0])
            if m == r:
                return GriddedDensityMeasure([l, r], [0.0, h])
            return GriddedDensityMeasure([l, m, r], [0.0, h, 0.0])
        # semicircle: cosine-clustered nodes resolve the square-root edges
        t = p["t"]
        edge = 2.0 * math.sqrt(t)
        theta = np.linspace(math.pi, 0.0, SEMICIRCLE_NODES)
        x = edge * np.cos(theta)
        x[0], x[-1] = -edge, edge
        vals = np.sqrt(np.clip(4 * t - x * x, 0, None)) / (2 * math.pi * t)
        return GriddedDensityMeasure(x, vals)


ProbabilityMeasure = Union[AtomicMeasure, GriddedDensityMeasure, NamedMeasure]


def bernoulli(a: float = 1.0) -> NamedMeasure:
    return NamedMeasure("bernoulli", (a,))


def point_mass(a: float = 0.0) -> NamedMeasure:
    return NamedMeasure("point_mass", (a,))


def uniform(l: float, r: float) -> NamedMeasure:
    return NamedMeasure("uniform", (l, r))


def triangle(l: float, m: float, r: float) -> NamedMeasure:
    return NamedMeasure("triangle", (l, m, r))


def semicircle(t: float) -> NamedMeasure:
    return NamedMeasure("semicircle", (t,))


def concrete(mu: ProbabilityMeasure) -> Union[AtomicMeasure, GriddedDensityMeasure]:
    """Resolve named families to their atomic or gridded representation."""
    if isinstance(mu, NamedMeasure):
        return mu.resolve()
    if isinstance(mu, (AtomicMeasure, GriddedDensityMeasure)):
        return mu
    raise TypeError(f"not a probability measure: {mu!r}")


def support_hull(mu: ProbabilityMeasure) -> tuple[float, float]:
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return float(m.atoms[0]), float(m.atoms[-1])
    pieces = m.support_pieces()
    return pieces[0][0], pieces[-1][1]


def shift(mu: ProbabilityMeasure, c: float) -> ProbabilityMeasure:
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return AtomicMeasure(m.atoms + c, m.weights)
    return GriddedDensityMeasure(m.grid + c, m.values)


def dilate(mu: ProbabilityMeasure, c: float) -> ProbabilityMeasure:
    """Push-forward under x -> c x (c > 0)."""
    if not c > 0:
        raise ValueError("dilation factor must be positive")
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return AtomicMeasure(m.atoms * c, m.weights)
    return GriddedDensityMeasure(m.grid * c, m.values / c)


def total_mass(mu: ProbabilityMeasure) -> float:
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return float(m.weights.sum())
    return float(np.trapezoid(m.values, m.grid))


def mean(mu: ProbabilityMeasure) -> float:
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return float(np.dot(m.atoms, m.weights))
    g, v = m.grid, m.values
    # exact for the linear interpolant
    x0, x1, v0, v1 = g[:-1], g[1:], v[:-1], v[1:]
    h = x1 - x0
    return float(np.sum(h * (v0 * (2 * x0 + x1) + v1 * (x0 + 2 * x1)) / 6.0))


def diameter(mu: ProbabilityMeasure) -> float:
    lo, hi = support_hull(mu)
    return hi - lo


def _cellwise_quad(m: GriddedDensityMeasure, func, breakpoints=()) -> float:
    """Integrate func(x) * density(x) over the support, cell by cell."""
    total = 0.0
    g, v = m.grid, m.values
    for i in range(g.size - 1):
        if v[i] == 0 and v[i + 1] == 0:
            continue
        x0, x1 = float(g[i]), float(g[i + 1])
        slope = (v[i + 1] - v[i]) / (x1 - x0)
        pts = [b for b in breakpoints if x0 < b < x1]
        val, err = integrate.quad(lambda x: func(x) * (v[i] + slope * (x - x0)), x0, x1,
                                  points=pts or None, epsabs=QUAD_TOL * 1e-2, epsrel=1e-13, limit=200)
        if err > QUAD_TOL * max(1.0, abs(val)):
            raise QuadratureError(f"quadrature did not converge on cell [{x0}, {x1}] (err={err:.3g})")
        total += val
    return total


def gaussian_tail_functional(mu: ProbabilityMeasure, eps: float) -> float:
    """``alpha = E[exp(eps X^2)]``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if isinstance(mu, NamedMeasure):
        p = mu.p
        if mu.family in ("bernoulli", "point_mass"):
            return math.exp(eps * p["a"] ** 2)
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        with np.errstate(over="ignore"):
            return float(np.dot(m.weights, np.exp(eps * m.atoms ** 2)))
    return _cellwise_quad(m, lambda x: math.exp(eps * x * x))


def abs_moment(mu: ProbabilityMeasure, p: float) -> float:
    """``E|X|^p``."""
    if not p > 0:
        raise ValueError("p must be positive")
    if isinstance(mu, NamedMeasure):
        q = mu.p
        if mu.family in ("bernoulli", "point_mass"):
            return abs(q["a"]) ** p
        if mu.family == "uniform":
            l, r = q["l"], q["r"]

            def prim(x):
                return math.copysign(abs(x) ** (p + 1) / (p + 1), x)

            return (prim(r) - prim(l)) / (r - l)
    m = concrete(mu)
    if isinstance(m, AtomicMeasure):
        return float(np.dot(m.weights, np.abs(m.atoms) ** p))
    return _cellwise_quad(m, lambda x: abs(x) ** p, breakpoints=(0.0,))


# -- JSON interchange ------------------------------------------------------

def _number(doc: dict, key: str) -> float:
    if key not in doc:
        raise MeasureValidationError(key, "missing field")
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise MeasureValidationError(key, "expected a number")
    return float(val)


def _number_list(doc: dict, key: str) -> list:
    if key not in doc:
        raise MeasureValidationError(key, "missing field")
    val = doc[key]
    if not isinstance(val, list) or not val:
        raise MeasureValidationError(key, "expected a nonempty list of numbers")
    for i, item in enumerate(val):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise MeasureValidationError(f"{key}[{i}]", "expected a number")
    return [float(x) for x in val]


def parse_measure(document) -> ProbabilityMeasure:
    """Build a measure from its JSON document (bytes, str or an already-parsed dict)."""
    if isinstance(document, (bytes, bytearray, str)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MeasureValidationError("$", f"invalid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise MeasureValidationError("$", "expected a JSON object")
    kind = doc.get("type")
    if kind == "atomic":
        atoms = _number_list(doc, "atoms")
        weights = _number_list(doc, "weights")
        if len(atoms) != len(weights):
            raise MeasureValidationError("weights", "length differs from atoms")
        for i, w in enumerate(weights):
            if not w > 0:
                raise MeasureValidationError(f"weights[{i}]", "weight must be positive")
        total = math.fsum(weights)
        if not WEIGHT_SUM_BAND[0] <= total <= WEIGHT_SUM_BAND[1]:
            raise MeasureValidationError("weights", f"weights sum to {total}, outside {WEIGHT_SUM_BAND}")
        if abs(total - 1.0) <= 1e-12:
            return AtomicMeasure(atoms, weights)
        return AtomicMeasure.from_unnormalized(atoms, weights)
    if kind == "density":
        grid = _number_list(doc, "grid")
        values = _number_list(doc, "values")
        if len(grid) != len(values):
            raise MeasureValidationError("values", "length differs from grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise MeasureValidationError("grid", "grid must be strictly increasing")
        for i, v in enumerate(values):
            if v < 0:
                raise MeasureValidationError(f"values[{i}]", "density must be nonnegative")
        return GriddedDensityMeasure(grid, values)
    if kind in _FAMILIES:
        return NamedMeasure(kind, tuple(_number(doc, k) for k in _FAMILIES[kind]))
    raise MeasureValidationError("type", f"unknown measure type {kind!r}")


def measure_to_dict(mu: ProbabilityMeasure) -> dict:
    if isinstance(mu, NamedMeasure):
        return {"type": mu.family, **mu.p}
    if isinstance(mu, AtomicMeasure):
        return {"type": "atomic", "atoms": mu.atoms.tolist(), "weights": mu.weights.tolist()}
    return {"type": "density", "grid": mu.grid.tolist(), "values": mu.values.tolist()}


def dump_measure(mu: ProbabilityMeasure) -> str:
    return json.dumps(measure_to_dict(mu), separators=(", ", ": "))


def parse_inline(text: str) -> NamedMeasure:
    """Parse ``family:param[,param...]``, e.g. ``bernoulli:1`` or ``uniform:-1,1``."""
    family, sep, rest = text.partition(":")
    family = family.strip()
    if family not in _FAMILIES:
        raise MeasureValidationError("type", f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    parts = [p for p in rest.split(",") if p.strip()] if sep else []
    try:
        params = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise MeasureValidationError(family, f"bad parameter list {rest!r}") from exc
    return NamedMeasure(family, params)
