"""Radial grids, fields and quadrature on hyperbolic 3-space.

A radial function on H^3 is sampled at the interior nodes ``r_j = j*h``,
``j = 1..n-1``, of a uniform mesh on ``[0, rmax]``.  Both endpoints are
excluded: the conjugated variable ``w = sinh(r) u`` vanishes at ``r = 0``
and is held at zero at ``r = rmax`` (Dirichlet truncation).

Integrals are taken against the hyperbolic volume element
``4*pi*sinh(r)**2 dr``.  The solid-angle factor ``4*pi`` enters in exactly
one place, :func:`integrate_measure`; every norm and functional in the
package is built on top of it.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np

FOUR_PI = 4.0 * np.pi

REGIONS = ("all", "le1", "gt1")

# Gauss-Legendre rule used by the product quadrature (per sub-cell).
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
# Geometric grading of the cell touching the origin.
_GRADING_LEVELS = 200


class GridMismatchError(ValueError):
    """Two operands live on different radial grids."""


class RegionGridMismatch(ValueError):
    """A requested region contains no grid node."""


@dataclass(frozen=True)
class RadialGrid:
    """Uniform mesh on ``[0, rmax]`` with ``n`` subintervals."""

    rmax: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.rmax) or self.rmax <= 0:
            raise ValueError(f"rmax must be positive, got {self.rmax}")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"n must be an integer >= 8, got {self.n}")
        object.__setattr__(self, "rmax", float(self.rmax))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.rmax / self.n

    @functools.cached_property
    def nodes(self) -> np.ndarray:
        r = np.arange(1, self.n) * self.h
        r.setflags(write=False)
        return r

    @functools.cached_property
    def sinh(self) -> np.ndarray:
        s = np.sinh(self.nodes)
        s.setflags(write=False)
        return s

    @functools.cached_property
    def coth(self) -> np.ndarray:
        c = 1.0 / np.tanh(self.nodes)
        c.setflags(write=False)
        return c

    def region_mask(self, region: str) -> np.ndarray:
        if region == "all":
            return np.ones(self.n - 1, dtype=bool)
        if region == "le1":
            return self.nodes <= 1.0
        if region == "gt1":
            return self.nodes > 1.0
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")

    def region_bounds(self, region: str) -> tuple[float, float]:
        if region == "all":
            return 0.0, self.rmax
        if region == "le1":
            return 0.0, min(1.0, self.rmax)
        if region == "gt1":
            return min(1.0, self.rmax), self.rmax
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")

    def index_of(self, r: float) -> int | None:
        """Array index of the node at radius ``r``, or None if off-grid."""
        j = round(r / self.h)
        if 1 <= j <= self.n - 1 and abs(j * self.h - r) <= 1e-12 * max(1.0, r):
            return j - 1
        return None

    def refine(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.rmax, self.n * factor)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples ``u(r_j)`` of a radial function at the interior nodes."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n - 1,):
            raise ValueError(
                f"field has shape {v.shape}, grid expects ({self.grid.n - 1},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: RadialGrid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.nodes))

    @classmethod
    def zeros(cls, grid: RadialGrid):
        return cls(grid, np.zeros(grid.n - 1))

    def _other(self, other):
        if isinstance(other, RadialField):
            check_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return RadialField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RadialField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return RadialField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return RadialField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def __pow__(self, p):
        return RadialField(self.grid, self.values**p)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class WaveState:
    """Position/velocity pair ``(u, u_t)`` at time ``t``."""

    u: RadialField
    ut: RadialField
    t: float = 0.0

    def __post_init__(self):
        check_same_grid(self.u, self.ut)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: RadialGrid, t: float = 0.0):
        return cls(RadialField.zeros(grid), RadialField.zeros(grid), t)

    def scaled(self, lam: float) -> "WaveState":
        return WaveState(lam * self.u, lam * self.ut, self.t)


def power_weight(exponent: float) -> "PowerWeight":
    return PowerWeight(exponent)


@dataclass(frozen=True)
class PowerWeight:
    """The weight ``r -> r**exponent``."""

    exponent: float

    def __call__(self, r):
        return np.asarray(r, dtype=float) ** self.exponent


@dataclass(frozen=True)
class WeightedRegionNorm:
    """Descriptor for ``|| weight * f ||_{L^p(region)}``."""

    weight: Callable[[np.ndarray], np.ndarray] = PowerWeight(0.0)
    region: str = "all"
    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"exponent p must be >= 1, got {self.p}")
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")


def check_same_grid(*objs) -> RadialGrid:
    grids = [o.grid for o in objs]
    g0 = grids[0]
    for g in grids[1:]:
        if g != g0:
            raise GridMismatchError(f"grid mismatch: {g0} vs {g}")
    return g0


@dataclass(frozen=True)
class _AbsPowKernel:
    weight: Callable
    p: float

    def __call__(self, r):
        return np.abs(self.weight(r)) ** self.p


def _graded_origin_cell(kernel, h, lo, hi):
    """Moments of the two hat functions on ``[0, h] ∩ [lo, hi]`` against
    ``sinh(r)**2 * kernel(r)``.

    The kernel may be integrably singular at the origin (``r**p``,
    ``p > -3`` once multiplied by ``sinh**2``, possibly with a log factor);
    the cell is split geometrically towards zero and the remainder below
    the finest level is estimated from the local power law.
    """
    b = min(h, hi)
    if lo > 0.0:
        levels = [(lo, b)]
    else:
        edges = b * 0.5 ** np.arange(_GRADING_LEVELS + 1)
        levels = list(zip(edges[1:], edges[:-1]))
    lo_arr = np.array([a for a, _ in levels])
    hi_arr = np.array([c for _, c in levels])
    mid = 0.5 * (lo_arr + hi_arr)[:, None]
    half = 0.5 * (hi_arr - lo_arr)[:, None]
    r = mid + half * _GL_X[None, :]
    kern = np.sinh(r) ** 2 * kernel(r)
    wts = half * _GL_W[None, :]
    m0 = np.sum(kern * (h - r) / h * wts)
    m1 = np.sum(kern * r / h * wts)
    if lo == 0.0:
        eps = b * 0.5**_GRADING_LEVELS
        k1 = np.sinh(eps) ** 2 * kernel(np.array([eps]))[0]
        k2 = np.sinh(2 * eps) ** 2 * kernel(np.array([2 * eps]))[0]
        if k1 != 0.0 and np.isfinite(k1) and np.isfinite(k2) and k2 / k1 > 0:
            p = np.log2(k2 / k1)
            if p > -1.0:
                m0 += k1 * eps / (p + 1.0)
    return m0, m1


@functools.lru_cache(maxsize=256)
def product_weights(grid: RadialGrid, kernel: Callable | None, lo: float, hi: float) -> np.ndarray:
    """Node weights ``W`` with ``sum(W * G) ≈ ∫_lo^hi G(r) sinh(r)^2 K(r) dr``.

    ``G`` is interpolated piecewise-linearly through the interior samples,
    with ``G(0) = (4 G_1 - G_2) / 3`` (radial functions are even in ``r``)
    and ``G(rmax)`` extrapolated linearly.  ``K`` is evaluated exactly by
    Gauss-Legendre on every cell, the cell at the origin is geometrically
    graded, and cells are split at ``lo``, ``hi`` and ``r = 1``, so
    integrable singularities of ``K`` at 0 and kinks at 1 cost nothing.
    """
    if kernel is None:
        kernel = _one
    h, n = grid.h, grid.n
    ext = np.zeros(n + 1)

    if lo < h:
        m0, m1 = _graded_origin_cell(kernel, h, lo, hi)
        ext[0] += m0
        ext[1] += m1

    start = max(lo, h)
    if hi > start:
        edges = np.arange(n + 1) * h
        cuts = [c for c in (lo, hi, 1.0) if start < c < hi]
        edges = np.concatenate([edges[(edges > start) & (edges < hi)], [start, hi], cuts])
        edges = np.unique(edges)
        keep = np.concatenate([[True], np.diff(edges) > 1e-12 * h])
        edges = edges[keep]
        a, b = edges[:-1], edges[1:]
        cell = np.clip(np.floor(0.5 * (a + b) / h).astype(int), 0, n - 1)
        mid = 0.5 * (a + b)[:, None]
        half = 0.5 * (b - a)[:, None]
        r = mid + half * _GL_X[None, :]
        kern = np.sinh(r) ** 2 * kernel(r) * half * _GL_W[None, :]
        xl = (cell * h)[:, None]
        right = np.sum(kern * (r - xl) / h, axis=1)
        left = np.sum(kern, axis=1) - right
        np.add.at(ext, cell, left)
        np.add.at(ext, cell + 1, right)

    w = ext[1:n].copy()
    w[0] += 4.0 / 3.0 * ext[0]
    w[1] -= 1.0 / 3.0 * ext[0]
    w[-1] += 2.0 * ext[n]
    w[-2] -= ext[n]
    w.setflags(write=False)
    return w


def _one(r):
    return np.ones_like(r)


def integrate_measure(f: RadialField, kernel: Callable | None = None, region: str = "all") -> float:
    """Hyperbolic volume integral ``4*pi * ∫ f(r) K(r) sinh(r)^2 dr``.

    Without a kernel over the whole domain this is the composite trapezoid
    rule on the interior nodes: the integrand vanishes at ``r = 0`` and its
    value at ``rmax`` is extrapolated linearly.  For smooth radial (even)
    integrands that decay before ``rmax`` the rule is spectrally accurate.

    With an analytic ``kernel`` (for example a singular power of ``r``) or
    a restricted ``region``, product integration is used instead; see
    :func:`product_weights`.
    """
    grid = f.grid
    if kernel is None and region == "all":
        return float(integrate_values(grid, f.values))
    lo, hi = grid.region_bounds(region)
    if hi <= lo:
        return 0.0
    return FOUR_PI * float(np.dot(product_weights(grid, kernel, lo, hi), f.values))


def integrate_values(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Batched trapezoid form of :func:`integrate_measure` along the last axis."""
    g = values * grid.sinh**2
    g_end = 2.0 * g[..., -1] - g[..., -2]
    return FOUR_PI * grid.h * (np.sum(g, axis=-1) + 0.5 * g_end)


def weighted_norm(f: RadialField, d: WeightedRegionNorm) -> float:
    """``|| weight * f ||_{L^p(region)}`` under the hyperbolic measure."""
    grid = f.grid
    mask = grid.region_mask(d.region)
    if not np.any(mask):
        raise RegionGridMismatch(
            f"region {d.region!r} contains no node of grid rmax={grid.rmax}, n={grid.n}")
    if np.isinf(d.p):
        vals = np.abs(d.weight(grid.nodes[mask]) * f.values[mask])
        return float(np.max(vals))
    g = RadialField(grid, np.abs(f.values) ** d.p)
    total = integrate_measure(g, kernel=_AbsPowKernel(d.weight, d.p), region=d.region)
    return max(total, 0.0) ** (1.0 / d.p)


def radial_derivative(f: RadialField) -> RadialField:
    """Second-order finite-difference ``∂_r f``.

    Centered differences at interior nodes, second-order one-sided stencils
    at the first and last node.  Exact for quadratics.
    """
    v, h = f.values, f.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return RadialField(f.grid, d)


def value_at(f: RadialField, r: float) -> float:
    """Linear interpolation of ``f`` at radius ``r`` (exact at nodes)."""
    j = f.grid.index_of(r)
    if j is not None:
        return float(f.values[j])
    return float(np.interp(r, f.grid.nodes, f.values))


def support_radius(st: WaveState, rel_tol: float = 1e-10) -> float:
    """Largest node where ``|u|`` or ``|u_t|`` exceeds ``rel_tol`` times its peak."""
    amp = np.maximum(np.abs(st.u.values), np.abs(st.ut.values))
    peak = amp.max()
    if peak == 0.0:
        return 0.0
    idx = np.nonzero(amp > rel_tol * peak)[0]
    return float(st.grid.nodes[idx[-1]])
