"""Sine-spectral calculus for the radial Laplacian on H^3.

For radial ``u`` the substitution ``w = sinh(r) u`` turns ``-Δ`` into
``-∂_r^2 + 1``.  With Dirichlet conditions on ``[0, rmax]`` the
orthonormal eigenfunctions are ``sqrt(2/rmax) sin(k π r / rmax)`` with
eigenvalues ``L_k = 1 + (k π / rmax)^2``, so every function of ``-Δ`` is a
diagonal multiplier on the sine coefficients of ``w``.

Coefficients are normalised by discrete Parseval::

    sum_k what_k**2 == h * sum_j w_j**2     (trapezoid of w^2, exact)

which makes ``||u||_2^2 = 4π sum_k what_k^2`` and
``||u||_{H^σ}^2 = 4π sum_k L_k^σ what_k^2``.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft

from .grid import FOUR_PI, RadialField, RadialGrid, WaveState


@functools.lru_cache(maxsize=64)
def eigenvalues(grid: RadialGrid) -> np.ndarray:
    k = np.arange(1, grid.n)
    lam = 1.0 + (k * np.pi / grid.rmax) ** 2
    lam.setflags(write=False)
    return lam


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Sine coefficients of ``w = sinh(r) u``, modes ``k = 1..n-1``."""

    grid: RadialGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.grid.n - 1,):
            raise ValueError(f"coefficient array has shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalues(self.grid)


# Array-level transforms; operate along the last axis so ensembles batch.

def forward_values(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    w = u * grid.sinh
    return np.sqrt(grid.h) * scipy.fft.dst(w, type=1, norm="ortho", axis=-1)


def inverse_values(grid: RadialGrid, c: np.ndarray) -> np.ndarray:
    w = scipy.fft.dst(c, type=1, norm="ortho", axis=-1) / np.sqrt(grid.h)
    return w / grid.sinh


def forward(u: RadialField) -> SpectralField:
    return SpectralField(u.grid, forward_values(u.grid, u.values))


def inverse(c: SpectralField) -> RadialField:
    return RadialField(c.grid, inverse_values(c.grid, c.coeffs))


def basis_function(grid: RadialGrid, k: int) -> RadialField:
    """``u`` whose ``w`` is the k-th orthonormal sine mode."""
    r = grid.nodes
    w = np.sqrt(2.0 / grid.rmax) * np.sin(k * np.pi * r / grid.rmax)
    return RadialField(grid, w / grid.sinh)


def apply_multiplier(u: RadialField, m: Callable[[np.ndarray], np.ndarray]) -> RadialField:
    """``m(-Δ) u`` for a symbol ``m`` defined on ``[1, ∞)``."""
    lam = eigenvalues(u.grid)
    sym = np.broadcast_to(np.asarray(m(lam), dtype=float), lam.shape)
    if not np.all(np.isfinite(sym)):
        raise ValueError("multiplier symbol is not finite on the grid's eigenvalue range")
    c = forward_values(u.grid, u.values)
    return RadialField(u.grid, inverse_values(u.grid, sym * c))


def sobolev_norm(u: RadialField, sigma: float) -> float:
    """``||(-Δ)^{σ/2} u||_2``."""
    c = forward_values(u.grid, u.values)
    return float(np.sqrt(FOUR_PI * np.sum(eigenvalues(u.grid) ** sigma * c**2)))


def sobolev_norm_coeffs(grid: RadialGrid, c: np.ndarray, sigma: float) -> np.ndarray:
    """Batched ``||(-Δ)^{σ/2} u||_2`` from coefficient arrays (last axis)."""
    return np.sqrt(FOUR_PI * np.sum(eigenvalues(grid) ** sigma * c**2, axis=-1))


class HeatMode(enum.Enum):
    GEQ = "geq"  # e^{sΔ}: low frequencies
    BAND = "band"  # (-sΔ) e^{sΔ}
    LT = "lt"  # 1 - e^{sΔ}: high frequencies


def heat_symbol(s: float, mode: HeatMode) -> Callable[[np.ndarray], np.ndarray]:
    if not s > 0:
        raise ValueError(f"heat-flow time s must be positive, got {s}")
    mode = HeatMode(mode)
    if mode is HeatMode.GEQ:
        return lambda lam: np.exp(-s * lam)
    if mode is HeatMode.BAND:
        return lambda lam: s * lam * np.exp(-s * lam)
    return lambda lam: -np.expm1(-s * lam)


def heat_project(u: RadialField, s: float, mode: HeatMode | str) -> RadialField:
    """Heat-flow frequency projections ``P_{≥s}``, ``P_s`` and ``P_{<s}``.

    ``P_{<s}`` is formed as ``u - P_{≥s} u`` so the two pieces re-sum to
    ``u`` up to a single rounding.
    """
    mode = HeatMode(mode)
    if mode is HeatMode.LT:
        return u - apply_multiplier(u, heat_symbol(s, HeatMode.GEQ))
    return apply_multiplier(u, heat_symbol(s, mode))


def bernstein_ratio(beta: float, alpha: float, s: float, u: RadialField, form: str = "lt") -> float:
    """Normalised Bernstein quotient.

    ``form="lt"``:  ``||(-Δ)^β P_{<s} u|| / (s^{α-β} ||(-Δ)^α u||)``, bounded by 1.
    ``form="geq"``: ``||(-Δ)^α P_{≥s} u|| / (s^{β-α} ||(-Δ)^β u||)``, bounded by
    ``((α-β)/e)^{α-β}``.  See :func:`bernstein_envelope`.
    """
    if not (0 <= beta < alpha < beta + 1):
        raise ValueError(f"need 0 <= beta < alpha < beta + 1, got beta={beta}, alpha={alpha}")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    lam = eigenvalues(u.grid)
    c2 = forward_values(u.grid, u.values) ** 2
    if not np.any(c2):
        raise ValueError("Bernstein ratio undefined for the zero field")
    if form == "lt":
        num = np.sum(lam ** (2 * beta) * np.expm1(-s * lam) ** 2 * c2)
        den = s ** (2 * (alpha - beta)) * np.sum(lam ** (2 * alpha) * c2)
    elif form == "geq":
        num = np.sum(lam ** (2 * alpha) * np.exp(-2 * s * lam) * c2)
        den = s ** (2 * (beta - alpha)) * np.sum(lam ** (2 * beta) * c2)
    else:
        raise ValueError(f"unknown Bernstein form {form!r}")
    return float(np.sqrt(num / den))


def bernstein_envelope(theta: float, form: str = "lt") -> float:
    """Supremum over ``x > 0`` of the per-mode Bernstein symbol, ``θ = α - β``."""
    if form == "lt":
        return 1.0
    return float((theta / np.e) ** theta)


def linear_propagator(grid: RadialGrid, dt: float):
    """Per-mode entries ``(cos, sin/√L, -√L sin)`` of the free flow over ``dt``."""
    om = np.sqrt(eigenvalues(grid))
    c, s = np.cos(dt * om), np.sin(dt * om)
    return c, s / om, -om * s


def propagate_coeffs(grid: RadialGrid, cu: np.ndarray, cut: np.ndarray, dt: float):
    c, s_om, m_om_s = linear_propagator(grid, dt)
    return c * cu + s_om * cut, m_om_s * cu + c * cut


def wave_propagate_linear(st: WaveState, dt: float) -> WaveState:
    """Exact free wave flow ``u_tt = Δu`` over time ``dt`` (any sign)."""
    g = st.grid
    cu = forward_values(g, st.u.values)
    cut = forward_values(g, st.ut.values)
    cu, cut = propagate_coeffs(g, cu, cut, dt)
    return WaveState(RadialField(g, inverse_values(g, cu)),
                     RadialField(g, inverse_values(g, cut)), st.t + dt)


def linear_mode_energy(grid: RadialGrid, cu: np.ndarray, cut: np.ndarray) -> np.ndarray:
    return eigenvalues(grid) * cu**2 + cut**2


def spectral_derivative_values(grid: RadialGrid, c: np.ndarray) -> np.ndarray:
    """``∂_r u`` at the nodes from the sine coefficients of ``w``.

    ``w'`` is a cosine series evaluated with a type-I DCT; then
    ``u_r = (w' - coth(r) w) / sinh(r)``.
    """
    k = np.arange(1, grid.n)
    b = np.zeros(c.shape[:-1] + (grid.n + 1,))
    b[..., 1:-1] = c * np.sqrt(2.0 / grid.rmax) * (k * np.pi / grid.rmax)
    wp = 0.5 * scipy.fft.dct(b, type=1, axis=-1)[..., 1:-1]
    w = scipy.fft.dst(c, type=1, norm="ortho", axis=-1) / np.sqrt(grid.h)
    return (wp - grid.coth * w) / grid.sinh


def spectral_derivative(u: RadialField) -> RadialField:
    c = forward_values(u.grid, u.values)
    return RadialField(u.grid, spectral_derivative_values(u.grid, c))


def upsample(u: RadialField, factor: int) -> RadialField:
    """Band-limited resampling onto ``grid.refine(factor)``.

    The sine modes depend only on ``rmax``, so padding the coefficient
    vector with zeros evaluates the same trigonometric interpolant of
    ``w`` on the finer mesh.
    """
    if factor == 1:
        return u
    fine = u.grid.refine(factor)
    c = np.zeros(fine.n - 1)
    c[: u.grid.n - 1] = forward_values(u.grid, u.values)
    return RadialField(fine, inverse_values(fine, c))


def resample(u: RadialField, grid: RadialGrid) -> RadialField:
    """Spectral transfer between grids sharing ``rmax`` (pads or truncates)."""
    if grid.rmax != u.grid.rmax:
        raise ValueError("resampling needs grids with the same rmax")
    src = forward_values(u.grid, u.values)
    c = np.zeros(grid.n - 1)
    m = min(len(c), len(src))
    c[:m] = src[:m]
    return RadialField(grid, inverse_values(grid, c))
