"""Initial data generators.

All generators return physical-space fields and never depend on ``n``
beyond sampling, so the same descriptor refined on a finer grid gives
the same underlying function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialField, RadialGrid, WaveState
from .spectral import basis_function, sobolev_norm

DATA_KINDS = ("zero", "bump", "mode", "rough")


def smooth_bump(x):
    """``exp(1 - 1/(1 - x²))`` on ``|x| < 1``, zero outside; equals 1 at 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


@dataclass(frozen=True)
class DataSpec:
    """Descriptor of initial data ``(u0, u1)``.

    kind:
        ``zero``, ``bump`` (``amplitude * bump(r/radius)``, velocity
        ``velocity * bump(r/radius)``), ``mode`` (sine mode ``k`` scaled by
        ``amplitude``) or ``rough`` (random sine series on ``[0, radius]``
        with ``kmax`` modes, windowed, rescaled so that
        ``||u0||_{H^{1/2+δ}} = norm`` and ``||u1||_{H^{-1/2+δ}} = velocity_norm``).
    """

    kind: str = "bump"
    amplitude: float = 1.0
    velocity: float = 0.0
    radius: float = 2.0
    k: int = 1
    kmax: int = 128
    norm: float = 1.0
    velocity_norm: float = 1.0
    delta: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ValueError(f"data.kind must be one of {DATA_KINDS}, got {self.kind!r}")
        if not self.radius > 0:
            raise ValueError(f"data.radius must be positive, got {self.radius}")
        if self.kind == "mode" and int(self.k) < 1:
            raise ValueError(f"data.k must be >= 1, got {self.k}")
        if self.kind == "rough":
            if int(self.kmax) < 1:
                raise ValueError(f"data.kmax must be >= 1, got {self.kmax}")
            if self.norm < 0 or self.velocity_norm < 0:
                raise ValueError("data.norm and data.velocity_norm must be nonnegative")
            if not self.delta > 0:
                raise ValueError(f"delta must be positive, got {self.delta}")


def rough_series(r, radius: float, coeffs: np.ndarray) -> np.ndarray:
    """``window(r) * Σ_k c_k sqrt(2/R) sin(kπr/R) / sinh(r)`` with ``R = radius``."""
    r = np.asarray(r, dtype=float)
    k = np.arange(1, len(coeffs) + 1)
    inside = r < radius
    w = np.zeros_like(r)
    ri = r[inside]
    w[inside] = np.sqrt(2.0 / radius) * (np.sin(np.outer(ri, k) * np.pi / radius) @ coeffs)
    return smooth_bump(r / radius) * w / np.sinh(r)


def rough_coefficients(spec: DataSpec, regularity: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian coefficients with ``c_k ∝ L_k^{-regularity/2 - 1/4}``.

    With this decay ``Σ L_k^{regularity} c_k²`` grows like ``log kmax``, so
    the field sits at the edge of ``H^{regularity}`` and is not smoother.
    """
    k = np.arange(1, int(spec.kmax) + 1)
    lam = 1.0 + (k * np.pi / spec.radius) ** 2
    return lam ** (-0.5 * regularity - 0.25) * rng.standard_normal(len(k))


def _normalised(grid: RadialGrid, values: np.ndarray, sigma: float, target: float) -> RadialField:
    f = RadialField(grid, values)
    nrm = sobolev_norm(f, sigma)
    if target == 0.0 or nrm == 0.0:
        return RadialField.zeros(grid)
    return RadialField(grid, values * (target / nrm))


def make_initial_data(grid: RadialGrid, spec: DataSpec) -> WaveState:
    r = grid.nodes
    if spec.kind == "zero":
        return WaveState.zeros(grid)
    if spec.kind == "bump":
        b = smooth_bump(r / spec.radius)
        return WaveState(RadialField(grid, spec.amplitude * b), RadialField(grid, spec.velocity * b))
    if spec.kind == "mode":
        u = spec.amplitude * basis_function(grid, int(spec.k))
        return WaveState(u, RadialField.zeros(grid))
    rng = np.random.default_rng(spec.seed)
    c0 = rough_coefficients(spec, 0.5 + spec.delta, rng)
    c1 = rough_coefficients(spec, -0.5 + spec.delta, rng)
    u0 = _normalised(grid, rough_series(r, spec.radius, c0), 0.5 + spec.delta, spec.norm)
    u1 = _normalised(grid, rough_series(r, spec.radius, c1), -0.5 + spec.delta, spec.velocity_norm)
    return WaveState(u0, u1)
