"""Radial Morawetz weights and the associated virial functionals.

Every weight here is determined by its Laplacian profile

.. math::

    \\Delta a(r) = r^{-\\sigma} \\ (r < 1), \\qquad \\Delta a(r) = 1 \\ (r \\ge 1),

with ``σ = 0`` (A1), ``σ = 1`` (A2), ``σ = α`` (A3) and ``σ = α̃`` (A4).
Inverting the radial Laplacian ``a'' + 2 coth(r) a' = Δa`` with ``a'(0) = 0``
gives

.. math::

    a'(r) = \\frac{1}{\\sinh^2 r} \\int_0^r \\sinh^2(s)\\, \\Delta a(s)\\, ds .

The profile has a kink at ``r = 1`` whenever ``σ > 0``: ``∂_r Δa`` jumps by
``+σ`` there, so ``Δ²a`` carries a surface term
``σ δ(r - 1)`` besides its regular part.  For ``σ = 1`` the profile is the
Newtonian kernel near the origin and ``Δ²a`` also has mass ``-4π δ_0``.
The functionals below include both.
"""
from __future__ import annotations

import csv
import enum
import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .grid import (
    FOUR_PI,
    GridMismatchError,
    RadialField,
    RadialGrid,
    WaveState,
    check_same_grid,
    integrate_measure,
    value_at,
)
from .spectral import spectral_derivative

_GAUSS_POINTS = 12
_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(_GAUSS_POINTS)


class WeightFamily(enum.Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"


class Convention(enum.Enum):
    """Sign convention for the virial identities.

    ``FLOW`` is the identity satisfied by the time derivative of the
    potential along solutions of ``u_tt - Δu + u³ = N``.  ``PRINTED`` keeps
    the signs as usually quoted (``+¼u²Δ²a``, ``+N a' u_r``, ``+½N u Δ²a``),
    which disagree with the flow; it exists so the two can be compared.
    """

    FLOW = "flow"
    PRINTED = "printed"


@dataclass(frozen=True)
class LaplacianProfile:
    """``Δa = r^{-σ}`` inside the unit ball, ``1`` outside."""

    sigma: float

    def lap(self, r):
        r = np.asarray(r, dtype=float)
        if self.sigma == 0.0:
            return np.ones_like(r)
        with np.errstate(divide="ignore"):
            return np.where(r < 1.0, r ** (-self.sigma), 1.0)

    def bilap(self, r):
        """Regular part of ``Δ²a``; right-sided at ``r = 1``."""
        r = np.asarray(r, dtype=float)
        s = self.sigma
        if s == 0.0:
            return np.zeros_like(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = s * (s + 1) * r ** (-s - 2) - 2 * s / np.tanh(r) * r ** (-s - 1)
        return np.where(r < 1.0, inner, 0.0)

    @property
    def interface_jump(self) -> float:
        """Jump of ``∂_r Δa`` across ``r = 1``: the mass of ``Δ²a`` there."""
        return float(self.sigma)

    @property
    def origin_mass(self) -> float:
        """Mass of ``Δ²a`` at the origin, in units of ``4π``.

        ``lim_{r→0} sinh²(r) ∂_r Δa = -σ lim r^{1-σ}``, which is ``-1`` for
        ``σ = 1`` (``1/r`` is the Newtonian kernel) and ``0`` for ``σ < 1``.
        """
        return -1.0 if self.sigma == 1.0 else 0.0


@dataclass(frozen=True)
class LogProfileLaplacian:
    """Regular part of ``Δ(φ Δa)`` with ``φ = log(r) χ(r ≤ 1)``.

    For ``g = r^{-σ} log r``::

        g'  = r^{-σ-1} (1 - σ log r)
        g'' = r^{-σ-2} (σ(σ+1) log r - (2σ+1))

    and ``Δg = g'' + 2 coth(r) g'``.  ``g'`` jumps by ``-1`` at ``r = 1``.
    """

    sigma: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        s = self.sigma
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.log(r)
            g1 = r ** (-s - 1) * (1 - s * lg)
            g2 = r ** (-s - 2) * (s * (s + 1) * lg - (2 * s + 1))
            val = g2 + 2.0 / np.tanh(r) * g1
        return np.where(r < 1.0, val, 0.0)

    interface_jump = -1.0


def _sinh2_over_r2(s):
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    nz = s != 0
    out[nz] = (np.sinh(s[nz]) / s[nz]) ** 2
    return out


@functools.lru_cache(maxsize=16)
def _jacobi(beta: float):
    x, w = roots_jacobi(_GAUSS_POINTS, 0.0, beta)
    return x, w


def _mass_from_origin(profile: LaplacianProfile, hi: np.ndarray) -> np.ndarray:
    """``∫_0^hi sinh²(s) Δa(s) ds`` for ``0 < hi ≤ 1``.

    Gauss-Jacobi with weight ``s^{2-σ}`` against the entire function
    ``sinh²(s)/s²``.
    """
    b = np.asarray(hi, dtype=float)
    beta = 2.0 - profile.sigma
    x, w = _jacobi(beta)
    s = 0.5 * b[:, None] * (1 + x[None, :])
    return (0.5 * b) ** (1 + beta) * np.sum(w * _sinh2_over_r2(s), axis=1)


def _gradient(profile: LaplacianProfile, r: np.ndarray) -> np.ndarray:
    """``a'`` at arbitrary positive radii (any order)."""
    r = np.asarray(r, dtype=float)
    flat = r.ravel()
    order = np.argsort(flat)
    srt = flat[order]
    uniq, inv = np.unique(srt, return_inverse=True)
    mass = _exact_mass(profile, uniq)
    ap = np.empty_like(flat)
    ap[order] = (mass / np.sinh(uniq) ** 2)[inv]
    return ap.reshape(r.shape)


def _exact_mass(profile: LaplacianProfile, pts: np.ndarray) -> np.ndarray:
    """``A`` at sorted unique positive points.

    Inside the ball each point is integrated directly from the origin:
    ``sinh²(s)/s²`` is entire, so one Gauss-Jacobi rule is exact to
    roundoff on ``[0, p]`` for every ``p ≤ 1`` and nothing accumulates.
    """
    inside = pts <= 1.0
    out = np.empty_like(pts)
    if np.any(inside):
        out[inside] = _mass_from_origin(profile, pts[inside])
    if np.any(~inside):
        p = pts[~inside]
        base = _mass_from_origin(profile, np.array([1.0]))[0]
        # sinh² integrates in closed form outside the ball
        out[~inside] = base + 0.25 * (np.sinh(2 * p) - np.sinh(2.0)) - 0.5 * (p - 1.0)
    return out


def weight_tables(profile: LaplacianProfile, r) -> dict[str, np.ndarray]:
    """``a, a', a'', Δa, Δ²a`` (regular part) at positive radii ``r``.

    ``a`` is normalised by ``a(0) = 0``.  ``a'`` is computed from the
    cumulative mass, ``a`` by Gauss quadrature of ``a'`` between
    consecutive sorted radii (Jacobi weight ``s^{1-σ}`` on the first
    interval, since ``a' ~ s^{1-σ}/(3-σ)`` at the origin).
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise ValueError("weight tables need finite positive radii")
    srt = np.unique(r)
    ap = _gradient(profile, srt)

    breaks = np.union1d(srt, [1.0]) if srt[-1] > 1.0 and 1.0 not in srt else srt
    lo = np.concatenate([[0.0], breaks[:-1]])
    pieces = np.empty(len(breaks))
    # first interval: a' = s^{1-σ} * smooth when it lies inside the ball
    b0 = breaks[0]
    if b0 <= 1.0:
        beta = 1.0 - profile.sigma
        x, w = _jacobi(beta)
        s = 0.5 * b0 * (1 + x)
        pieces[0] = (0.5 * b0) ** (1 + beta) * np.sum(w * _gradient(profile, s) / s**beta)
    else:
        s = 0.5 * b0 * (1 + _LEG_X)
        pieces[0] = 0.5 * b0 * np.sum(_LEG_W * _gradient(profile, s))
    if len(breaks) > 1:
        a, b = lo[1:], breaks[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = mid[:, None] + half[:, None] * _LEG_X[None, :]
        pieces[1:] = half * np.sum(_LEG_W * _gradient(profile, s), axis=1)
    a_vals = np.interp(srt, breaks, np.cumsum(pieces))

    idx = np.searchsorted(srt, r)
    lap = profile.lap(srt)
    app = lap - 2.0 / np.tanh(srt) * ap
    return {
        "a": a_vals[idx],
        "a_prime": ap[idx],
        "a_double_prime": app[idx],
        "lap_a": lap[idx],
        "bilap_a": profile.bilap(srt)[idx],
    }


def family_sigma(family: WeightFamily, param: float | None) -> float:
    family = WeightFamily(family)
    if family in (WeightFamily.A1, WeightFamily.A2):
        if param is not None:
            raise ValueError(f"weight family {family.value} takes no parameter")
        return 0.0 if family is WeightFamily.A1 else 1.0
    if param is None:
        raise ValueError(f"weight family {family.value} needs an exponent in (0, 1)")
    param = float(param)
    if not 0.0 < param < 1.0:
        raise ValueError(f"exponent must lie in (0, 1), got {param}")
    return param


@dataclass(frozen=True, eq=False)
class MorawetzWeight:
    family: WeightFamily
    param: float | None
    grid: RadialGrid
    a: np.ndarray
    a_prime: np.ndarray
    a_double_prime: np.ndarray
    lap_a: np.ndarray
    bilap_a: np.ndarray
    profile: LaplacianProfile = field(repr=False)

    @property
    def interface_jump(self) -> float:
        return self.profile.interface_jump

    def table(self) -> np.ndarray:
        """Columns ``r, a, a', a'', Δa, Δ²a``."""
        return np.column_stack([self.grid.nodes, self.a, self.a_prime,
                                self.a_double_prime, self.lap_a, self.bilap_a])


@functools.lru_cache(maxsize=64)
def _cached_weight(family: WeightFamily, grid: RadialGrid, param):
    sigma = family_sigma(family, param)
    prof = LaplacianProfile(sigma)
    tab = weight_tables(prof, grid.nodes)
    for v in tab.values():
        v.setflags(write=False)
    return MorawetzWeight(family, param, grid, profile=prof, **tab)


def build_weight(family: WeightFamily | str, grid: RadialGrid, param: float | None = None) -> MorawetzWeight:
    """Tabulate the Morawetz weight of a family on ``grid``.

    ``param`` is ``α`` for A3 and ``α̃`` for A4; A1 and A2 take none.
    """
    family = WeightFamily(family)
    family_sigma(family, param)
    return _cached_weight(family, grid, None if param is None else float(param))


# -- condition checks ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConditionResult:
    name: str
    failing_r: np.ndarray
    worst_margin: float

    @property
    def passed(self) -> bool:
        return self.failing_r.size == 0

    def failure_interval(self) -> tuple[float, float] | None:
        if self.passed:
            return None
        return float(self.failing_r.min()), float(self.failing_r.max())

    def as_dict(self) -> dict:
        return {"passed": self.passed, "n_failing": int(self.failing_r.size),
                "failure_interval": self.failure_interval(),
                "worst_margin": self.worst_margin}


@dataclass(frozen=True, eq=False)
class ConditionReport:
    family: WeightFamily
    param: float | None
    conditions: dict[str, ConditionResult]
    interface_mass: float

    @property
    def failing(self) -> list[str]:
        return [k for k, c in self.conditions.items() if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failing

    def as_dict(self) -> dict:
        return {"family": self.family.value, "param": self.param,
                "passed": self.passed, "failing": self.failing,
                "interface_mass": self.interface_mass,
                "conditions": {k: c.as_dict() for k, c in self.conditions.items()}}


def validate_conditions(w: MorawetzWeight, gradient_bound: float = 1.0,
                        tol: float = 1e-12) -> ConditionReport:
    """Check bounded gradient, ``Δa ≥ 0``, ``Δ²a ≤ 0`` and a positive Hessian.

    The Hessian of a radial function has eigenvalues ``a''`` (radial) and
    ``coth(r) a'`` (angular); both must be positive.  ``Δ²a`` is tested
    through its regular part; the surface term at ``r = 1`` is reported
    separately as ``interface_mass``.
    """
    r = w.grid.nodes
    margins = {
        "gradient_bounded": gradient_bound - np.abs(w.a_prime),
        "laplacian_nonneg": w.lap_a + tol,
        "bilaplacian_nonpos": -w.bilap_a + tol * np.maximum(1.0, np.abs(w.bilap_a)),
        "hessian_positive": np.minimum(w.a_double_prime, w.a_prime / np.tanh(r)),
    }
    conds = {}
    for name, m in margins.items():
        bad = m <= 0 if name == "hessian_positive" else m < 0
        conds[name] = ConditionResult(name, r[bad].copy(), float(np.min(m)))
    return ConditionReport(w.family, w.param, conds, w.interface_jump)


def absorption_threshold(w1: MorawetzWeight, w2: MorawetzWeight) -> float:
    """Largest ``c₂/c₁`` keeping ``c₁ a₁'' + c₂ a₂'' > 0`` at every node."""
    check_same_grid(w1, w2)
    neg = w2.a_double_prime < 0
    if not np.any(neg):
        return float("inf")
    return float(np.min(w1.a_double_prime[neg] / -w2.a_double_prime[neg]))


def log_domination_constant(alpha_tilde: float, alpha: float) -> float:
    """``sup_{0<r≤1} r^{α-α̃} |log r| = 1 / (e (α - α̃))``."""
    if not 0 < alpha_tilde < alpha < 1:
        raise ValueError("need 0 < alpha_tilde < alpha < 1")
    return 1.0 / (np.e * (alpha - alpha_tilde))


def local_gradient_coefficient(sigma: float) -> float:
    """Limit of ``a'(r) / r^{1-σ}`` as ``r → 0``."""
    return 1.0 / (3.0 - sigma)


def local_hessian_coefficient(sigma: float) -> float:
    """Limit of ``a''(r) / r^{-σ}`` as ``r → 0``: ``1 - 2/(3-σ)``."""
    return (1.0 - sigma) / (3.0 - sigma)


def write_weight_csv(w: MorawetzWeight, path, comments: list[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["r", "a", "a_prime", "a_double_prime", "lap_a", "bilap_a"])
        for row in w.table():
            wr.writerow([f"{x:.17g}" for x in row])


# -- potentials ----------------------------------------------------------------

def _field(grid, values):
    return RadialField(grid, values)


def _weighted(w: MorawetzWeight, values: np.ndarray, part: str) -> float:
    """``∫ values * q`` for ``q`` one of ``a'``, ``Δa``, ``a''``.

    A1 is smooth and uses the node tables with the trapezoid rule; the
    other families have ``r^{-σ}`` singularities and a kink at ``r = 1``
    and go through product quadrature.
    """
    if w.profile.sigma == 0.0:
        table = {"grad": w.a_prime, "lap": w.lap_a, "hess": w.a_double_prime}[part]
        return integrate_measure(_field(w.grid, values * table))
    return integrate_measure(_field(w.grid, values), kernel=WeightKernel(w.profile.sigma, part))


def morawetz_potential(st: WaveState, w: MorawetzWeight) -> float:
    """``M_a = -4π ∫ (u_t a' u_r + u_t u Δa / 2) sinh² r dr``."""
    check_same_grid(st, w)
    ur = spectral_derivative(st.u).values
    u, ut = st.u.values, st.ut.values
    return -(_weighted(w, ut * ur, "grad") + 0.5 * _weighted(w, ut * u, "lap"))


def _surface(g: RadialGrid, f: RadialField) -> float:
    """``4π sinh²(1) f(1)``: integral of ``f`` against ``δ(r - 1)``."""
    if g.rmax <= 1.0:
        return 0.0
    return FOUR_PI * np.sinh(1.0) ** 2 * value_at(f, 1.0)


def origin_value(f: RadialField) -> float:
    """``f(0)`` for an even function: fit ``c0 + c1 r² + c2 r⁴`` to three nodes."""
    v = f.values
    return float((15.0 * v[0] - 6.0 * v[1] + v[2]) / 10.0)


def _bilap_pairing(w: MorawetzWeight, f: RadialField) -> float:
    """``∫ f Δ²a`` including the point masses at ``r = 1`` and the origin."""
    prof = w.profile
    if prof.sigma == 0.0:
        return 0.0
    val = integrate_measure(f, kernel=prof.bilap) + prof.interface_jump * _surface(w.grid, f)
    if prof.origin_mass:
        val += FOUR_PI * prof.origin_mass * origin_value(f)
    return val


def morawetz_derivative_terms(st: WaveState, w: MorawetzWeight, nl: RadialField | None = None,
                              convention: Convention | str = Convention.FLOW) -> dict[str, float]:
    """Individual integrals of the virial identity for ``dM_a/dt``.

    Along ``u_tt - Δu + u³ = N`` (``FLOW``)::

        dM/dt = ∫ a'' u_r² + ¼ ∫ u⁴ Δa - ¼ ∫ u² Δ²a - ∫ N a' u_r - ½ ∫ N u Δa
    """
    convention = Convention(convention)
    g = check_same_grid(st, w) if nl is None else check_same_grid(st, w, nl)
    u = st.u.values
    ur = spectral_derivative(st.u).values
    terms = {
        "hessian": _weighted(w, ur**2, "hess"),
        "quartic": 0.25 * _weighted(w, u**4, "lap"),
    }
    bil = _bilap_pairing(w, _field(g, u**2))
    terms["bilaplacian"] = -0.25 * bil if convention is Convention.FLOW else 0.25 * bil
    if nl is None:
        terms["forcing_gradient"] = 0.0
        terms["forcing_value"] = 0.0
        return terms
    n = nl.values
    grad = _weighted(w, n * ur, "grad")
    if convention is Convention.FLOW:
        terms["forcing_gradient"] = -grad
        terms["forcing_value"] = -0.5 * _weighted(w, n * u, "lap")
    else:
        terms["forcing_gradient"] = grad
        terms["forcing_value"] = 0.5 * _bilap_pairing(w, _field(g, n * u))
    return terms


def morawetz_derivative_claimed(st: WaveState, w: MorawetzWeight, nl: RadialField | None = None,
                                convention: Convention | str = Convention.FLOW) -> float:
    return float(sum(morawetz_derivative_terms(st, w, nl, convention).values()))


# -- modified potential with a logarithmic cutoff -------------------------------

def log_cutoff(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """``φ = log(r) χ(r ≤ 1)`` and ``φ'`` at the nodes."""
    r = grid.nodes
    phi = np.where(r <= 1.0, np.log(r), 0.0)
    dphi = np.where(r < 1.0, 1.0 / r, 0.0)
    return phi, dphi


@dataclass(frozen=True)
class WeightKernel:
    """Weight quantities evaluated exactly at arbitrary radii.

    ``part`` is ``grad`` (``a'``), ``lap`` (``Δa``), ``hess`` (``a''``), or
    a product with the cutoff ``φ = log(r) χ(r ≤ 1)``: ``phi_grad``,
    ``phi_lap``, ``phi_hess``, ``dphi_grad`` (``φ' a'``).  Used as kernels
    for product quadrature, which absorbs the singularities at the origin
    and the kinks and jumps at ``r = 1``.
    """

    sigma: float
    part: str

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        prof = LaplacianProfile(self.sigma)
        if self.part in ("grad", "lap", "hess"):
            if self.part == "lap":
                return prof.lap(r)
            ap = _gradient(prof, r)
            return ap if self.part == "grad" else prof.lap(r) - 2.0 / np.tanh(r) * ap
        out = np.zeros_like(r)
        inside = r < 1.0
        if not np.any(inside):
            return out
        ri = r[inside]
        if self.part == "phi_lap":
            val = np.log(ri) * prof.lap(ri)
        elif self.part == "phi_grad":
            val = np.log(ri) * _gradient(prof, ri)
        elif self.part == "phi_hess":
            val = np.log(ri) * (prof.lap(ri) - 2.0 / np.tanh(ri) * _gradient(prof, ri))
        elif self.part == "dphi_grad":
            val = _gradient(prof, ri) / ri
        else:
            raise ValueError(f"unknown weight kernel part {self.part!r}")
        out[inside] = val
        return out


def _as_modified_weight(grid: RadialGrid, alpha_tilde) -> MorawetzWeight:
    if isinstance(alpha_tilde, MorawetzWeight):
        if alpha_tilde.family is not WeightFamily.A4:
            raise ValueError("modified potential uses an A4 weight")
        if alpha_tilde.grid != grid:
            raise GridMismatchError("weight and state live on different grids")
        return alpha_tilde
    return build_weight(WeightFamily.A4, grid, alpha_tilde)


def _kernel_integral(g: RadialGrid, values: np.ndarray, sigma: float, part: str) -> float:
    return integrate_measure(_field(g, values), kernel=WeightKernel(sigma, part))


def modified_potential(st: WaveState, alpha_tilde) -> float:
    """``M̃ = -4π ∫ φ (v_t a' v_r + v_t v Δa / 2) sinh² r dr`` with the A4 weight."""
    g = st.grid
    w = _as_modified_weight(g, alpha_tilde)
    sig = w.profile.sigma
    v, vt = st.u.values, st.ut.values
    vr = spectral_derivative(st.u).values
    return -(_kernel_integral(g, vt * vr, sig, "phi_grad")
             + 0.5 * _kernel_integral(g, vt * v, sig, "phi_lap"))


def modified_derivative_terms(st: WaveState, alpha_tilde, nl: RadialField | None = None,
                              convention: Convention | str = Convention.FLOW) -> dict[str, float]:
    """Individual integrals of ``dM̃/dt`` along ``v_tt - Δv + v³ = N``.

    ``FLOW``::

        ½∫φ'a' v_t² + ½∫φ'a' v_r² + ∫φ a'' v_r² - ¼∫(φ'a' - φΔa) v⁴
        - ¼∫ v² Δ(φΔa) - ∫ φ a' N v_r - ½∫ φ Δa N v

    ``Δ(φΔa)`` has a regular part (``lower_order``) and a surface term at
    ``r = 1`` from the kink of ``φ`` (``interface``).  ``PRINTED`` drops
    both and uses a unit factor on the last term.
    """
    convention = Convention(convention)
    g = st.grid if nl is None else check_same_grid(st, nl)
    w = _as_modified_weight(g, alpha_tilde)
    sig = w.profile.sigma
    v, vt = st.u.values, st.ut.values
    vr = spectral_derivative(st.u).values
    flow = convention is Convention.FLOW
    v4 = v**4
    terms = {
        "time_derivative": 0.5 * _kernel_integral(g, vt**2, sig, "dphi_grad"),
        "gradient": 0.5 * _kernel_integral(g, vr**2, sig, "dphi_grad"),
        "hessian": _kernel_integral(g, vr**2, sig, "phi_hess"),
        "quartic": -0.25 * (_kernel_integral(g, v4, sig, "dphi_grad")
                            - _kernel_integral(g, v4, sig, "phi_lap")),
    }
    if flow:
        kern = LogProfileLaplacian(sig)
        v2 = _field(g, v**2)
        terms["lower_order"] = -0.25 * integrate_measure(v2, kernel=kern)
        terms["interface"] = -0.25 * kern.interface_jump * _surface(g, v2)
    else:
        terms["lower_order"] = 0.0
        terms["interface"] = 0.0
    if nl is None:
        terms["forcing_gradient"] = 0.0
        terms["forcing_value"] = 0.0
        return terms
    n = nl.values
    terms["forcing_gradient"] = -_kernel_integral(g, n * vr, sig, "phi_grad")
    fac = 0.5 if flow else 1.0
    terms["forcing_value"] = -fac * _kernel_integral(g, n * v, sig, "phi_lap")
    return terms


def modified_derivative_claimed(st: WaveState, alpha_tilde, nl: RadialField | None = None,
                                convention: Convention | str = Convention.FLOW) -> float:
    return float(sum(modified_derivative_terms(st, alpha_tilde, nl, convention).values()))
