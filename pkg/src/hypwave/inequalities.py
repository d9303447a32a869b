"""Ensemble probes of Strichartz, radial Sobolev and interpolation bounds.

A bound ``A(f) ≲ B(f)`` is operationalised as: the largest ratio
``A/B`` over a randomized ensemble is finite and does not drift under
grid refinement (or under a longer time horizon for spacetime norms).
No absolute constants are asserted.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .data import rough_series, smooth_bump
from .grid import (
    RadialField,
    RadialGrid,
    WeightedRegionNorm,
    integrate_values,
    power_weight,
    weighted_norm,
)
from .spectral import (
    eigenvalues,
    forward_values,
    inverse_values,
    sobolev_norm_coeffs,
    spectral_derivative,
)

_GAMMA_TOL = 1e-12


class Admissibility(enum.Enum):
    InR = "InR"
    InE = "InE"
    Neither = "Neither"


def _recip(x) -> float:
    return 0.0 if np.isinf(float(x)) else 1.0 / float(x)


@dataclass(frozen=True)
class StrichartzTriple:
    """Exponents ``(p, q)`` of ``L^p_t L^q_x`` and the data regularity ``γ``."""

    p: float
    q: float
    gamma: float

    @property
    def inv_p(self) -> float:
        return _recip(self.p)

    @property
    def inv_q(self) -> float:
        return _recip(self.q)

    def in_range(self) -> bool:
        return self.p >= 2 and self.q >= 2

    def in_r(self) -> bool:
        """``1/p + 1/q ≤ 1/2``, ``p, q ≥ 2``, ``γ = 3/2 - 1/p - 3/q``."""
        if not self.in_range():
            return False
        a, b = self.inv_p, self.inv_q
        return a + b <= 0.5 + _GAMMA_TOL and abs(self.gamma - (1.5 - a - 3 * b)) <= _GAMMA_TOL

    def in_e(self) -> bool:
        """``1/2 - 1/p ≤ 1/q ≤ 1/2 - 1/(3p)`` with ``p > 2``, or ``0 < 1/q < 1/3``
        with ``p = 2``; and ``γ = 1 - 2/q``."""
        if not self.in_range():
            return False
        a, b = self.inv_p, self.inv_q
        if abs(self.gamma - (1.0 - 2.0 * b)) > _GAMMA_TOL:
            return False
        if self.p > 2:
            return 0.5 - a - _GAMMA_TOL <= b <= 0.5 - a / 3 + _GAMMA_TOL
        return 0.0 < b < 1.0 / 3.0

    def as_list(self) -> list:
        return [_json_num(self.p), _json_num(self.q), self.gamma]


def _json_num(x):
    return "inf" if np.isinf(float(x)) else float(x)


def parse_exponent(x) -> float:
    """Accept numbers, ``"inf"`` and fractions such as ``"1/2"``."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return float("inf")
        return float(Fraction(s))
    return float(x)


def strichartz_admissible(t: StrichartzTriple, region: str | None = None):
    """Classify a triple.

    Without ``region`` returns :class:`Admissibility`; ``InR`` takes
    priority when both memberships hold.  With ``region="R"`` or ``"E"``
    returns the membership flag for that set alone, so boundary triples
    lying in both report both through two calls.
    """
    if region is not None:
        if region.upper() == "R":
            return t.in_r()
        if region.upper() == "E":
            return t.in_e()
        raise ValueError(f"region must be 'R' or 'E', got {region!r}")
    if t.in_r():
        return Admissibility.InR
    if t.in_e():
        return Admissibility.InE
    return Admissibility.Neither


def classify(t: StrichartzTriple) -> dict:
    return {"triple": t.as_list(), "membership": strichartz_admissible(t).value,
            "in_R": t.in_r(), "in_E": t.in_e(), "range_ok": t.in_range()}


# -- ensembles ----------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    """Randomized test functions supported in ``r < radius``.

    ``kind="bump"``: even-symmetrised smooth bumps with random centre,
    width and sign.  ``kind="spectral"``: windowed random sine series with
    ``kmax`` modes and coefficients ``∝ L_k^{-decay}``.  Members are
    rescaled to unit ``H^{normalize_sigma}`` norm.
    """

    count: int = 50
    seed: int = 0
    kind: str = "bump"
    decay: float = 1.0
    radius: float = 3.0
    kmax: int = 32
    normalize_sigma: float = 0.0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"ensemble count must be an integer >= 1, got {self.count}")
        if self.kind not in ("bump", "spectral"):
            raise ValueError(f"ensemble kind must be 'bump' or 'spectral', got {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("ensemble radius must be positive")


def ensemble_values(grid: RadialGrid, e: EnsembleSpec) -> np.ndarray:
    """Member samples, shape ``(count, n-1)``; independent of ``n``."""
    rng = np.random.default_rng(e.seed)
    r = grid.nodes
    out = np.empty((int(e.count), r.size))
    for j in range(int(e.count)):
        if e.kind == "bump":
            width = rng.uniform(0.3, 0.5 * e.radius)
            centre = rng.uniform(0.0, e.radius - width)
            sign = rng.choice([-1.0, 1.0])
            out[j] = sign * (smooth_bump((r - centre) / width) + smooth_bump((r + centre) / width))
        else:
            k = np.arange(1, int(e.kmax) + 1)
            lam = 1.0 + (k * np.pi / e.radius) ** 2
            out[j] = rough_series(r, e.radius, lam ** (-e.decay) * rng.standard_normal(k.size))
    nrm = sobolev_norm_coeffs(grid, forward_values(grid, out), e.normalize_sigma)
    return out / nrm[:, None]


# -- Strichartz probe -----------------------------------------------------------

def probe_grid(horizon: float, e: EnsembleSpec, points_per_unit: int = 64) -> RadialGrid:
    """Smallest grid keeping the ensemble clear of the boundary up to ``horizon``."""
    rmax = float(np.ceil(e.radius + horizon + 2.0))
    return RadialGrid(rmax, int(rmax * points_per_unit))


def _spatial_norms(grid: RadialGrid, mod2: np.ndarray, q: float) -> np.ndarray:
    if np.isinf(q):
        return np.sqrt(np.max(mod2, axis=-1))
    return integrate_values(grid, mod2 ** (q / 2)) ** (1.0 / q)


def _time_norm(t: np.ndarray, vals: np.ndarray, p: float) -> np.ndarray:
    """``L^p`` over ``t`` of per-member series ``vals[k, j]`` (trapezoid)."""
    if np.isinf(p):
        return np.max(vals, axis=0)
    y = vals**p
    return np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)[:, None], axis=0) ** (1.0 / p)


def strichartz_study(triples: list[StrichartzTriple], e: EnsembleSpec, horizons: list[float],
                     grid: RadialGrid | None = None, dt_snap: float = 0.02) -> dict:
    """Max ensemble ratios ``||e^{it√L} f||_{L^p L^q([0,T])} / ||f||_{H^γ}``.

    A single pass up to ``max(horizons)`` serves every horizon (prefix
    quadrature) and every triple (shared snapshots).  Returns
    ``{triple_index: {T: ratio}}``.
    """
    for t in triples:
        if strichartz_admissible(t) is Admissibility.Neither:
            raise ValueError(f"triple {t.as_list()} is not admissible")
    horizons = sorted(float(h) for h in horizons)
    if not horizons or horizons[0] <= 0:
        raise ValueError("horizons must be positive")
    tmax = horizons[-1]
    grid = grid or probe_grid(tmax, e)
    c = forward_values(grid, ensemble_values(grid, e))
    om = np.sqrt(eigenvalues(grid))
    steps = int(np.ceil(tmax / dt_snap - 1e-9))
    times = np.arange(steps + 1) * (tmax / steps)
    qs = sorted({float(t.q) for t in triples})
    series = {q: np.empty((times.size, c.shape[0])) for q in qs}
    for k, tk in enumerate(times):
        re = inverse_values(grid, c * np.cos(tk * om))
        im = inverse_values(grid, c * np.sin(tk * om))
        mod2 = re * re + im * im
        for q in qs:
            series[q][k] = _spatial_norms(grid, mod2, q)
    out = {}
    for i, t in enumerate(triples):
        den = sobolev_norm_coeffs(grid, c, t.gamma)
        res = {}
        for hz in horizons:
            m = times <= hz + 1e-9
            res[hz] = float(np.max(_time_norm(times[m], series[float(t.q)][m], float(t.p)) / den))
        out[i] = res
    return out


def strichartz_probe(t: StrichartzTriple, e: EnsembleSpec, T: float,
                     grid: RadialGrid | None = None, dt_snap: float = 0.02) -> float:
    return strichartz_study([t], e, [T], grid, dt_snap)[0][float(T)]


def half_wave_norm_defect(grid: RadialGrid, e: EnsembleSpec, t: float, sigma: float) -> float:
    """Relative change of ``||e^{it√L} f||_{H^σ}`` (real and imaginary parts)."""
    c = forward_values(grid, ensemble_values(grid, e))
    om = np.sqrt(eigenvalues(grid))
    cc, cs = c * np.cos(t * om), c * np.sin(t * om)
    before = sobolev_norm_coeffs(grid, c, sigma)
    after = np.sqrt(sobolev_norm_coeffs(grid, cc, sigma) ** 2 + sobolev_norm_coeffs(grid, cs, sigma) ** 2)
    return float(np.max(np.abs(after - before) / before))


# -- radial Sobolev -------------------------------------------------------------

def radial_sobolev_check(alpha: float, e: EnsembleSpec, grid: RadialGrid) -> dict:
    """Ensemble maxima of ``||sinh(r) f||_∞ / ||f||_{H^α}`` and of the
    pointwise constant ``sinh²(r) f(r)² / (||f||_2 ||(-Δ)^{1/2} f||_2)``.

    Integrating ``-∂_r |f|²`` from ``r`` outwards and applying
    Cauchy-Schwarz gives the pointwise constant ``≤ 2/(4π) = 1/(2π)``.
    """
    if not 0.5 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (1/2, 2), got {alpha}")
    vals = ensemble_values(grid, e)
    c = forward_values(grid, vals)
    sup = np.max(np.abs(vals * grid.sinh), axis=-1)
    ratio = sup / sobolev_norm_coeffs(grid, c, alpha)
    point = sup**2 / (sobolev_norm_coeffs(grid, c, 0.0) * sobolev_norm_coeffs(grid, c, 1.0))
    return {"max_ratio": float(np.max(ratio)), "pointwise_C": float(np.max(point)),
            "pointwise_bound": float(1.0 / (2.0 * np.pi))}


# -- interpolation bounds -------------------------------------------------------

def _norm(f: RadialField, weight_exp: float, region: str, p: float) -> float:
    return weighted_norm(f, WeightedRegionNorm(power_weight(weight_exp), region, p))


def interpolation_ratios(f: RadialField, delta: float, alpha: float) -> dict[str, float]:
    """Per-field quantities entering the interpolation checks."""
    from .spectral import sobolev_norm
    d2 = delta / (2.0 * (2.0 - delta))
    hs = sobolev_norm(f, 0.5 + delta / 2)
    grad = _norm(spectral_derivative(f), 0.0, "le1", 2.0)
    return {
        "l6_weighted": _norm(f, 0.5 - d2, "le1", 6.0) / hs,
        "linf_weighted": _norm(f, 0.5 + alpha / 2, "le1", np.inf) / hs,
        "composite_lhs": _norm(f, -0.5 + d2, "le1", 6.0),
        "composite_a": _norm(f, -1.0 - alpha / 2, "le1", 2.0),
        "composite_b": grad,
    }


def _hardy_field(vals: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Multiply by ``tanh(r)²`` so members vanish at the origin."""
    return vals * np.tanh(r) ** 2


def hardy_ratio(f: RadialField) -> float:
    """``||f / r||_{L²(r≤1)} / ||∂_r f||_{L²}``."""
    return _norm(f, -1.0, "le1", 2.0) / _norm(spectral_derivative(f), 0.0, "all", 2.0)


def fit_theta(lhs, a, b, grid_points: int = 201) -> tuple[float, float]:
    """``θ ∈ [0, 1]`` minimising ``max lhs / (a^θ b^{1-θ})``; returns ``(θ, max ratio)``.

    Members with a vanishing quantity (no mass in the region) carry no
    information and are skipped.
    """
    lhs, a, b = map(np.asarray, (lhs, a, b))
    keep = (lhs > 0) & (a > 0) & (b > 0)
    if not np.any(keep):
        raise ValueError("no ensemble member is nonzero on the region")
    lhs, a, b = lhs[keep], a[keep], b[keep]
    thetas = np.linspace(0.0, 1.0, grid_points)
    la, lb, ll = np.log(a), np.log(b), np.log(lhs)
    worst = np.array([np.max(ll - th * la - (1 - th) * lb) for th in thetas])
    i = int(np.argmin(worst))
    return float(thetas[i]), float(np.exp(worst[i]))


def interpolation_check(e: EnsembleSpec, grid: RadialGrid, delta: float = 0.25,
                        alpha: float = 0.9) -> dict:
    """Ensemble maxima of the weighted ``L⁶`` and ``L∞`` bounds inside the unit
    ball, the Hardy ratio, and the composite ``L⁶`` bound with fitted ``θ``."""
    vals = ensemble_values(grid, e)
    rows = [interpolation_ratios(RadialField(grid, v), delta, alpha) for v in vals]
    hardy = [hardy_ratio(RadialField(grid, _hardy_field(v, grid.nodes))) for v in vals]
    theta, comp = fit_theta([r["composite_lhs"] for r in rows], [r["composite_a"] for r in rows],
                            [r["composite_b"] for r in rows])
    return {
        "l6_weighted": float(max(r["l6_weighted"] for r in rows)),
        "linf_weighted": float(max(r["linf_weighted"] for r in rows)),
        "hardy": float(max(hardy)),
        "composite": comp,
        "composite_theta": theta,
    }


# -- suite -----------------------------------------------------------------------

DEFAULT_TRIPLES = (
    StrichartzTriple(float("inf"), 2.0, 0.0),
    StrichartzTriple(4.0, 4.0, 0.5),
    StrichartzTriple(2.0, 6.0, 2.0 / 3.0),
)

# Boundary triples with their hand-computed membership.
BOUNDARY_TRIPLES = (
    (StrichartzTriple(4, 4, 0.5), Admissibility.InR),
    (StrichartzTriple(2, 4, 0.5), Admissibility.InE),
    (StrichartzTriple(float("inf"), 2, 0.0), Admissibility.InR),
    (StrichartzTriple(2, float("inf"), 1.0), Admissibility.InR),
    (StrichartzTriple(float("inf"), float("inf"), 1.5), Admissibility.InR),
    (StrichartzTriple(6, 3, 1.0 / 3.0), Admissibility.InR),
    (StrichartzTriple(2, 6, 2.0 / 3.0), Admissibility.InE),
    (StrichartzTriple(2, 6, 1.0 / 3.0), Admissibility.Neither),
    (StrichartzTriple(2, 3, 1.0 / 3.0), Admissibility.Neither),
    (StrichartzTriple(3, 3, 1.0 / 6.0), Admissibility.Neither),
)


@dataclass(frozen=True)
class SuiteConfig:
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    alpha_sobolev: float = 0.6
    delta: float = 0.25
    alpha: float = 0.9
    rmax: float = 6.0
    n: int = 768
    horizons: tuple = (10.0, 20.0, 40.0)
    dt_snap: float = 0.02
    triples: tuple = DEFAULT_TRIPLES
    tolerance_scale: float = 1.0

    def replace(self, **kw) -> "SuiteConfig":
        return dataclasses.replace(self, **kw)


def _rel(a: float, b: float) -> float:
    return float(abs(a - b) / abs(b)) if b else float("inf")


def _check(name, params, value, deltas, tol, extra_ok=True) -> dict:
    ok = bool(np.isfinite(value) and extra_ok and all(d <= tol for d in deltas.values()))
    return {"name": name, "parameters": params, "max_ratio": float(value),
            "stability_deltas": deltas, "pass": ok}


def run_suite(cfg: SuiteConfig) -> dict:
    """All inequality checks; each entry is ``{name, parameters, max_ratio,
    stability_deltas, pass}``."""
    ts = cfg.tolerance_scale
    e = cfg.ensemble
    coarse = RadialGrid(cfg.rmax, cfg.n)
    fine = coarse.refine(2)
    checks = []

    got = [(t, strichartz_admissible(t)) for t, _ in BOUNDARY_TRIPLES]
    mism = [t.as_list() for (t, want), (_, g) in zip(BOUNDARY_TRIPLES, got) if want is not g]
    checks.append({"name": "strichartz_admissibility", "parameters": {"count": len(got)},
                   "max_ratio": float(len(mism)), "stability_deltas": {}, "pass": not mism,
                   "classification": [classify(t) for t, _ in BOUNDARY_TRIPLES]})

    rs_c = radial_sobolev_check(cfg.alpha_sobolev, e, coarse)
    rs_f = radial_sobolev_check(cfg.alpha_sobolev, e, fine)
    checks.append(_check("radial_sobolev", {"alpha": cfg.alpha_sobolev}, rs_f["max_ratio"],
                         {"n_doubling": _rel(rs_f["max_ratio"], rs_c["max_ratio"])}, 0.05 * ts))
    checks.append(_check("radial_sobolev_pointwise", {"bound": 2.0}, rs_f["pointwise_C"],
                         {"n_doubling": _rel(rs_f["pointwise_C"], rs_c["pointwise_C"])}, 0.05 * ts,
                         extra_ok=rs_f["pointwise_C"] <= 2.0))

    ic = interpolation_check(e, coarse, cfg.delta, cfg.alpha)
    fc = interpolation_check(e, fine, cfg.delta, cfg.alpha)
    for key in ("l6_weighted", "linf_weighted", "hardy", "composite"):
        params = {"delta": cfg.delta, "alpha": cfg.alpha}
        if key == "composite":
            params["theta"] = fc["composite_theta"]
        checks.append(_check(f"interpolation_{key}", params, fc[key],
                             {"n_doubling": _rel(fc[key], ic[key])}, 0.10 * ts))

    hz = list(cfg.horizons)
    study = strichartz_study(list(cfg.triples), e, hz, dt_snap=cfg.dt_snap)
    for i, t in enumerate(cfg.triples):
        vals = study[i]
        deltas = {f"T{hz[k]:g}_to_T{hz[k + 1]:g}": _rel(vals[hz[k + 1]], vals[hz[k]])
                  for k in range(len(hz) - 1)}
        checks.append(_check("strichartz_probe", {"triple": t.as_list(),
                                                  "horizons": {f"{k:g}": v for k, v in vals.items()}},
                             vals[hz[-1]], deltas, 0.10 * ts))

    defect = half_wave_norm_defect(probe_grid(hz[-1], e), e, hz[-1], 1.0)
    checks.append({"name": "half_wave_norm_conservation", "parameters": {"sigma": 1.0, "t": hz[-1]},
                   "max_ratio": defect, "stability_deltas": {}, "pass": defect <= 1e-12 * max(ts, 1e-300)})
    return {"checks": checks, "pass": all(c["pass"] for c in checks)}
