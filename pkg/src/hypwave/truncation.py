"""Frequency-truncation experiment with a Morawetz-corrected energy.

Rough data ``(u0, u1)`` is split by the heat flow into a high-frequency
part ``ω = P_{<s} u`` and a smooth remainder ``v = P_{≥s} u``.  Both ``u``
and ``ω`` are evolved as full solutions; ``v = u - ω`` then solves

    v_tt - Δv + v³ = N,    N = -3 (v² ω + v ω²).

Along the run the ledger tracks

    𝓔 = E[v] - c1 M1 - c2 M2 - c3 M3 - c4 M̃

and compares its growth with ``B = ||r^{1/2} ω||²_{L∞(r>1)} 𝓔 + ||ω||_4^4``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .data import DataSpec, make_initial_data
from .grid import (
    RadialField,
    RadialGrid,
    WaveState,
    WeightedRegionNorm,
    check_same_grid,
    integrate_measure,
    power_weight,
    weighted_norm,
)
from .morawetz import (
    MorawetzWeight,
    WeightFamily,
    absorption_threshold,
    build_weight,
    log_cutoff,
    modified_derivative_claimed,
    modified_derivative_terms,
    modified_potential,
    morawetz_derivative_claimed,
    morawetz_derivative_terms,
    morawetz_potential,
)
from .solver import (
    ConfigError,
    IntegratorConfig,
    TimeSeries,
    check_boundary_guard,
    energy,
    trajectory,
)
from .spectral import HeatMode, heat_project, sobolev_norm, upsample

LEDGER_COLUMNS = (
    "t", "E_v", "M1", "M2", "M3", "M_tilde", "mod_energy", "dmod_energy_dt",
    "omega_linf_sq", "omega_l4_4", "bound_B",
    "neg_c1_hessian", "neg_c1_quartic",
    "neg_c2_quartic_inner", "neg_c2_quartic_outer", "neg_c2_bilaplacian",
    "neg_c3_hessian", "neg_c3_quartic_inner", "neg_c3_quartic_outer", "neg_c3_bilaplacian",
    "neg_c4_time_derivative",
    "gronwall_ratio",
    "dmod_energy_dt_identity", "v_l4_4", "E_u", "energy_ratio",
    "omega_h_pos", "omega_t_h_neg",
)

# Spectral upsampling factor for sup-norm diagnostics.
_LINF_UPSAMPLE = 4


@dataclass(frozen=True)
class TruncationConfig:
    delta: float = 0.25
    delta1: float = 0.1
    s: float = 0.01
    c: tuple = (1e-2, 1e-3, 1e-3, 1e-4)
    alpha: float = 0.9
    alpha_tilde: float = 0.5
    rmax: float = 12.0
    n: int = 3072
    dt: float = 1e-3
    t_final: float = 5.0
    seed: int = 0
    data: DataSpec = field(default_factory=lambda: DataSpec(kind="rough"))
    observer_stride: int = 10
    ratio_bound: float = 0.5
    gronwall_constant: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if not 0 < self.delta1 < self.delta / 2:
            raise ConfigError(f"delta1 must lie in (0, delta/2), got {self.delta1}")
        if not self.s > 0:
            raise ConfigError(f"s must be positive, got {self.s}")
        if len(self.c) != 4 or not all(x > 0 for x in self.c):
            raise ConfigError(f"c1..c4 must be four positive numbers, got {self.c}")
        c1, c2, c3, c4 = self.c
        rb = self.ratio_bound
        if not 0 < rb <= 1:
            raise ConfigError(f"ratio_bound must lie in (0, 1], got {rb}")
        if c2 > rb * c1:
            raise ConfigError(f"c2 must be at most ratio_bound * c1 ({rb} * {c1}), got {c2}")
        if c3 > rb * c1:
            raise ConfigError(f"c3 must be at most ratio_bound * c1 ({rb} * {c1}), got {c3}")
        if c4 > rb * min(c2, c3):
            raise ConfigError(f"c4 must be at most ratio_bound * min(c2, c3), got {c4}")
        if not 0 < self.alpha_tilde < self.alpha < 1:
            raise ConfigError(
                f"need 0 < alpha_tilde < alpha < 1, got alpha={self.alpha}, alpha_tilde={self.alpha_tilde}")
        try:
            RadialGrid(self.rmax, self.n)
        except ValueError as exc:
            raise ConfigError(f"rmax/n: {exc}") from None
        IntegratorConfig(dt=self.dt, t_final=self.t_final, observer_stride=self.observer_stride)
        if not self.gronwall_constant > 0:
            raise ConfigError(f"gronwall_constant must be positive, got {self.gronwall_constant}")

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.rmax, self.n)

    @property
    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, t_final=self.t_final, observer_stride=self.observer_stride)

    @property
    def data_spec(self) -> DataSpec:
        return dataclasses.replace(self.data, delta=self.delta, seed=self.seed)

    def replace(self, **kw) -> "TruncationConfig":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class TruncationWeights:
    w1: MorawetzWeight
    w2: MorawetzWeight
    w3: MorawetzWeight
    w4: MorawetzWeight


def build_weights(cfg: TruncationConfig) -> TruncationWeights:
    g = cfg.grid
    return TruncationWeights(
        build_weight(WeightFamily.A1, g),
        build_weight(WeightFamily.A2, g),
        build_weight(WeightFamily.A3, g, cfg.alpha),
        build_weight(WeightFamily.A4, g, cfg.alpha_tilde),
    )


@dataclass(frozen=True, eq=False)
class SplitData:
    omega0: RadialField
    omega1: RadialField
    v0: RadialField
    v1: RadialField

    def __post_init__(self):
        check_same_grid(self.omega0, self.omega1, self.v0, self.v1)

    @property
    def omega_state(self) -> WaveState:
        return WaveState(self.omega0, self.omega1)

    @property
    def v_state(self) -> WaveState:
        return WaveState(self.v0, self.v1)

    def norms(self, delta1: float) -> dict[str, float]:
        """The four norms bounding the two pieces of the split."""
        w0 = sobolev_norm(self.omega0, 0.5 + delta1)
        w1 = sobolev_norm(self.omega1, -0.5 + delta1)
        a0 = sobolev_norm(self.v0, 1.0)
        a1 = sobolev_norm(self.v1, 0.0)
        return {
            "omega0_h_pos": w0, "omega1_h_neg": w1, "omega_pair": float(np.hypot(w0, w1)),
            "v0_h1": a0, "v1_l2": a1, "v_pair": float(np.hypot(a0, a1)),
        }


def split_data(u0: RadialField, u1: RadialField, s: float) -> SplitData:
    """``ω = P_{<s} u``, ``v = P_{≥s} u``; ``ω`` is formed as ``u - v`` so the
    two pieces re-sum to the data up to one rounding."""
    check_same_grid(u0, u1)
    v0 = heat_project(u0, s, HeatMode.GEQ)
    v1 = heat_project(u1, s, HeatMode.GEQ)
    return SplitData(u0 - v0, u1 - v1, v0, v1)


def perturbation_source(v: RadialField, omega: RadialField) -> RadialField:
    """``N = v³ + ω³ - (v + ω)³ = -3 (v² ω + v ω²)``."""
    check_same_grid(v, omega)
    a, b = v.values, omega.values
    return RadialField(v.grid, -3.0 * (a * a * b + a * b * b))


def modified_energy_parts(st_v: WaveState, cfg: TruncationConfig,
                          weights: TruncationWeights) -> dict[str, float]:
    e = energy(st_v)
    m1 = morawetz_potential(st_v, weights.w1)
    m2 = morawetz_potential(st_v, weights.w2)
    m3 = morawetz_potential(st_v, weights.w3)
    mt = modified_potential(st_v, weights.w4)
    c1, c2, c3, c4 = cfg.c
    return {"E": e, "M1": m1, "M2": m2, "M3": m3, "M_tilde": mt,
            "mod_energy": e - c1 * m1 - c2 * m2 - c3 * m3 - c4 * mt}


def modified_energy(st_v: WaveState, cfg: TruncationConfig, weights: TruncationWeights) -> float:
    return modified_energy_parts(st_v, cfg, weights)["mod_energy"]


def omega_sup_outside(omega: RadialField) -> float:
    """``||r^{1/2} ω||²_{L∞(r>1)}`` on a spectrally refined grid."""
    fine = upsample(omega, _LINF_UPSAMPLE)
    r = fine.grid.nodes
    out = r > 1.0
    if not np.any(out):
        return 0.0
    return float(np.max(r[out] * fine.values[out] ** 2))


def _quartic(f: RadialField, weight_exp: float, region: str) -> float:
    if region != "all" and not np.any(f.grid.region_mask(region)):
        return 0.0
    return weighted_norm(f, WeightedRegionNorm(power_weight(weight_exp), region, 4.0)) ** 4


def negative_terms(st_v: WaveState, cfg: TruncationConfig, weights: TruncationWeights) -> dict[str, float]:
    """The sign-definite pieces of ``-Σ c_j dM_j/dt`` (magnitudes, with ``c_j``)."""
    c1, c2, c3, c4 = cfg.c
    v = st_v.u
    t1 = morawetz_derivative_terms(st_v, weights.w1)
    t2 = morawetz_derivative_terms(st_v, weights.w2)
    t3 = morawetz_derivative_terms(st_v, weights.w3)
    t4 = modified_derivative_terms(st_v, weights.w4)
    return {
        "neg_c1_hessian": c1 * t1["hessian"],
        "neg_c1_quartic": c1 * t1["quartic"],
        "neg_c2_quartic_inner": 0.25 * c2 * _quartic(v, -0.25, "le1"),
        "neg_c2_quartic_outer": 0.25 * c2 * _quartic(v, 0.0, "gt1"),
        "neg_c2_bilaplacian": c2 * t2["bilaplacian"],
        "neg_c3_hessian": c3 * t3["hessian"],
        "neg_c3_quartic_inner": 0.25 * c3 * _quartic(v, -cfg.alpha / 4, "le1"),
        "neg_c3_quartic_outer": 0.25 * c3 * _quartic(v, 0.0, "gt1"),
        "neg_c3_bilaplacian": c3 * t3["bilaplacian"],
        "neg_c4_time_derivative": c4 * t4["time_derivative"],
    }


def growth_identity(st_v: WaveState, nl: RadialField, cfg: TruncationConfig,
                    weights: TruncationWeights) -> float:
    """``d𝓔/dt`` from the virial identities: ``<N, v_t> - Σ c_j dM_j/dt``."""
    c1, c2, c3, c4 = cfg.c
    dE = integrate_measure(nl * st_v.ut)
    return (dE
            - c1 * morawetz_derivative_claimed(st_v, weights.w1, nl)
            - c2 * morawetz_derivative_claimed(st_v, weights.w2, nl)
            - c3 * morawetz_derivative_claimed(st_v, weights.w3, nl)
            - c4 * modified_derivative_claimed(st_v, weights.w4, nl))


class GrowthLedger(TimeSeries):
    def __init__(self):
        super().__init__(list(LEDGER_COLUMNS))


def _time_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    if len(t) < 2:
        return np.zeros_like(y)
    if len(t) == 2:
        d = (y[1] - y[0]) / (t[1] - t[0])
        return np.array([d, d])
    return np.gradient(y, t, edge_order=2)


def _safe_ratio(num: float, den: float) -> float:
    """``num/den`` with ``0/0 = 0``; used where both sides vanish for zero data."""
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / den)


def _trapz(t, y) -> float:
    if len(t) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def _prefix(t, y) -> np.ndarray:
    out = np.zeros_like(y)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def prepare(cfg: TruncationConfig):
    grid = cfg.grid
    st_u = make_initial_data(grid, cfg.data_spec)
    split = split_data(st_u.u, st_u.ut, cfg.s)
    return grid, st_u, split


def run_experiment(cfg: TruncationConfig) -> tuple[GrowthLedger, dict]:
    """Co-evolve ``u`` and ``ω``; fill the ledger and summarise the checks."""
    grid, st_u, split = prepare(cfg)
    st_w = split.omega_state
    check_boundary_guard([st_u, st_w], grid.rmax, cfg.t_final)
    weights = build_weights(cfg)
    icfg = cfg.integrator
    ledger = GrowthLedger()
    rows = []
    for su, sw in zip(trajectory(st_u, icfg, check_boundary=False),
                      trajectory(st_w, icfg, check_boundary=False)):
        v = WaveState(su.u - sw.u, su.ut - sw.ut, su.t)
        parts = modified_energy_parts(v, cfg, weights)
        nl = perturbation_source(v.u, sw.u)
        linf = omega_sup_outside(sw.u)
        w4 = integrate_measure(sw.u**4)
        row = {
            "t": su.t, "E_v": parts["E"], "M1": parts["M1"], "M2": parts["M2"],
            "M3": parts["M3"], "M_tilde": parts["M_tilde"], "mod_energy": parts["mod_energy"],
            "omega_linf_sq": linf, "omega_l4_4": w4,
            "dmod_energy_dt_identity": growth_identity(v, nl, cfg, weights),
            "v_l4_4": integrate_measure(v.u**4), "E_u": energy(su),
            "omega_h_pos": sobolev_norm(sw.u, 0.5 + cfg.delta),
            "omega_t_h_neg": sobolev_norm(sw.ut, -0.5 + cfg.delta),
        }
        row.update(negative_terms(v, cfg, weights))
        rows.append(row)

    t = np.array([r["t"] for r in rows])
    mod = np.array([r["mod_energy"] for r in rows])
    dmod = _time_derivative(t, mod)
    for r, d in zip(rows, dmod):
        r["dmod_energy_dt"] = float(d)
        r["bound_B"] = r["omega_linf_sq"] * r["mod_energy"] + r["omega_l4_4"]
        r["gronwall_ratio"] = _safe_ratio(r["dmod_energy_dt"], r["bound_B"])
        r["energy_ratio"] = _safe_ratio(r["mod_energy"], r["E_v"])
        if not all(np.isfinite(v) for v in r.values()):
            raise FloatingPointError(f"non-finite ledger entry at t = {r['t']}")
        ledger.append(r)
    return ledger, summarise(ledger, cfg, split, weights)


def _upto(ledger: GrowthLedger, t_max: float | None) -> np.ndarray:
    t = ledger["t"]
    return np.ones(t.shape, bool) if t_max is None else t <= t_max + 1e-9


def smoothing_ratio(ledger: GrowthLedger, t_max: float | None = None) -> tuple[float, float, float]:
    """``||r^{1/2} ω||²_{L²_t L∞(r>1)} / sup_t ||ω||_{H^{1/2+δ}} ||ω_t||_{H^{-1/2+δ}}``
    over ``[0, t_max]``; returns ``(ratio, lhs, rhs)``."""
    m = _upto(ledger, t_max)
    lhs = _trapz(ledger["t"][m], ledger["omega_linf_sq"][m])
    sob = ledger["omega_h_pos"][m] * ledger["omega_t_h_neg"][m]
    rhs = float(np.max(sob)) if sob.size else 0.0
    return _safe_ratio(lhs, rhs), lhs, rhs


def spacetime_ratio(ledger: GrowthLedger, t_max: float | None = None) -> tuple[float, float, float]:
    """``∫||v||_4^4 / (sup|M1|+|M2|+|M3| + ||r^{1/2}ω||²_{L²L∞} + ∫||ω||_4^4)``
    over ``[0, t_max]``; returns ``(ratio, lhs, rhs)``."""
    m = _upto(ledger, t_max)
    t = ledger["t"][m]
    msum = np.abs(ledger["M1"][m]) + np.abs(ledger["M2"][m]) + np.abs(ledger["M3"][m])
    lhs = _trapz(t, ledger["v_l4_4"][m])
    rhs = float(np.max(msum)) + _trapz(t, ledger["omega_linf_sq"][m]) + _trapz(t, ledger["omega_l4_4"][m])
    return _safe_ratio(lhs, rhs), lhs, rhs


def summarise(ledger: GrowthLedger, cfg: TruncationConfig, split: SplitData,
              weights: TruncationWeights) -> dict:
    t = ledger["t"]
    mod, ev = ledger["mod_energy"], ledger["E_v"]
    linf, w4 = ledger["omega_linf_sq"], ledger["omega_l4_4"]

    ratio = ledger["energy_ratio"]
    live = ev > 0
    eq_dev = float(np.max(np.abs(ratio[live] - 1.0))) if np.any(live) else 0.0
    eq_ok = bool(np.all((ratio[live] >= 0.5) & (ratio[live] <= 2.0)))

    # Gronwall closure: sup_t 𝓔(t) <= C (𝓔(0) exp(∫_0^t ||r^{1/2}ω||²) + ∫_0^t ||ω||_4^4)
    ilinf, iw4 = _prefix(t, linf), _prefix(t, w4)
    local = mod[0] * np.exp(ilinf) + iw4
    c_local = max((_safe_ratio(m, d) for m, d in zip(mod, local)), default=0.0)
    c_global = _safe_ratio(float(np.max(mod)), mod[0] * np.exp(ilinf[-1]) + iw4[-1])

    cor35, cor35_lhs, cor35_rhs = smoothing_ratio(ledger)
    cor46, iv4, cor46_rhs = spacetime_ratio(ledger)

    gr = ledger["gronwall_ratio"]
    c1, c2, c3, c4 = cfg.c
    hess_mix = c1 * weights.w1.a_double_prime + c2 * weights.w2.a_double_prime \
        + c3 * weights.w3.a_double_prime
    phi, _ = log_cutoff(cfg.grid)
    hess_all = hess_mix + c4 * phi * weights.w4.a_double_prime
    report = {
        "parameters": {
            "delta": cfg.delta, "delta1": cfg.delta1, "s": cfg.s, "c": list(cfg.c),
            "alpha": cfg.alpha, "alpha_tilde": cfg.alpha_tilde, "rmax": cfg.rmax, "n": cfg.n,
            "dt": cfg.dt, "t_final": cfg.t_final, "seed": cfg.seed,
            "observer_stride": cfg.observer_stride,
        },
        "split_norms": split.norms(cfg.delta1),
        "split_scaling_ratio": split.norms(cfg.delta1)["omega_pair"] / cfg.s ** ((cfg.delta - cfg.delta1) / 2),
        "gronwall_max_ratio": float(np.max(gr)) if len(gr) else 0.0,
        "gronwall_closure_C": float(c_local),
        "gronwall_closure_C_global": float(c_global),
        "gronwall_closure_pass": bool(c_local <= cfg.gronwall_constant),
        "energy_equivalence_max": eq_dev,
        "energy_equivalence_pass": eq_ok,
        "cor35_ratio": cor35,
        "cor35_lhs": cor35_lhs,
        "cor35_rhs": cor35_rhs,
        "cor46_ratio": cor46,
        "cor46_lhs": iv4,
        "cor46_rhs": cor46_rhs,
        "omega_l4_over_energy": _safe_ratio(iw4[-1], float(mod[0])),
        "identity_vs_fd_max": float(np.max(np.abs(ledger["dmod_energy_dt_identity"] - ledger["dmod_energy_dt"]))),
        "absorption": {
            "threshold_a1_a2": absorption_threshold(weights.w1, weights.w2),
            "threshold_a1_a3": absorption_threshold(weights.w1, weights.w3),
            "c2_over_c1": c2 / c1,
            "c3_over_c1": c3 / c1,
            "min_hessian_c1_c3": float(np.min(hess_mix)),
            "min_hessian_all": float(np.min(hess_all)),
        },
    }
    report["pass"] = bool(eq_ok and report["gronwall_closure_pass"])
    return report
