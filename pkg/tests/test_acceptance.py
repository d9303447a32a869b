"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written to the terminal even when output capture is on.  Two sub-checks
of criterion 5 compare against reference coefficients that disagree with
the exact weights; they are implemented at their stated tolerance and
marked as strict expected failures.
"""
import json

import numpy as np
import pytest

from hypwave.cli import main
from hypwave.data import DataSpec, make_initial_data
from hypwave.grid import RadialField, RadialGrid, radial_derivative
from hypwave.inequalities import (
    BOUNDARY_TRIPLES,
    Admissibility,
    EnsembleSpec,
    StrichartzTriple,
    strichartz_admissible,
    strichartz_study,
)
from hypwave.morawetz import (
    LaplacianProfile,
    build_weight,
    morawetz_derivative_claimed,
    morawetz_potential,
    validate_conditions,
    weight_tables,
)
from hypwave.solver import IntegratorConfig, evolve, step, trajectory
from hypwave.spectral import (
    apply_multiplier,
    basis_function,
    bernstein_envelope,
    bernstein_ratio,
    forward_values,
    inverse_values,
    sobolev_norm,
)
from hypwave.truncation import TruncationConfig, prepare, run_experiment, spacetime_ratio, split_data

from conftest import random_field

INF = float("inf")


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        return ok
    return emit


def within(x, target, rel):
    return abs(x / target - 1.0) <= rel


# -- shared truncation runs -------------------------------------------------------

@pytest.fixture(scope="session")
def truncation_runs():
    base = TruncationConfig()
    cfgs = {
        "default": base,
        "h_refined": base.replace(n=2 * base.n),
        "dt_refined": base.replace(dt=base.dt / 2, observer_stride=2 * base.observer_stride),
        "long": base.replace(rmax=24.0, n=6144, t_final=20.0),
    }
    return {name: (cfg, *run_experiment(cfg)) for name, cfg in cfgs.items()}


# -- 1 ------------------------------------------------------------------------------

def polar_laplacian_fd(u):
    g, h = u.grid, u.grid.h
    v = np.concatenate([[u.values[0]], u.values, [0.0]])
    return (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2 + 2 * g.coth * (v[2:] - v[:-2]) / (2 * h)


def test_c01_spectral_core(verdict):
    rng = np.random.default_rng(1)
    worst_rt = worst_pv = 0.0
    for n in [2**k for k in range(8, 15)]:
        g = RadialGrid(10.0, n)
        vals = rng.standard_normal(n - 1) / g.sinh
        c = forward_values(g, vals)
        worst_rt = max(worst_rt, np.max(np.abs(inverse_values(g, c) - vals)) / np.max(np.abs(vals)))
        w2 = g.h * np.sum((g.sinh * vals) ** 2)
        worst_pv = max(worst_pv, abs(np.sum(c**2) - w2) / w2)
    errs = []
    for n in (512, 1024, 2048):
        u = basis_function(RadialGrid(8.0, n), 3)
        errs.append(np.max(np.abs(apply_multiplier(u, lambda L: L).values + polar_laplacian_fd(u))))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = worst_rt <= 1e-12 and worst_pv <= 1e-12 and all(abs(r - 4) <= 0.3 for r in ratios)
    assert verdict("criterion 1 spectral core", ok,
                   f"roundtrip {worst_rt:.2e}, parseval {worst_pv:.2e}, fd ratios {ratios[0]:.3f} {ratios[1]:.3f}")


# -- 2 ------------------------------------------------------------------------------

def test_c02_poincare(verdict):
    rng = np.random.default_rng(2)
    g = RadialGrid(6.0, 512)
    sigmas = np.linspace(-2.0, 2.0, 41)
    worst = -np.inf
    for _ in range(100):
        u = random_field(g, rng)
        norms = np.array([sobolev_norm(u, s) for s in sigmas])
        worst = max(worst, np.max(norms[:-1] / norms[1:] - 1.0))
    ok = worst <= 1e-12
    assert verdict("criterion 2 Poincare monotonicity", ok, f"max excess {worst:.2e} over 100 fields")


# -- 3 ------------------------------------------------------------------------------

def test_c03_bernstein(verdict):
    rng = np.random.default_rng(3)
    g = RadialGrid(6.0, 256)
    margins = {"lt": np.inf, "geq": np.inf}
    for _ in range(1000):
        u = random_field(g, rng)
        s = 10 ** rng.uniform(-5, 1)
        beta = rng.uniform(0, 1.5)
        theta = rng.uniform(0.01, 0.99)
        for form in margins:
            m = bernstein_envelope(theta, form) - bernstein_ratio(beta, beta + theta, s, u, form)
            margins[form] = min(margins[form], m)
    ok = all(m >= 0 for m in margins.values())
    assert verdict("criterion 3 Bernstein envelopes", ok,
                   f"min margin lt {margins['lt']:.3e}, geq {margins['geq']:.3e} over 1000 draws")


# -- 4 ------------------------------------------------------------------------------

def test_c04_energy_conservation(verdict):
    g = RadialGrid(8.0, 4096)
    st = make_initial_data(g, DataSpec("bump", amplitude=2.0, radius=1.5))
    drift = {}
    for dt in (1e-3, 5e-4):
        e = evolve(st, IntegratorConfig(dt=dt, t_final=5.0, observer_stride=int(round(0.05 / dt))))["E"]
        drift[dt] = np.max(np.abs(e - e[0])) / e[0]
    ratio = drift[1e-3] / drift[5e-4]
    ok = drift[1e-3] <= 1e-6 and abs(ratio / 4 - 1) <= 0.2
    assert verdict("criterion 4 energy conservation", ok,
                   f"drift {drift[1e-3]:.3e} at dt 1e-3, halving ratio {ratio:.3f}")


# -- 5 ------------------------------------------------------------------------------

def test_c05a_a1_closed_forms(verdict):
    g = RadialGrid(10.0, 4096)
    w = build_weight("A1", g)
    r = g.nodes
    ap = (np.sinh(r) * np.cosh(r) - r) / (2 * np.sinh(r) ** 2)
    app = (r * np.cosh(r) - np.sinh(r)) / np.sinh(r) ** 3
    err = max(np.max(np.abs(w.a_prime - ap)), np.max(np.abs(w.a_double_prime - app)))
    fd = []
    for n in (1024, 2048):
        gg = RadialGrid(4.0, n)
        ww = build_weight("A1", gg)
        inner = (gg.nodes > 0.2) & (gg.nodes < 3.8)
        fd.append(np.max(np.abs(radial_derivative(RadialField(gg, ww.a_prime)).values - ww.a_double_prime)[inner]))
    ok = err <= 1e-10 and abs(fd[0] / fd[1] - 4) <= 0.5
    assert verdict("criterion 5a A1 closed forms", ok, f"max error {err:.2e}, fd ratio {fd[0] / fd[1]:.3f}")


def test_c05b_a1_small_r(verdict):
    v = weight_tables(LaplacianProfile(0.0), np.array([1e-3]))["a_double_prime"][0] * 3
    assert verdict("criterion 5b A1 hessian ratio at r=1e-3", within(v, 1.0, 1e-2), f"ratio to 1/3 is {v:.6f}")


@pytest.mark.xfail(strict=True, reason="the exact large-r form is 4(r-1)e^{-2r}; ratio is 14/15 at r=15")
def test_c05c_a1_large_r(verdict):
    r = 15.0
    v = weight_tables(LaplacianProfile(0.0), np.array([r]))["a_double_prime"][0] / (4 * r * np.exp(-2 * r))
    assert verdict("criterion 5c A1 hessian ratio at r=15 (expected failure)", within(v, 1.0, 1e-2),
                   f"ratio to 4r e^(-2r) is {v:.6f}")


@pytest.mark.parametrize("alpha", [0.5, 0.9])
def test_c05d_a3_gradient_and_bilaplacian(verdict, alpha):
    r = 1e-2
    tab = weight_tables(LaplacianProfile(alpha), np.array([r]))
    g_ratio = tab["a_prime"][0] / r ** (1 - alpha) * (3 - alpha)
    b_ratio = -tab["bilap_a"][0] * r ** (2 + alpha) / (alpha * (1 - alpha))
    ok = within(g_ratio, 1.0, 1e-2) and within(b_ratio, 1.0, 1e-2)
    assert verdict(f"criterion 5d A3 alpha={alpha} gradient and bilaplacian coefficients", ok,
                   f"ratios {g_ratio:.5f} {b_ratio:.5f}")


@pytest.mark.xfail(strict=True, reason="exact hessian coefficient is (1-alpha)/(3-alpha), half the reference")
@pytest.mark.parametrize("alpha", [0.5, 0.9])
def test_c05e_a3_hessian(verdict, alpha):
    r = 1e-2
    v = weight_tables(LaplacianProfile(alpha), np.array([r]))["a_double_prime"][0] / r ** (-alpha)
    ref = 2 - 4 / (3 - alpha)
    assert verdict(f"criterion 5e A3 alpha={alpha} hessian coefficient (expected failure)",
                   within(v, ref, 1e-2), f"measured {v:.5f}, reference {ref:.5f}")


def test_c05f_a2_fails_only_near_origin(verdict):
    g = RadialGrid(10.0, 4096)
    rep = validate_conditions(build_weight("A2", g))
    lo, hi = rep.conditions["hessian_positive"].failure_interval()
    tab = weight_tables(LaplacianProfile(1.0), np.array([1e-4, 1e-3]))
    lim = -tab["a_double_prime"] / np.array([1e-4, 1e-3])
    ok = rep.failing == ["hessian_positive"] and lo == g.nodes[0] and hi < 1.25 and np.all(lim > 0)
    assert verdict("criterion 5f A2 fails only hessian near 0", ok,
                   f"failing {rep.failing} on [{lo:.4g}, {hi:.4g}], -a''/r -> {lim[0]:.5f}")


# -- 6 ------------------------------------------------------------------------------

def test_c06_morawetz_identity(verdict):
    g = RadialGrid(8.0, 2048)
    st = make_initial_data(g, DataSpec("bump", amplitude=2.0, radius=1.5))
    w = build_weight("A1", g)
    steps = (2e-3, 1e-3, 5e-4)
    errs = {dt: [] for dt in steps}
    claimed = []
    for snap in trajectory(st, IntegratorConfig(dt=1e-3, t_final=3.0, observer_stride=250)):
        c = morawetz_derivative_claimed(snap, w)
        claimed.append(c)
        for dt in steps:
            fd = (morawetz_potential(step(snap, dt), w) - morawetz_potential(step(snap, -dt), w)) / (2 * dt)
            errs[dt].append((abs(c - fd), abs(fd)))
    rel = {dt: max(a / b for a, b in v) for dt, v in errs.items()}
    tol = max(a for a, _ in errs[1e-3])
    ratios = [rel[2e-3] / rel[1e-3], rel[1e-3] / rel[5e-4]]
    ok = rel[1e-3] <= 1e-2 and all(3.2 <= q <= 4.8 for q in ratios) and min(claimed) >= -tol
    assert verdict("criterion 6 Morawetz identity", ok,
                   f"rel error {rel[1e-3]:.2e} at dt 1e-3, ratios {ratios[0]:.3f} {ratios[1]:.3f}, "
                   f"min claimed {min(claimed):.4g} vs tolerance {tol:.2e}")


# -- 7 ------------------------------------------------------------------------------

def test_c07_smoothing_bound(verdict, truncation_runs):
    vals = {k: truncation_runs[k][2]["cor35_ratio"] for k in ("default", "h_refined", "dt_refined")}
    base = vals["default"]
    ok = np.isfinite(base) and all(within(v, base, 0.10) for v in vals.values())
    assert verdict("criterion 7 smoothing bound constant", ok,
                   ", ".join(f"{k} {v:.6g}" for k, v in vals.items()))


# -- 8 ------------------------------------------------------------------------------

def test_c08_truncation_split(verdict):
    cfg = TruncationConfig()
    _, st, _ = prepare(cfg)
    ratios, add = [], 0.0
    for s in (1e-1, 1e-2, 1e-3, 1e-4):
        sp = split_data(st.u, st.ut, s)
        ratios.append(sp.norms(cfg.delta1)["omega_pair"] / s ** ((cfg.delta - cfg.delta1) / 2))
        for a, b, c in ((sp.omega0, sp.v0, st.u), (sp.omega1, sp.v1, st.ut)):
            add = max(add, np.max(np.abs(a.values + b.values - c.values)) / max(1.0, np.max(np.abs(c.values))))
    var = max(ratios) / min(ratios)
    ok = var <= 2.0 and add <= 1e-13
    assert verdict("criterion 8 truncation split", ok,
                   f"ratios {', '.join(f'{r:.4f}' for r in ratios)}, variation {var:.3f}, additivity {add:.1e}")


# -- 9 ------------------------------------------------------------------------------

def test_c09_energy_equivalence(verdict, truncation_runs):
    lo = min(float(np.min(r[1]["energy_ratio"])) for r in truncation_runs.values())
    hi = max(float(np.max(r[1]["energy_ratio"])) for r in truncation_runs.values())
    ok = 0.5 <= lo and hi <= 2.0
    assert verdict("criterion 9 modified energy equivalence", ok,
                   f"ratio range [{lo:.5f}, {hi:.5f}] over {len(truncation_runs)} runs")


# -- 10 -----------------------------------------------------------------------------

def test_c10_gronwall_closure(verdict, truncation_runs):
    vals = {k: truncation_runs[k][2]["gronwall_closure_C"] for k in ("default", "h_refined", "dt_refined")}
    base = vals["default"]
    passed = all(truncation_runs[k][2]["gronwall_closure_pass"] for k in vals)
    ok = passed and base <= 10 and all(within(v, base, 0.20) for v in vals.values())
    assert verdict("criterion 10 Gronwall closure", ok, ", ".join(f"{k} C={v:.6g}" for k, v in vals.items()))


# -- 11 -----------------------------------------------------------------------------

def test_c11_spacetime_bound(verdict, truncation_runs):
    ledger = truncation_runs["long"][1]
    vals = {T: spacetime_ratio(ledger, T)[0] for T in (5.0, 10.0, 20.0)}
    base = vals[5.0]
    ok = all(np.isfinite(v) for v in vals.values()) and all(within(v, base, 0.10) for v in vals.values())
    assert verdict("criterion 11 spacetime L4 bound", ok, ", ".join(f"T={T:g} C={v:.6g}" for T, v in vals.items()))


# -- 12 -----------------------------------------------------------------------------

def by_hand(p, q, gamma):
    ip, iq = (0.0 if p == INF else 1 / p), (0.0 if q == INF else 1 / q)
    if p < 2 or q < 2:
        return Admissibility.Neither
    if ip + iq <= 0.5 and abs(gamma - (1.5 - ip - 3 * iq)) <= 1e-12:
        return Admissibility.InR
    e_range = (p > 2 and 0.5 - ip <= iq <= 0.5 - ip / 3) or (p == 2 and 0 < iq < 1 / 3)
    if e_range and abs(gamma - (1 - 2 * iq)) <= 1e-12:
        return Admissibility.InE
    return Admissibility.Neither


def test_c12_strichartz(verdict):
    mism = [t.as_list() for t, want in BOUNDARY_TRIPLES
            if strichartz_admissible(t) is not want or by_hand(t.p, t.q, t.gamma) is not want]
    named = (strichartz_admissible(StrichartzTriple(4, 4, 0.5)) is Admissibility.InR
             and strichartz_admissible(StrichartzTriple(2, 4, 0.5)) is Admissibility.InE)
    # (2, 6) lies in E with gamma = 1 - 2/6 = 2/3
    triples = [StrichartzTriple(INF, 2, 0.0), StrichartzTriple(4, 4, 0.5), StrichartzTriple(2, 6, 2 / 3)]
    study = strichartz_study(triples, EnsembleSpec(count=50, seed=0), [10.0, 20.0, 40.0])
    stable = all(within(v[20.0], v[10.0], 0.10) and within(v[40.0], v[20.0], 0.10) for v in study.values())
    ok = not mism and named and len(BOUNDARY_TRIPLES) == 10 and stable
    detail = "; ".join(f"{t.as_list()} " + " ".join(f"{v:.4f}" for v in study[i].values())
                       for i, t in enumerate(triples))
    assert verdict("criterion 12 Strichartz classifier and probes", ok,
                   f"{10 - len(mism)}/10 triples classified; {detail}")


# -- 13 -----------------------------------------------------------------------------

def test_c13_determinism(verdict, tmp_path):
    cfgs = {
        "solve": "rmax: 6\nn: 512\ndt: 0.005\nt_final: 0.5\n",
        "truncation": "rmax: 10\nn: 1024\ndt: 0.005\nt_final: 0.5\ns: [0.1, 0.01]\n",
        "inequalities": "ensemble.count: 5\nhorizons: [2, 4]\nn: 384\n",
        "strichartz": "ensemble.count: 5\nhorizons: [2, 4]\np: 4\nq: 4\ngamma: 1/2\n",
    }
    differing = []
    for cmd, text in cfgs.items():
        cfg = tmp_path / f"{cmd}.yaml"
        cfg.write_text(text)
        dirs = [tmp_path / f"{cmd}_{k}" for k in range(2)]
        for d in dirs:
            main([cmd, "--config", str(cfg), "--out", str(d), "--seed", "7"])
        outs = json.loads((dirs[0] / "manifest.json").read_text())["outputs"]
        differing += [f"{cmd}/{f}" for f in outs if (dirs[0] / f).read_bytes() != (dirs[1] / f).read_bytes()]
    dirs = [tmp_path / f"weights_{k}" for k in range(2)]
    for d in dirs:
        main(["weights", "--family", "A3", "--param", "0.9", "--n", "1024", "--out", str(d)])
    differing += [f"weights/{p.name}" for p in dirs[0].iterdir()
                  if p.name != "manifest.json" and p.read_bytes() != (dirs[1] / p.name).read_bytes()]
    ok = not differing
    assert verdict("criterion 13 determinism", ok, "all outputs byte-identical" if ok else f"differ: {differing}")
