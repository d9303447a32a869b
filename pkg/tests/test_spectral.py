import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypwave.grid import FOUR_PI, RadialField, RadialGrid, WaveState, integrate_measure
from hypwave.spectral import (
    HeatMode,
    SpectralField,
    apply_multiplier,
    basis_function,
    bernstein_envelope,
    bernstein_ratio,
    eigenvalues,
    forward,
    forward_values,
    heat_project,
    inverse,
    inverse_values,
    linear_mode_energy,
    linear_propagator,
    propagate_coeffs,
    resample,
    sobolev_norm,
    spectral_derivative,
    upsample,
    wave_propagate_linear,
)

from conftest import bump_field, random_field


def polar_laplacian_fd(u: RadialField) -> np.ndarray:
    """``u'' + 2 coth(r) u'`` by centered differences on interior nodes
    (zero Dirichlet value of ``u`` beyond ``rmax`` and the even extension at 0)."""
    g = u.grid
    h = g.h
    v = np.concatenate([[u.values[0]], u.values, [0.0]])  # ghost values; only interior rows used
    d2 = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    d1 = (v[2:] - v[:-2]) / (2 * h)
    return d2 + 2 * g.coth * d1


def test_eigenvalues_at_least_one():
    g = RadialGrid(10.0, 256)
    lam = eigenvalues(g)
    assert lam.min() >= 1.0
    assert lam[2] == pytest.approx(1 + (3 * np.pi / 10) ** 2)


def test_forward_examples():
    g = RadialGrid(5.0, 256)
    assert not np.any(forward(RadialField.zeros(g)).coeffs)
    c = forward(basis_function(g, 3)).coeffs
    assert abs(c[2] - 1.0) < 1e-12
    assert np.max(np.abs(np.delete(c, 2))) < 1e-12


def test_inverse_examples():
    g = RadialGrid(np.pi, 128)
    assert not np.any(inverse(SpectralField(g, np.zeros(127))).values)
    c = np.zeros(127)
    c[0] = 1.0
    u = inverse(SpectralField(g, c)).values
    expect = np.sqrt(2 / np.pi) * np.sin(g.nodes) / np.sinh(g.nodes)
    assert np.max(np.abs(u - expect)) < 1e-12


@pytest.mark.parametrize("n", [2**k for k in range(8, 15)])
def test_roundtrip_and_parseval(n, rng):
    g = RadialGrid(10.0, n)
    u = RadialField(g, rng.standard_normal(n - 1) / g.sinh)
    c = forward_values(g, u.values)
    back = inverse_values(g, c)
    assert np.max(np.abs(back - u.values)) <= 1e-12 * np.max(np.abs(u.values))
    w2 = g.h * np.sum((g.sinh * u.values) ** 2)
    assert abs(np.sum(c**2) - w2) <= 1e-12 * w2
    cr = rng.standard_normal(n - 1)
    assert np.max(np.abs(forward_values(g, inverse_values(g, cr)) - cr)) <= 1e-12 * np.max(np.abs(cr))


def test_multiplier_identity_and_zero_heat():
    g = RadialGrid(6.0, 256)
    u = bump_field(g, 1.0, 2.0)
    assert np.max(np.abs(apply_multiplier(u, lambda L: np.ones_like(L)).values - u.values)) < 1e-12
    assert np.max(np.abs(apply_multiplier(u, lambda L: np.exp(-0.0 * L)).values - u.values)) < 1e-12


def test_multiplier_nonfinite_symbol():
    g = RadialGrid(6.0, 64)
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        apply_multiplier(bump_field(g), lambda L: 1.0 / (L - L[0]))


def test_multiplier_composition_and_commutativity(rng):
    g = RadialGrid(6.0, 256)
    u = random_field(g, rng)
    m1 = lambda L: np.exp(-0.1 * L)  # noqa: E731
    m2 = lambda L: L**0.3  # noqa: E731
    a = apply_multiplier(apply_multiplier(u, m1), m2).values
    b = apply_multiplier(apply_multiplier(u, m2), m1).values
    c = apply_multiplier(u, lambda L: m1(L) * m2(L)).values
    scale = np.max(np.abs(c))
    assert np.max(np.abs(a - b)) < 1e-12 * scale
    assert np.max(np.abs(a - c)) < 1e-12 * scale


def test_laplacian_eigenfunction_fd_oracle():
    k, rmax = 3, 8.0
    errs = []
    for n in (512, 1024, 2048):
        g = RadialGrid(rmax, n)
        u = basis_function(g, k)
        Lu = apply_multiplier(u, lambda L: L).values
        lam = 1 + (k * np.pi / rmax) ** 2
        # roundoff is amplified by 1/sinh(h) at the first nodes
        assert np.max(np.abs(Lu - lam * u.values)) < 1e-11 * lam * np.max(np.abs(u.values)) / g.h
        errs.append(np.max(np.abs(Lu + polar_laplacian_fd(u))))
    assert abs(errs[0] / errs[1] - 4.0) <= 0.3
    assert abs(errs[1] / errs[2] - 4.0) <= 0.3


def test_sobolev_norm_examples():
    g = RadialGrid(5.0, 256)
    assert sobolev_norm(RadialField.zeros(g), 0.7) == 0.0
    k = 4
    lam = 1 + (k * np.pi / 5.0) ** 2
    assert sobolev_norm(basis_function(g, k), 1.0) == pytest.approx(np.sqrt(FOUR_PI * lam), rel=1e-12)


def test_sobolev_zero_is_l2():
    g = RadialGrid(6.0, 512)
    u = bump_field(g, 1.0, 2.5)
    l2 = integrate_measure(u * u) ** 0.5
    assert sobolev_norm(u, 0.0) == pytest.approx(l2, rel=1e-10)


@given(st.integers(0, 2**31), st.floats(-2, 2), st.floats(0, 2))
def test_poincare_monotone(seed, a, gap):
    g = RadialGrid(6.0, 256)
    u = random_field(g, np.random.default_rng(seed))
    assert sobolev_norm(u, a) <= sobolev_norm(u, a + gap) * (1 + 1e-12)


def test_heat_projection_examples(rng):
    g = RadialGrid(6.0, 512)
    u = bump_field(g, 1.0, 2.0)
    u = RadialField(g, u.values / integrate_measure(u * u) ** 0.5)
    assert np.max(np.abs(heat_project(u, 1e-12, "geq").values - u.values)) <= 1e-9
    k, s = 5, 0.3
    b = basis_function(g, k)
    lam = 1 + (k * np.pi / 6.0) ** 2
    assert np.max(np.abs(heat_project(b, s, HeatMode.BAND).values - s * lam * np.exp(-s * lam) * b.values)) < 1e-12
    for s in (0.01, 0.1, 1.0):
        f = random_field(g, rng)
        resid = heat_project(f, s, "lt") + heat_project(f, s, "geq") - f
        assert np.max(np.abs(resid.values)) <= 1e-14 * max(1.0, np.max(np.abs(f.values)))
    with pytest.raises(ValueError):
        heat_project(u, 0.0, "geq")


@given(st.integers(0, 2**31), st.floats(1e-4, 10))
def test_heat_projections_l2_bounded(seed, s):
    g = RadialGrid(6.0, 256)
    u = random_field(g, np.random.default_rng(seed))
    n0 = sobolev_norm(u, 0)
    assert sobolev_norm(heat_project(u, s, "geq"), 0) <= n0 * (1 + 1e-12)
    assert sobolev_norm(heat_project(u, s, "lt"), 0) <= n0 * (1 + 1e-12)
    assert sobolev_norm(heat_project(u, s, "band"), 0) <= np.exp(-1) * n0 * (1 + 1e-12)


def test_bernstein_examples():
    g = RadialGrid(6.0, 256)
    k = 3
    lam = 1 + (k * np.pi / 6.0) ** 2
    b = basis_function(g, k)
    r = bernstein_ratio(0.25, 0.75, 1.0 / lam, b)
    assert r == pytest.approx(1 - np.exp(-1), rel=1e-12)
    u = bump_field(g, 1.0, 2.0)
    r = bernstein_ratio(0.5 - 1e-9, 0.5, 0.05, u)
    lt = heat_project(u, 0.05, "lt")
    assert r == pytest.approx(sobolev_norm(lt, 1.0) / sobolev_norm(u, 1.0), rel=1e-6)
    assert r <= 1.0
    with pytest.raises(ValueError):
        bernstein_ratio(0.5, 0.4, 0.1, u)
    with pytest.raises(ValueError):
        bernstein_ratio(0.0, 1.5, 0.1, u)
    with pytest.raises(ValueError):
        bernstein_ratio(0.0, 0.5, 0.1, RadialField.zeros(g))


@given(st.integers(0, 2**31), st.floats(1e-5, 10), st.floats(0, 1.5), st.floats(0.01, 0.99),
       st.sampled_from(["lt", "geq"]))
def test_bernstein_envelopes(seed, s, beta, theta, form):
    g = RadialGrid(6.0, 256)
    u = random_field(g, np.random.default_rng(seed))
    assert bernstein_ratio(beta, beta + theta, s, u, form) <= bernstein_envelope(theta, form) * (1 + 1e-12)


def test_wave_propagation_examples(rng):
    g = RadialGrid(6.0, 256)
    st0 = WaveState(random_field(g, rng), random_field(g, rng))
    same = wave_propagate_linear(st0, 0.0)
    assert np.max(np.abs(same.u.values - st0.u.values)) < 1e-13
    k = 2
    lam = 1 + (k * np.pi / 6.0) ** 2
    b = basis_function(g, k)
    back = wave_propagate_linear(WaveState(b, RadialField.zeros(g)), 2 * np.pi / np.sqrt(lam))
    assert np.max(np.abs(back.u.values - b.values)) < 1e-11
    assert np.max(np.abs(back.ut.values)) < 1e-11
    fb = wave_propagate_linear(wave_propagate_linear(st0, 0.7), -0.7)
    assert np.max(np.abs(fb.u.values - st0.u.values)) < 1e-12 * np.max(np.abs(st0.u.values))


def test_linear_energy_conservation(rng):
    g = RadialGrid(6.0, 256)
    cu, cut = rng.standard_normal(255), rng.standard_normal(255)
    e0 = np.sum(linear_mode_energy(g, cu, cut))
    for _ in range(1000):
        cu, cut = propagate_coeffs(g, cu, cut, 0.01)
    assert abs(np.sum(linear_mode_energy(g, cu, cut)) - e0) <= 1e-12 * e0


def test_propagator_symplectic():
    g = RadialGrid(6.0, 256)
    c, s_om, m = linear_propagator(g, 0.37)
    assert np.max(np.abs(c * c - s_om * m - 1.0)) < 1e-13


def test_spectral_derivative_against_analytic():
    g = RadialGrid(6.0, 512)
    r = g.nodes
    f = np.exp(-r**2)
    d = spectral_derivative(RadialField(g, f)).values
    assert np.max(np.abs(d + 2 * r * f)) < 1e-8


def test_upsample_and_resample(rng):
    g = RadialGrid(6.0, 128)
    u = random_field(g, rng, kmax=40)
    fine = upsample(u, 4)
    assert fine.grid.n == 512
    assert np.max(np.abs(fine.values[3::4] - u.values)) < 1e-12
    back = resample(fine, g)
    assert np.max(np.abs(back.values - u.values)) < 1e-12
    with pytest.raises(ValueError):
        resample(u, RadialGrid(5.0, 128))
