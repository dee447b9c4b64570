"""Potential families, field quantities, and hypothesis evaluators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magvirial import make_grid
from magvirial.potentials import (
    PotentialSpec,
    block_antisym_matrix,
    coulomb_gauge_residual,
    electric_potential,
    electric_radial_derivative,
    field_matrix,
    hypothesis_report,
    kato_norm,
    kato_threshold,
    radial_tangential_norm,
    strichartz_threshold,
    trapping_component,
    vector_potential,
    weighted_trapping,
)

SIGMA = np.array([[0.0, -1.0], [1.0, 0.0]])


def _points(rng, n, count=2000, lo=0.05, hi=6.0):
    x = rng.uniform(-hi, hi, size=(n, count))
    return x[:, np.sqrt((x**2).sum(0)) > lo]


def test_block_matrix_small_dims():
    assert np.array_equal(block_antisym_matrix(2), SIGMA)
    assert np.array_equal(
        block_antisym_matrix(3), np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], float)
    )
    m4 = np.zeros((4, 4))
    m4[:2, :2] = SIGMA
    assert np.array_equal(block_antisym_matrix(4), m4)
    with pytest.raises(ValueError):
        block_antisym_matrix(1)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_block_matrix_rank_and_null_vectors(n):
    m = block_antisym_matrix(n)
    assert np.array_equal(m, -m.T)
    flat = 0 if n == 2 else (1 if n % 2 else 2)
    assert np.linalg.matrix_rank(m) == n - flat
    for j in range(n - flat, n):
        e = np.zeros(n)
        e[j] = 1.0
        assert np.max(np.abs(m @ e)) == 0.0


def test_linear_vector_potential_values():
    spec = PotentialSpec(dim=3, magnetic="linear_M")
    assert np.allclose(vector_potential(spec, np.array([1.0, 2.0, 3.0])), [-1.0, 0.5, 0.0])


def test_scaled_matrix_reproduces_classic_field():
    b = 1.7
    spec = PotentialSpec(dim=3, magnetic="linear_M", matrix=b * block_antisym_matrix(3))
    rng = np.random.default_rng(0)
    x = _points(rng, 3)
    a = vector_potential(spec, x)
    expected = (b / 2.0) * np.stack([-x[1], x[0], np.zeros_like(x[0])])
    assert np.max(np.abs(a - expected)) < 1e-14


def test_singular_families_pointwise():
    spec = PotentialSpec(dim=3, magnetic="singular_r2", epsilon=0.0)
    assert np.allclose(vector_potential(spec, np.array([1.0, 0.0, 0.0])), [0.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        vector_potential(spec, np.zeros(3))
    cyl = PotentialSpec(dim=3, magnetic="singular_cyl", epsilon=0.0)
    with pytest.raises(ValueError):
        vector_potential(cyl, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        PotentialSpec(dim=2, magnetic="singular_r2")


def test_linear_field_matrix_is_generator():
    spec = PotentialSpec(dim=2, magnetic="linear_M")
    rng = np.random.default_rng(1)
    x = _points(rng, 2)
    b = field_matrix(spec, x)
    assert np.max(np.abs(b - SIGMA.reshape(2, 2, 1))) == 0.0


def test_singular_r2_field_direction_and_trapping():
    # the field vector is radial (z-weighted), so its trapping row vanishes
    spec = PotentialSpec(dim=3, magnetic="singular_r2", epsilon=0.0)
    rng = np.random.default_rng(2)
    x = _points(rng, 3, lo=0.5)
    b = field_matrix(spec, x)
    r2 = (x**2).sum(0)
    mag = 2.0 * np.abs(x[2]) * np.sqrt(r2) / r2**2
    frob = np.sqrt((b**2).sum(axis=(0, 1)) / 2.0)
    assert np.max(np.abs(frob - mag)) < 1e-12 * np.max(mag)
    assert np.max(np.abs(trapping_component(spec, x))) < 1e-14


def test_trapping_row_example():
    spec = PotentialSpec(dim=2, magnetic="linear_M")
    bt = trapping_component(spec, np.array([1.0, 0.0]))
    assert np.allclose(bt, [0.0, -1.0])
    assert float((bt * np.array([1.0, 0.0])).sum()) == 0.0


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(2, 5),
    seed=st.integers(0, 10_000),
    family=st.sampled_from(["linear_M", "singular_r2", "singular_cyl", "zero"]),
)
def test_field_matrix_antisymmetric_and_trapping_orthogonal(n, seed, family):
    if family in ("singular_r2", "singular_cyl"):
        n = 3
    spec = PotentialSpec(dim=n, magnetic=family, epsilon=0.1)
    x = _points(np.random.default_rng(seed), n, count=200)
    b = field_matrix(spec, x)
    assert np.max(np.abs(b + b.transpose(1, 0, 2))) < 1e-13
    bt = trapping_component(spec, x)
    assert np.max(np.abs((bt * x).sum(0))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 10_000))
def test_linear_weighted_trapping_cancels_potential(n, seed):
    spec = PotentialSpec(dim=n, magnetic="linear_M")
    x = _points(np.random.default_rng(seed), n, count=500)
    residual = weighted_trapping(spec, x) + 2.0 * vector_potential(spec, x)
    assert np.max(np.abs(residual)) < 1e-12


def test_electric_zero_family():
    spec = PotentialSpec(dim=2)
    x = np.random.default_rng(3).uniform(-1, 1, size=(2, 50))
    assert np.max(np.abs(electric_potential(spec, x))) == 0.0
    assert np.max(np.abs(electric_radial_derivative(spec, x))) == 0.0


def test_inverse_quadratic_radial_derivative_symbolic():
    import sympy as sp

    r = sp.symbols("r", positive=True)
    c = 1.3
    exact = sp.lambdify(r, sp.diff(c / (1 + r**2), r))
    spec = PotentialSpec(dim=3, electric="inverse_quadratic", electric_amplitude=c)
    x = _points(np.random.default_rng(4), 3, lo=0.2)
    rr = np.sqrt((x**2).sum(0))
    assert np.max(np.abs(electric_radial_derivative(spec, x) - exact(rr))) < 1e-12


def test_radial_condition_closed_form():
    c = 0.8
    spec = PotentialSpec(dim=2, electric="inverse_quadratic", electric_amplitude=c)
    x = _points(np.random.default_rng(5), 2)
    r = np.sqrt((x**2).sum(0))
    cond = electric_potential(spec, x) + 0.5 * r * electric_radial_derivative(spec, x)
    assert np.max(np.abs(cond - c / (1 + r**2) ** 2)) < 1e-13
    assert cond.min() >= 0.0


def test_coulomb_gauge_residuals():
    assert coulomb_gauge_residual(PotentialSpec(dim=3, magnetic="linear_M")) == 0.0
    assert coulomb_gauge_residual(PotentialSpec(dim=3, magnetic="singular_r2", epsilon=0.1)) == 0.0
    # sampled field with unit peak divergence: A = (R/pi) sin(pi x1 / R) e1
    grid = make_grid(2, 6.0, 64)
    a = np.zeros((2,) + grid.shape)
    a[0] = grid.extent / np.pi * np.sin(np.pi * grid.coords[0] / grid.extent)
    spec = PotentialSpec(dim=2, magnetic="custom_sampled", magnetic_values=a)
    assert coulomb_gauge_residual(spec, grid) == pytest.approx(1.0, abs=1e-10)


def test_kato_norm_zero_and_errors():
    grid = make_grid(3, 8.0, 32)
    assert kato_norm(np.zeros(grid.shape), grid, radius=2.0) == 0.0
    with pytest.raises(ValueError):
        kato_norm(np.zeros((16,) * 2), make_grid(2, 8.0, 16), radius=2.0)
    with pytest.raises(ValueError):
        kato_norm(np.zeros(grid.shape), grid, radius=-1.0)


def test_kato_norm_calibrated_bump():
    grid = make_grid(3, 8.0, 128)
    rho = 0.5
    bump = (grid.radius <= rho).astype(float)
    ref = 2.0 * np.pi * rho**2  # radial quadrature of the 1/|y| kernel
    assert kato_norm(bump, grid, radius=2.0) == pytest.approx(ref, rel=0.10)


def test_kato_threshold_dim3_is_pi():
    assert kato_threshold(3) == pytest.approx(np.pi, rel=1e-12)
    with pytest.raises(ValueError):
        kato_threshold(2)


def test_radial_tangential_norm_radial_profile():
    # shell-wise sup of a decreasing radial profile gives the upper Riemann
    # sum h / (1 - exp(-h)) for exp(-r), converging to 1 from above
    vals = {}
    for n in (32, 64):
        grid = make_grid(3, 8.0, n)
        h = grid.spacing
        vals[n] = radial_tangential_norm(np.exp(-grid.radius), grid)
        assert vals[n] == pytest.approx(h / (1.0 - np.exp(-h)), rel=0.02)
    assert 1.0 < vals[64] < vals[32]


def test_strichartz_thresholds_exact():
    assert strichartz_threshold(4) == 2.0
    assert strichartz_threshold(5) == 16.0 / 3.0
    assert strichartz_threshold(6) == 10.0
    with pytest.raises(ValueError):
        strichartz_threshold(3)


def test_dim3_strichartz_coefficient():
    report = hypothesis_report(
        PotentialSpec(dim=3), make_grid(3, 6.0, 16), strichartz_m=1.0
    )
    # trap-free, electric-free: lhs is exactly zero and rhs is 1/2
    assert report.schrodinger_lhs == 0.0
    assert report.schrodinger_rhs == 0.5
    coeff = (1.0 + 0.5) ** 2 / 1.0
    assert coeff == 2.25


def test_hypothesis_report_trap_free_passes():
    grid = make_grid(3, 8.0, 64)
    report = hypothesis_report(PotentialSpec(dim=3, magnetic="singular_r2"), grid)
    assert report.sup_w32_trapping < 1e-14
    assert report.schrodinger_ok and report.kato_ok and report.coulomb_ok
    assert report.condition_i_ok and report.electric_nonneg_ok


def test_hypothesis_report_dim4_threshold():
    report = hypothesis_report(PotentialSpec(dim=4, magnetic="linear_M"), make_grid(4, 4.0, 8))
    assert report.schrodinger_rhs == 2.0


def test_hypothesis_report_flags_negative_electric():
    grid = make_grid(3, 8.0, 32)
    spec = PotentialSpec(dim=3, electric="inverse_quadratic", electric_amplitude=-40.0)
    report = hypothesis_report(spec, grid)
    assert not report.electric_nonneg_ok
    assert not report.condition_i_ok
    assert not report.kato_ok  # deep negative well exceeds the Kato threshold
