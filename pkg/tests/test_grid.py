"""Lattice construction, transform calculus, quadrature, and dealiasing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magvirial import make_grid
from magvirial.grid import boundary_mass_fraction


def test_lattice_coordinates_exact():
    grid = make_grid(2, 10.0, 8)
    assert grid.spacing == 2.5
    assert np.array_equal(grid.axis_coords, [-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5])


def test_frequency_lattice_exact():
    grid = make_grid(2, np.pi, 8)
    positive = np.sort(grid.axis_freqs[grid.axis_freqs > 0])
    assert positive[0] == 1.0
    assert set(grid.axis_modes.tolist()) == set(range(-4, 4))


def test_rejects_bad_construction():
    with pytest.raises(ValueError):
        make_grid(3, 10.0, 7)  # not a power of two
    with pytest.raises(ValueError):
        make_grid(2, 10.0, 4)  # below minimum
    with pytest.raises(ValueError):
        make_grid(1, 10.0, 16)
    with pytest.raises(ValueError):
        make_grid(2, -1.0, 16)
    with pytest.raises(ValueError):
        make_grid(6, 1.0, 64)  # memory guard


def test_gradient_of_constant_vanishes():
    grid = make_grid(2, 5.0, 16)
    u = np.ones(grid.shape, dtype=complex)
    assert np.max(np.abs(grid.spectral_gradient(u))) < 1e-14


def test_gradient_eigenfunction():
    grid = make_grid(2, 7.0, 32)
    k = np.pi / grid.extent
    u = np.exp(1j * k * grid.coords[0])
    du = grid.spectral_gradient(u)
    assert np.max(np.abs(du[0] - 1j * k * u)) < 1e-12
    assert np.max(np.abs(du[1])) < 1e-12


def test_laplacian_of_constant_and_mode():
    grid = make_grid(2, 6.0, 16)
    assert np.max(np.abs(grid.spectral_laplacian(np.ones(grid.shape, complex)))) < 1e-13
    kx, ky = 2 * np.pi / grid.extent, 3 * np.pi / grid.extent
    u = np.exp(1j * (kx * grid.coords[0] + ky * grid.coords[1]))
    lap = grid.spectral_laplacian(u)
    assert np.max(np.abs(lap + (kx**2 + ky**2) * u)) < 1e-11


def test_laplacian_composes_gradient():
    grid = make_grid(2, 10.0, 128)
    u = np.exp(-(grid.coords**2).sum(0)).astype(complex)
    lap = grid.spectral_laplacian(u)
    div_grad = sum(
        grid.spectral_derivative(g, axis)
        for axis, g in enumerate(grid.spectral_gradient(u))
    )
    assert np.max(np.abs(lap - div_grad)) <= 1e-10 * np.max(np.abs(lap))


def test_quadrature_box_volume():
    grid = make_grid(2, 3.0, 16)
    assert grid.quadrature(np.ones(grid.shape)) == pytest.approx(36.0, rel=1e-14)


@pytest.mark.parametrize("dim, exact", [(2, np.pi), (3, np.pi**1.5)])
def test_quadrature_gaussian(dim, exact):
    grid = make_grid(dim, 10.0, 128)
    val = grid.quadrature(np.exp(-(grid.coords**2).sum(0)))
    assert abs(val - exact) / exact < 1e-10


def test_dealias_identity_on_band_limited():
    grid = make_grid(2, 5.0, 32)
    cut = grid.points // 3
    rng = np.random.default_rng(1)
    coeffs = np.zeros(grid.shape, dtype=complex)
    inside = np.abs(grid.axis_modes) <= cut
    block = rng.standard_normal((inside.sum(), inside.sum()))
    coeffs[np.ix_(inside, inside)] = block
    u = grid.ifft(coeffs)
    assert np.max(np.abs(grid.dealias(u) - u)) < 1e-13


def test_dealias_kills_highest_mode():
    grid = make_grid(2, 5.0, 16)
    k_max = np.pi / grid.extent * (grid.points // 2)
    u = np.exp(1j * k_max * grid.coords[0])
    assert np.max(np.abs(grid.dealias(u))) < 1e-13


def test_dealias_idempotent_on_random_field():
    grid = make_grid(2, 5.0, 32)
    rng = np.random.default_rng(2)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    once = grid.dealias(u)
    twice = grid.dealias(once)
    assert np.max(np.abs(twice - once)) < 1e-13


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_parseval(seed):
    grid = make_grid(2, 4.0, 32)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    quad = grid.quadrature(np.abs(u) ** 2)
    spectral = (np.abs(grid.fft(u)) ** 2).sum() * grid.spacing**2 / grid.size
    assert abs(quad - spectral) / quad < 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_calculus_linearity(seed, a, b):
    grid = make_grid(2, 4.0, 16)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    combined = grid.spectral_laplacian(a * u + b * v)
    split = a * grid.spectral_laplacian(u) + b * grid.spectral_laplacian(v)
    scale = max(1.0, np.max(np.abs(split)))
    assert np.max(np.abs(combined - split)) / scale < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_dealias_norm_nonincreasing(seed):
    grid = make_grid(2, 4.0, 16)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    assert grid.norm2(grid.dealias(u)) <= grid.norm2(u) + 1e-12


def test_boundary_mass_fraction():
    grid = make_grid(2, 10.0, 64)
    centered = np.exp(-(grid.coords**2).sum(0))
    assert boundary_mass_fraction(grid, centered) < 1e-12
    shell = (grid.radius > 9.5).astype(float)
    assert boundary_mass_fraction(grid, shell) == 1.0
    assert boundary_mass_fraction(grid, np.zeros(grid.shape)) == 0.0
