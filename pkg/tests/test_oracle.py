"""Reference-computation sanity: the oracles must be right before they judge."""

import numpy as np
import pytest

from magvirial import make_grid
from magvirial.oracle import (
    fd_gradient,
    free_gaussian_field,
    free_gaussian_mass,
    free_gaussian_variance,
    free_gaussian_variance_accel,
    gauge_transform,
    random_smooth_field,
)
from magvirial.potentials import field_matrix_sampled


def test_fd_gradient_constant():
    grid = make_grid(2, 5.0, 16)
    assert np.max(np.abs(fd_gradient(np.ones(grid.shape), grid))) < 1e-14


def test_fd_gradient_sine():
    grid = make_grid(2, 5.0, 64)
    k = np.pi / grid.extent
    u = np.sin(k * grid.coords[0])
    exact = k * np.cos(k * grid.coords[0])
    err = np.max(np.abs(fd_gradient(u, grid)[0] - exact))
    assert err < k**5 * grid.spacing**4 / 30 * 1.1


def test_fd_gradient_fourth_order_convergence():
    errs = []
    for n in (64, 128):
        grid = make_grid(2, 10.0, n)
        u = np.exp(-grid.coords[0] ** 2)
        exact = -2.0 * grid.coords[0] * u
        errs.append(np.max(np.abs(fd_gradient(u, grid)[0] - exact)))
    order = np.log2(errs[0] / errs[1])
    assert 3.7 <= order <= 4.3


def test_fd_agrees_with_spectral_gradient():
    grid = make_grid(2, 10.0, 128)
    u = np.exp(-grid.coords[0] ** 2).astype(complex)
    diff = np.abs(fd_gradient(u, grid)[0] - grid.spectral_gradient(u)[0])
    # the difference is the oracle's own h^4 truncation error at this spacing
    assert np.max(diff) < 1e-3


def test_free_gaussian_reference_values():
    grid = make_grid(2, 12.0, 128)
    u0 = free_gaussian_field(grid, 0.0)
    assert grid.quadrature(grid.radius**2 * np.abs(u0) ** 2) == pytest.approx(
        free_gaussian_variance(0.0, 2), rel=1e-10
    )
    for t in (0.0, 0.3, 0.7):
        u = free_gaussian_field(grid, t)
        assert grid.norm2(u) == pytest.approx(free_gaussian_mass(2), rel=1e-10)
        assert grid.quadrature(grid.radius**2 * np.abs(u) ** 2) == pytest.approx(
            free_gaussian_variance(t, 2), rel=1e-9
        )
    assert free_gaussian_variance_accel(2) == pytest.approx(8 * np.pi)


def test_free_gaussian_solves_free_flow():
    # i u_t + lap u = 0: compare the time derivative against the Laplacian
    grid = make_grid(2, 12.0, 128)
    dt = 1e-6
    du_dt = (free_gaussian_field(grid, dt) - free_gaussian_field(grid, -dt)) / (2 * dt)
    lap = grid.spectral_laplacian(free_gaussian_field(grid, 0.0))
    assert np.max(np.abs(1j * du_dt + lap)) < 1e-9


def test_gauge_transform_identity_at_zero_phase():
    grid = make_grid(2, 6.0, 32)
    rng = np.random.default_rng(0)
    u = random_smooth_field(grid, rng, k_decay=1.5)
    a = np.zeros((2,) + grid.shape)
    u2, a2 = gauge_transform(grid, u, a, np.zeros(grid.shape))
    assert np.array_equal(u2, u)
    assert np.max(np.abs(a2)) < 1e-14


def test_gauge_transform_preserves_field_matrix():
    grid = make_grid(2, 6.0, 64)
    rng = np.random.default_rng(3)
    u = random_smooth_field(grid, rng, k_decay=1.5)
    psi = random_smooth_field(grid, rng, k_decay=1.5, real=True)
    a = np.stack([
        random_smooth_field(grid, rng, k_decay=1.5, real=True),
        random_smooth_field(grid, rng, k_decay=1.5, real=True),
    ])
    _, a2 = gauge_transform(grid, u, a, psi)
    b_before = field_matrix_sampled(grid, a)
    b_after = field_matrix_sampled(grid, a2)
    assert np.max(np.abs(b_after - b_before)) < 1e-10
