"""Slow, independent reference computations used to validate the fast paths.

These ship with the library (not only the tests) so the verification suites
can be reproduced from the command line.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Grid


def fd_gradient(u: np.ndarray, grid: Grid) -> np.ndarray:
    """4th-order centered differences with periodic wrap, shape (dim, *shape)."""
    h = grid.spacing
    comps = []
    for axis in range(grid.dim):
        ax = axis - grid.dim  # spatial axes sit at the end
        d = (
            -np.roll(u, -2, axis=ax)
            + 8.0 * np.roll(u, -1, axis=ax)
            - 8.0 * np.roll(u, 1, axis=ax)
            + np.roll(u, 2, axis=ax)
        ) / (12.0 * h)
        comps.append(d)
    return np.stack(comps)


def free_gaussian_field(grid: Grid, t: float) -> np.ndarray:
    """Exact dispersing Gaussian of the free linear flow, unit width at t=0."""
    sigma = 1.0 + 2.0j * t
    r2 = (grid.coords**2).sum(axis=0)
    return sigma ** (-grid.dim / 2.0) * np.exp(-r2 / (2.0 * sigma))


def free_gaussian_mass(n: int) -> float:
    return math.pi ** (n / 2.0)


def free_gaussian_variance(t: float, n: int) -> float:
    return (n / 2.0) * math.pi ** (n / 2.0) * (1.0 + 4.0 * t**2)


def free_gaussian_variance_accel(n: int) -> float:
    return 4.0 * n * math.pi ** (n / 2.0)


def gauge_transform(
    grid: Grid, u: np.ndarray, a_values: np.ndarray, psi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Apply (u, A) -> (e^{i psi} u, A + grad psi) for smooth periodic psi."""
    u_new = np.exp(1j * psi) * u
    a_new = a_values + grid.spectral_gradient(psi).real
    return u_new, a_new


def random_smooth_field(
    grid: Grid, rng: np.random.Generator, k_decay: float = 3.0, real: bool = False
) -> np.ndarray:
    """Random band-concentrated field with Gaussian spectral decay, unit sup scale."""
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs *= np.exp(-grid.k_squared / k_decay**2)
    u = grid.ifft(coeffs)
    if real:
        u = u.real
    scale = np.max(np.abs(u))
    return u / scale if scale > 0 else u


def divergence_free_field(
    grid: Grid, rng: np.random.Generator, k_decay: float = 3.0
) -> np.ndarray:
    """Random smooth real vector field with exactly zero spectral divergence.

    Leray projection in frequency space; useful wherever a test needs a
    gauge-compatible sampled vector potential with no taper tail.
    """
    comps = np.stack(
        [random_smooth_field(grid, rng, k_decay=k_decay, real=True) for _ in range(grid.dim)]
    )
    hats = [grid.fft(comps[i]) for i in range(grid.dim)]
    k = grid._k_broadcast
    k_dot = sum(k[i] * hats[i] for i in range(grid.dim))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(grid.k_squared > 0, k_dot / grid.k_squared, 0.0)
    return np.stack([grid.ifft(hats[i] - k[i] * scale).real for i in range(grid.dim)])
