"""Covariant calculus and energy functionals for H = -(grad - iA)^2 + V."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import Grid
from .potentials import (
    PotentialSpec,
    coulomb_gauge_residual,
    sample_electric,
    smooth_cutoff,
    vector_potential,
)

# taper window as fractions of the box half-width
TAPER_START_FRAC = 0.8
TAPER_END_FRAC = 0.95


def resolve_taper(spec: PotentialSpec, grid: Grid, taper="auto"):
    """Absolute taper radii to use when sampling A on the grid.

    "auto" tapers the unbounded linear family (and honours an explicit
    spec.taper); None disables; a pair of radii is used as given.
    """
    if taper == "auto":
        if spec.taper is not None:
            return spec.taper
        if spec.magnetic == "linear_M":
            return (TAPER_START_FRAC * grid.extent, TAPER_END_FRAC * grid.extent)
        return None
    return taper


@dataclass
class DiscreteHamiltonian:
    """Grid-sampled H: immutable after construction, all operations reentrant."""

    grid: Grid
    spec: PotentialSpec
    vector_values: np.ndarray  # (dim, *shape), taper already applied
    electric_values: np.ndarray  # (*shape)
    gauge_residual: float
    taper_radii: tuple[float, float] | None

    @cached_property
    def vector_sq(self) -> np.ndarray:
        return (self.vector_values**2).sum(axis=0)

    @cached_property
    def magnetic_is_zero(self) -> bool:
        return not self.vector_values.any()

    def covariant_gradient(self, u: np.ndarray) -> np.ndarray:
        """(grad - iA) u, shape (dim, *shape)."""
        return self.grid.spectral_gradient(u) - 1j * self.vector_values * u

    def magnetic_laplacian(self, u: np.ndarray) -> np.ndarray:
        """Coulomb-gauge expansion: lap u - 2i A.grad u - |A|^2 u."""
        g = self.grid
        u_hat = g.fft(u)
        lap = g.ifft(-g.k_squared * u_hat)
        if self.magnetic_is_zero:
            return lap
        a_dot_grad = np.zeros_like(u, dtype=complex)
        for axis in range(g.dim):
            a_dot_grad += self.vector_values[axis] * g.ifft(
                1j * g._k_broadcast[axis] * u_hat
            )
        return lap - 2j * a_dot_grad - self.vector_sq * u

    def magnetic_laplacian_divergence_form(self, u: np.ndarray) -> np.ndarray:
        """(grad - iA) . (grad - iA) u; cross-check path for the Coulomb form."""
        g = self.covariant_gradient(u)
        out = np.zeros_like(u, dtype=complex)
        for axis in range(self.grid.dim):
            out += self.grid.spectral_derivative(g[axis], axis)
            out -= 1j * self.vector_values[axis] * g[axis]
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        return -self.magnetic_laplacian(u) + self.electric_values * u


def sample_hamiltonian(grid: Grid, spec: PotentialSpec, taper="auto") -> DiscreteHamiltonian:
    """Sample (A, V) once: A analytic (tapered), V analytic, residual recorded."""
    spec = spec.with_grid_defaults(grid)
    radii = resolve_taper(spec, grid, taper)
    if spec.magnetic == "custom_sampled":
        if spec.magnetic_values is None:
            raise ValueError("custom_sampled magnetic family without samples")
        a = np.asarray(spec.magnetic_values, dtype=float)
        if a.shape != (grid.dim,) + grid.shape:
            raise ValueError("sampled vector potential does not match the grid")
    else:
        a = vector_potential(spec, grid.coords)
        if radii is not None:
            a = a * smooth_cutoff(grid.radius, *radii)
    v = sample_electric(spec, grid)
    return DiscreteHamiltonian(
        grid=grid,
        spec=spec,
        vector_values=a,
        electric_values=v,
        gauge_residual=coulomb_gauge_residual(spec, grid),
        taper_radii=radii,
    )


def zero_hamiltonian(grid: Grid) -> DiscreteHamiltonian:
    return sample_hamiltonian(grid, PotentialSpec(dim=grid.dim), taper=None)


# -- energies ----------------------------------------------------------------


def kinetic_energy(ham: DiscreteHamiltonian, u: np.ndarray) -> float:
    """Integral of |(grad - iA) u|^2."""
    g = ham.covariant_gradient(u)
    return float(ham.grid.quadrature((np.abs(g) ** 2).sum(axis=0)).real)


def energy_schrodinger(
    ham: DiscreteHamiltonian, u: np.ndarray, p: float, nonlinear: bool = True
) -> float:
    if p <= 1:
        raise ValueError("nonlinearity exponent must satisfy p > 1")
    q = ham.grid.quadrature
    e = 0.5 * kinetic_energy(ham, u) + 0.5 * q(ham.electric_values * np.abs(u) ** 2)
    if nonlinear:
        e -= q(np.abs(u) ** (p + 1)) / (p + 1.0)
    return float(e)


def energy_wave(
    ham: DiscreteHamiltonian,
    u: np.ndarray,
    v: np.ndarray,
    p: float,
    nonlinear: bool = True,
) -> float:
    return 0.5 * ham.grid.norm2(v) + energy_schrodinger(ham, u, p, nonlinear=nonlinear)


def h1a_norm(ham: DiscreteHamiltonian, u: np.ndarray) -> float:
    """sqrt(|u|_2^2 + |(grad - iA) u|_2^2), the covariant Sobolev norm."""
    return float(np.sqrt(ham.grid.norm2(u) + kinetic_energy(ham, u)))
