"""Uniform periodic lattice with transform-based calculus and quadrature.

Field data are plain numpy arrays: a scalar field has shape ``grid.shape``,
a vector field stacks its components on a leading axis, ``(dim, *shape)``.
All operations here are pure functions of their inputs; Grid instances are
treated as immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import pi

import numpy as np
import scipy.fft as _fft

# Hard cap on dim * log2(points): 2^22 ~ 4M samples per field keeps any grid
# this library will accept well under a GB even with stacked vector fields.
MAX_LOG2_POINTS = 22


@dataclass
class Grid:
    """Lattice on the box [-extent, extent)^dim with N points per axis.

    Coordinates are x_i = -extent + i*h with h = 2*extent/N; the frequency
    lattice per axis is (pi/extent) * {-N/2, ..., N/2 - 1} in FFT ordering.
    """

    dim: int
    extent: float
    points: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.extent <= 0:
            raise ValueError(f"extent must be positive, got {self.extent}")
        n = self.points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"points per axis must be a power of two >= 8, got {n}")
        if self.dim * (n.bit_length() - 1) > MAX_LOG2_POINTS:
            raise ValueError(
                f"grid of {n}^{self.dim} samples exceeds the memory guard "
                f"(dim*log2(N) <= {MAX_LOG2_POINTS})"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    @cached_property
    def axis_coords(self) -> np.ndarray:
        return -self.extent + self.spacing * np.arange(self.points)

    @cached_property
    def axis_modes(self) -> np.ndarray:
        """Integer mode numbers in FFT order: 0..N/2-1, -N/2..-1."""
        m = np.arange(self.points)
        m[m >= self.points // 2] -= self.points
        return m

    @cached_property
    def axis_freqs(self) -> np.ndarray:
        return (pi / self.extent) * self.axis_modes

    @cached_property
    def coords(self) -> np.ndarray:
        """Coordinate mesh, shape (dim, N, ..., N)."""
        axes = np.meshgrid(*[self.axis_coords] * self.dim, indexing="ij")
        return np.stack(axes)

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt((self.coords**2).sum(axis=0))

    @cached_property
    def _k_broadcast(self) -> list[np.ndarray]:
        out = []
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.points
            out.append(self.axis_freqs.reshape(shape))
        return out

    @cached_property
    def k_squared(self) -> np.ndarray:
        ks = np.zeros(self.shape)
        for k in self._k_broadcast:
            ks = ks + k**2
        return ks

    @cached_property
    def _dealias_keep(self) -> np.ndarray:
        """Keep mask for the 2/3 rule: |mode| <= N/3 on every axis."""
        cut = self.points // 3
        keep = np.ones(self.shape, dtype=bool)
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = self.points
            keep &= np.abs(self.axis_modes).reshape(shape) <= cut
        return keep

    # -- transforms ---------------------------------------------------------

    def fft(self, u: np.ndarray) -> np.ndarray:
        return _fft.fftn(u, axes=self._spatial_axes(u))

    def ifft(self, u_hat: np.ndarray) -> np.ndarray:
        return _fft.ifftn(u_hat, axes=self._spatial_axes(u_hat))

    def _spatial_axes(self, u: np.ndarray) -> tuple[int, ...]:
        if u.shape[-self.dim :] != self.shape:
            raise ValueError(f"field shape {u.shape} does not end in {self.shape}")
        return tuple(range(-self.dim, 0))

    # -- calculus -----------------------------------------------------------

    def spectral_derivative(self, u: np.ndarray, axis: int) -> np.ndarray:
        return self.ifft(1j * self._k_broadcast[axis] * self.fft(u))

    def spectral_gradient(self, u: np.ndarray) -> np.ndarray:
        """All partial derivatives of a scalar field, shape (dim, *shape)."""
        u_hat = self.fft(u)
        return np.stack([self.ifft(1j * k * u_hat) for k in self._k_broadcast])

    def spectral_laplacian(self, u: np.ndarray) -> np.ndarray:
        return self.ifft(-self.k_squared * self.fft(u))

    def spectral_divergence(self, v: np.ndarray) -> np.ndarray:
        if v.shape != (self.dim,) + self.shape:
            raise ValueError(f"vector field shape {v.shape} != {(self.dim,) + self.shape}")
        out = np.zeros(self.shape, dtype=complex)
        for axis in range(self.dim):
            out += self.spectral_derivative(v[axis], axis)
        return out

    def dealias(self, u: np.ndarray) -> np.ndarray:
        """Project out every mode with any |k_j| above 2/3 of the axis maximum."""
        return self.ifft(self.fft(u) * self._dealias_keep)

    # -- quadrature ---------------------------------------------------------

    def quadrature(self, f: np.ndarray):
        """Lattice sum times h^dim: the periodic trapezoid rule."""
        if f.shape != self.shape:
            raise ValueError(f"field shape {f.shape} != grid shape {self.shape}")
        return (f.sum() * self.spacing**self.dim).item()

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L2 inner product, integral of f * conj(g)."""
        return (np.sum(f * np.conj(g)) * self.spacing**self.dim).item()

    def norm2(self, f: np.ndarray) -> float:
        return float(np.sum(np.abs(f) ** 2).real * self.spacing**self.dim)


def make_grid(dim: int, extent: float, points: int) -> Grid:
    return Grid(dim=dim, extent=extent, points=points)


def boundary_mass_fraction(grid: Grid, u: np.ndarray, shell_start: float = 0.9) -> float:
    """Fraction of the L2 mass sitting at |x| > shell_start * extent."""
    dens = np.abs(u) ** 2
    total = dens.sum()
    if total == 0.0:
        return 0.0
    outer = dens[grid.radius > shell_start * grid.extent].sum()
    return float(outer / total)
