"""Electromagnetic potential families, derived field quantities, and the
numeric evaluators for the dispersive-smallness and sign hypotheses.

Conventions.  The field matrix is ``B_ij = dA_i/dx_j - dA_j/dx_i`` and the
trapping component is the row-vector product ``(x/|x|) B``.  In 3-D the
matrix acts as a cross product with the field vector b = curl A via
``B v = b x v``; the components of b fix the matrix through
``B = [[0,-b3,b2],[b3,0,-b1],[-b2,b1,0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid

MAGNETIC_FAMILIES = ("zero", "linear_M", "singular_r2", "singular_cyl", "custom_sampled")
ELECTRIC_FAMILIES = ("zero", "inverse_quadratic", "custom_sampled")

_SIGMA = np.array([[0.0, -1.0], [1.0, 0.0]])


def block_antisym_matrix(n: int) -> np.ndarray:
    """Standard antisymmetric generator: 2x2 rotation blocks padded by zeros.

    n = 2 gives the single rotation block; odd n leaves one flat direction,
    even n >= 4 leaves two.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if n == 2:
        blocks = 1
    elif n % 2 == 1:
        blocks = (n - 1) // 2
    else:
        blocks = (n - 2) // 2
    m = np.zeros((n, n))
    for j in range(blocks):
        m[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = _SIGMA
    return m


def smooth_cutoff(r: np.ndarray, r_start: float, r_end: float) -> np.ndarray:
    """Quintic-smoothstep taper: 1 below r_start, 0 above r_end."""
    t = np.clip((np.asarray(r, dtype=float) - r_start) / (r_end - r_start), 0.0, 1.0)
    return 1.0 - t**3 * (t * (6.0 * t - 15.0) + 10.0)


@dataclass
class PotentialSpec:
    """Declarative (A, V) pair: analytic family tags plus parameters.

    epsilon=None means "unresolved": pointwise evaluation is strictly
    singular, and grid sampling substitutes the resolution-tied default 2h.
    taper holds absolute radii (start, end); None leaves A untapered in
    pointwise evaluation (samplers may still apply a default for the
    unbounded linear family).
    """

    dim: int
    magnetic: str = "zero"
    electric: str = "zero"
    matrix: np.ndarray | None = None
    electric_amplitude: float = 1.0
    epsilon: float | None = None
    taper: tuple[float, float] | None = None
    magnetic_values: np.ndarray | None = None
    electric_values: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.magnetic not in MAGNETIC_FAMILIES:
            raise ValueError(f"unknown magnetic family {self.magnetic!r}")
        if self.electric not in ELECTRIC_FAMILIES:
            raise ValueError(f"unknown electric family {self.electric!r}")
        if self.magnetic in ("singular_r2", "singular_cyl") and self.dim != 3:
            raise ValueError(f"{self.magnetic} is only defined for dim=3")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.magnetic == "linear_M":
            if self.matrix is None:
                self.matrix = block_antisym_matrix(self.dim)
            else:
                self.matrix = np.asarray(self.matrix, dtype=float)
                if self.matrix.shape != (self.dim, self.dim):
                    raise ValueError("matrix shape does not match dim")
                if not np.array_equal(self.matrix, -self.matrix.T):
                    raise ValueError("matrix must be antisymmetric")
        if self.taper is not None:
            r0, r1 = self.taper
            if not (0 < r0 < r1):
                raise ValueError("taper radii must satisfy 0 < start < end")

    def effective_epsilon(self, grid: Grid | None = None) -> float:
        if self.epsilon is not None:
            return self.epsilon
        if grid is not None and self.magnetic in ("singular_r2", "singular_cyl"):
            return 2.0 * grid.spacing
        return 0.0

    def with_grid_defaults(self, grid: Grid) -> "PotentialSpec":
        return replace(self, epsilon=self.effective_epsilon(grid))


def _check_points(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != spec.dim:
        raise ValueError(f"points must stack {spec.dim} components on axis 0")
    return x


def _no_pointwise_custom(spec: PotentialSpec, what: str):
    if "custom_sampled" in (spec.magnetic, spec.electric):
        raise ValueError(f"{what} of a custom_sampled family needs grid samples, not points")


def vector_potential(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate the magnetic potential A at points x of shape (dim, ...)."""
    x = _check_points(spec, x)
    eps = spec.epsilon or 0.0
    if spec.magnetic == "zero":
        out = np.zeros_like(x)
    elif spec.magnetic == "linear_M":
        out = 0.5 * np.einsum("ij,j...->i...", spec.matrix, x)
    elif spec.magnetic == "singular_r2":
        denom = (x**2).sum(axis=0) + eps**2
        if np.any(denom == 0.0):
            raise ValueError("singular potential evaluated at the origin with epsilon=0")
        out = np.stack([-x[1], x[0], np.zeros_like(x[0])]) / denom
    elif spec.magnetic == "singular_cyl":
        denom = x[0] ** 2 + x[1] ** 2 + eps**2
        if np.any(denom == 0.0):
            raise ValueError("singular potential evaluated on the axis with epsilon=0")
        out = np.stack([-x[1], x[0], np.zeros_like(x[0])]) / denom
    else:
        _no_pointwise_custom(spec, "vector_potential")
    if spec.taper is not None and spec.magnetic != "zero":
        out = out * smooth_cutoff(np.sqrt((x**2).sum(axis=0)), *spec.taper)
    return out


def _cross_matrix(b: np.ndarray) -> np.ndarray:
    """Antisymmetric 3x3 matrix stack acting as v -> b x v."""
    z = np.zeros_like(b[0])
    return np.stack(
        [
            np.stack([z, -b[2], b[1]]),
            np.stack([b[2], z, -b[0]]),
            np.stack([-b[1], b[0], z]),
        ]
    )


def field_matrix(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """Antisymmetrized Jacobian of A at points x, shape (dim, dim, ...).

    Singular families return the closed form of the unregularized potential
    with regularized denominators; the exact Jacobian of the regularized A
    would pick up an O(eps^2) trapping part near the origin that the family
    exists to avoid.
    """
    x = _check_points(spec, x)
    eps = spec.epsilon or 0.0
    if spec.magnetic == "zero":
        return np.zeros((spec.dim,) + x.shape)
    if spec.magnetic == "linear_M":
        return np.broadcast_to(
            spec.matrix.reshape(spec.matrix.shape + (1,) * (x.ndim - 1)),
            (spec.dim,) + x.shape,
        ).copy()
    if spec.magnetic == "singular_r2":
        denom = ((x**2).sum(axis=0) + eps**2) ** 2
        if np.any(denom == 0.0):
            raise ValueError("singular potential evaluated at the origin with epsilon=0")
        b = 2.0 * x[2] * x / denom
        return _cross_matrix(b)
    if spec.magnetic == "singular_cyl":
        # field is a delta on the z-axis; zero away from it
        return np.zeros((spec.dim,) + x.shape)
    _no_pointwise_custom(spec, "field_matrix")


def field_matrix_sampled(grid: Grid, a_values: np.ndarray) -> np.ndarray:
    """Antisymmetrized spectral Jacobian of sampled A, shape (dim, dim, *shape)."""
    jac = np.stack([grid.spectral_gradient(a_values[i]) for i in range(grid.dim)])
    return (jac - jac.transpose(1, 0, *range(2, jac.ndim))).real


def weighted_trapping(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """|x| times the trapping component, i.e. the row vector x B(x).

    Smooth everywhere (no direction ambiguity at the origin); this is the
    weight that enters the magnetic virial term.
    """
    b = field_matrix(spec, x)
    return np.einsum("i...,ij...->j...", np.asarray(x, dtype=float), b)


def trapping_component(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """The row vector (x/|x|) B(x); tangential to spheres by antisymmetry."""
    x = _check_points(spec, x)
    eps = spec.epsilon or 0.0
    r = np.sqrt((x**2).sum(axis=0) + eps**2)
    if np.any(r == 0.0):
        raise ValueError("trapping component undefined at the origin with epsilon=0")
    return weighted_trapping(spec, x) / r


def electric_potential(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    x = _check_points(spec, x)
    if spec.electric == "zero":
        return np.zeros(x.shape[1:])
    if spec.electric == "inverse_quadratic":
        return spec.electric_amplitude / (1.0 + (x**2).sum(axis=0))
    _no_pointwise_custom(spec, "electric_potential")


def electric_radial_derivative(spec: PotentialSpec, x: np.ndarray) -> np.ndarray:
    """dV/dr at points x; analytic for the built-in families."""
    x = _check_points(spec, x)
    r2 = (x**2).sum(axis=0)
    if spec.electric == "zero":
        return np.zeros(x.shape[1:])
    if spec.electric == "inverse_quadratic":
        return -2.0 * spec.electric_amplitude * np.sqrt(r2) / (1.0 + r2) ** 2
    _no_pointwise_custom(spec, "electric_radial_derivative")


def radial_derivative_sampled(grid: Grid, v_values: np.ndarray) -> np.ndarray:
    """dV/dr for sampled V: 4th-order periodic differences projected on x/|x|."""
    from .oracle import fd_gradient

    grad = fd_gradient(v_values, grid)
    r = grid.radius
    rad = (grid.coords * grad).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rad = np.where(r > 0, rad / r, 0.0)
    return rad.real if np.isrealobj(v_values) else rad


def sample_electric(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    if spec.electric == "custom_sampled":
        if spec.electric_values is None:
            raise ValueError("custom_sampled electric family without samples")
        v = np.asarray(spec.electric_values, dtype=float)
        if v.shape != grid.shape:
            raise ValueError("sampled electric potential does not match the grid")
        return v
    return electric_potential(spec, grid.coords)


def sample_electric_radial_derivative(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    if spec.electric == "custom_sampled":
        return radial_derivative_sampled(grid, sample_electric(spec, grid))
    return electric_radial_derivative(spec, grid.coords)


def coulomb_gauge_residual(spec: PotentialSpec, grid: Grid | None = None) -> float:
    """Sup of |div A|: exact zero (analytically) for every built-in family,
    spectral divergence for sampled potentials."""
    if spec.magnetic == "custom_sampled":
        if grid is None:
            raise ValueError("custom_sampled divergence needs a grid")
        if spec.magnetic_values is None:
            raise ValueError("custom_sampled magnetic family without samples")
        div = grid.spectral_divergence(np.asarray(spec.magnetic_values))
        return float(np.max(np.abs(div)))
    if spec.magnetic == "linear_M":
        # div(0.5 M x) = 0.5 tr M, and radial tapering preserves it exactly
        # because x . M x = 0.
        return float(abs(0.5 * np.trace(spec.matrix)))
    # zero family trivially; both singular families have x . A = 0 so the
    # regularized divergence cancels identically.
    return 0.0


# -- hypothesis machinery ----------------------------------------------------


def kato_threshold(n: int) -> float:
    """Smallness bound for the Kato norm of the negative electric part."""
    if n < 3:
        raise ValueError("Kato class is defined for dim >= 3")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 - 1.0)


def strichartz_threshold(n: int) -> float:
    """Right-hand side of the combined smallness bound for dim >= 4."""
    if n < 4:
        raise ValueError("combined threshold applies for dim >= 4")
    return 2.0 * (n - 1) * (n - 3) / 3.0


def kato_norm(v_values: np.ndarray, grid: Grid, radius: float) -> float:
    """Discrete Kato norm: sup_x of sum_{0<|x-y|<=radius} |V(y)| |x-y|^(2-n) h^n.

    Computed as a periodic convolution (minimal-image distances); the
    self-term is excluded.  Requires dim >= 3.
    """
    if grid.dim < 3:
        raise ValueError("Kato norm requires dim >= 3")
    if radius <= 0:
        raise ValueError("Kato radius must be positive")
    if radius > grid.extent:
        raise ValueError("Kato radius beyond the box half-width is not meaningful")
    v_values = np.asarray(v_values)
    if v_values.shape != grid.shape:
        raise ValueError("potential samples do not match the grid")
    # displacement lattice in FFT order: the coordinate lattice rolled so
    # that displacement 0 sits at index 0
    disp_r = np.fft.ifftshift(grid.radius)
    with np.errstate(divide="ignore"):
        kernel = np.where(
            (disp_r > 0) & (disp_r <= radius), disp_r ** (2.0 - grid.dim), 0.0
        )
    conv = np.fft.ifftn(np.fft.fftn(np.abs(v_values)) * np.fft.fftn(kernel)).real
    return float(conv.max() * grid.spacing**grid.dim)


def radial_tangential_norm(values: np.ndarray, grid: Grid) -> float:
    """L1_r L^inf(S_r) norm: shell-wise sup over |x| bins of width h, summed * h."""
    values = np.abs(np.asarray(values)).ravel()
    shells = (grid.radius.ravel() / grid.spacing).astype(int)
    sups = np.zeros(shells.max() + 1)
    np.maximum.at(sups, shells, values)
    return float(sups.sum() * grid.spacing)


@dataclass
class AssumptionReport:
    """Numeric sides and verdicts for every hypothesis inequality in scope."""

    dim: int
    epsilon: float
    kato_radius: float | None
    strichartz_m: float
    coulomb_residual: float
    coulomb_ok: bool
    kato_norm_v_minus: float | None = None
    kato_threshold: float | None = None
    kato_ok: bool | None = None
    sup_w32_trapping: float | None = None
    sup_w2_trapping: float | None = None
    sup_w3_radial_electric: float | None = None
    rt_w2_radial_electric: float | None = None
    rt_w3_field: float | None = None
    schrodinger_lhs: float | None = None
    schrodinger_rhs: float | None = None
    schrodinger_ok: bool | None = None
    wave_lhs: float | None = None
    wave_rhs: float | None = None
    wave_ok: bool | None = None
    condition_i_min: float = 0.0
    condition_i_ok: bool = True
    electric_min: float = 0.0
    electric_nonneg_ok: bool = True

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


_COULOMB_TOL = 1e-10
_SIGN_TOL = 1e-12


def _field_magnitude(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """|B| per point: the field-vector magnitude, Frobenius norm / sqrt(2)."""
    b = field_matrix(spec, grid.coords)
    return np.sqrt((b**2).sum(axis=(0, 1)) / 2.0)


def hypothesis_report(
    spec: PotentialSpec,
    grid: Grid,
    kato_radius: float | None = None,
    strichartz_m: float = 1.0,
) -> AssumptionReport:
    """Evaluate every hypothesis inequality on the grid.

    strichartz_m is the free constant in the dim-3 smallness bound, whose
    left side carries the coefficients (m + 1/2)^2 / m and (2m + 1).
    kato_radius defaults to extent / 4.
    """
    if strichartz_m <= 0:
        raise ValueError("strichartz_m must be positive")
    spec = spec.with_grid_defaults(grid)
    n = grid.dim

    v = sample_electric(spec, grid)
    dvr = sample_electric_radial_derivative(spec, grid)
    dvr_plus = np.maximum(dvr, 0.0)
    r = grid.radius
    interior = r > 0

    w = weighted_trapping(spec, grid.coords)  # = |x| * trapping component
    trap_mag = np.zeros(grid.shape)
    trap_mag[interior] = np.sqrt((w**2).sum(axis=0))[interior] / r[interior]

    cond_i = v + 0.5 * r * dvr
    residual = coulomb_gauge_residual(spec, grid)

    report = AssumptionReport(
        dim=n,
        epsilon=spec.effective_epsilon(grid),
        kato_radius=None,
        strichartz_m=strichartz_m,
        coulomb_residual=residual,
        coulomb_ok=residual <= _COULOMB_TOL,
        condition_i_min=float(cond_i.min()),
        condition_i_ok=bool(cond_i.min() >= -_SIGN_TOL),
        electric_min=float(v.min()),
        electric_nonneg_ok=bool(v.min() >= -_SIGN_TOL),
    )

    if n >= 3:
        radius = grid.extent / 4.0 if kato_radius is None else kato_radius
        report.kato_radius = radius
        report.kato_norm_v_minus = kato_norm(np.maximum(-v, 0.0), grid, radius)
        report.kato_threshold = kato_threshold(n)
        report.kato_ok = report.kato_norm_v_minus < report.kato_threshold

    if n == 3:
        report.sup_w32_trapping = float((r**1.5 * trap_mag).max())
        report.rt_w2_radial_electric = radial_tangential_norm(r**2 * dvr_plus, grid)
        coeff = (strichartz_m + 0.5) ** 2 / strichartz_m
        report.schrodinger_lhs = (
            coeff * report.sup_w32_trapping**2
            + (2.0 * strichartz_m + 1.0) * report.rt_w2_radial_electric
        )
        report.schrodinger_rhs = 0.5
        report.schrodinger_ok = report.schrodinger_lhs < report.schrodinger_rhs
        report.rt_w3_field = radial_tangential_norm(
            r**3 * _field_magnitude(spec, grid), grid
        )
        report.wave_lhs = report.rt_w3_field + report.rt_w2_radial_electric
        report.wave_rhs = 0.5
        report.wave_ok = report.wave_lhs <= report.wave_rhs
    elif n >= 4:
        report.sup_w2_trapping = float((r**2 * trap_mag).max())
        report.sup_w3_radial_electric = float((r**3 * dvr_plus).max())
        report.schrodinger_lhs = (
            report.sup_w2_trapping**2 + 2.0 * report.sup_w3_radial_electric
        )
        report.schrodinger_rhs = strichartz_threshold(n)
        report.schrodinger_ok = report.schrodinger_lhs < report.schrodinger_rhs
        # decay constants read off the same weighted sups
        report.wave_lhs = report.sup_w2_trapping**2 + 2.0 * report.sup_w3_radial_electric
        report.wave_rhs = strichartz_threshold(n)
        report.wave_ok = report.wave_lhs <= report.wave_rhs

    return report
