"""Conserved quantities, virial identities, and concavity diagnostics.

Every quantity here is the literal right-hand side of an identity satisfied
by the continuum flow; agreement with differenced time series is the test,
so nothing is ever obtained by differentiating code twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, boundary_mass_fraction
from .operators import DiscreteHamiltonian, kinetic_energy
from .potentials import (
    field_matrix_sampled,
    sample_electric_radial_derivative,
    weighted_trapping,
)

TRAP_FREE_TOL = 1e-12

CSV_COLUMNS = (
    "t",
    "mass",
    "energy",
    "Q",
    "Qdot",
    "Qddot_rhs",
    "virial_residual",
    "sup_norm",
    "h1A",
    "boundary_mass_frac",
    "F",
    "Fdot",
    "Hfun",
)


def sample_weighted_trapping(ham: DiscreteHamiltonian) -> np.ndarray:
    """|x| times the trapping component on the grid, shape (dim, *shape).

    Analytic families use the untapered closed form (the identity weight is
    part of the identity, not the operator); sampled potentials use the
    antisymmetrized spectral Jacobian of what is actually solved.
    """
    grid = ham.grid
    if ham.spec.magnetic == "custom_sampled":
        b = field_matrix_sampled(grid, ham.vector_values)
        return np.einsum("i...,ij...->j...", grid.coords, b)
    return weighted_trapping(ham.spec, grid.coords)


@dataclass
class VirialTerms:
    """The four contributions to the variance acceleration, plus both totals."""

    kinetic: float
    electric_radial: float
    magnetic: float
    nonlinear: float
    total: float
    total_energy_form: float


def variance(grid: Grid, u: np.ndarray) -> float:
    """Second moment of the mass density."""
    return float(grid.quadrature(grid.radius**2 * np.abs(u) ** 2))


def variance_rate(ham: DiscreteHamiltonian, u: np.ndarray, grad: np.ndarray | None = None) -> float:
    """First variance derivative: 4 Im of the radial covariant momentum."""
    g = ham.covariant_gradient(u) if grad is None else grad
    radial = (ham.grid.coords * g).sum(axis=0)
    return float(4.0 * ham.grid.quadrature(np.conj(u) * radial).imag)


def _magnetic_virial_integral(
    ham: DiscreteHamiltonian, u: np.ndarray, grad: np.ndarray, w_trap: np.ndarray
) -> float:
    """Im of int u (|x| B_tau) . conj(covariant gradient)."""
    return float(ham.grid.quadrature(u * (w_trap * np.conj(grad)).sum(axis=0)).imag)


def _radial_electric_integral(
    ham: DiscreteHamiltonian, u: np.ndarray, rv_r: np.ndarray
) -> float:
    """int |x| dV/dr |u|^2."""
    return float(ham.grid.quadrature(rv_r * np.abs(u) ** 2))


def virial_rhs_nls(
    ham: DiscreteHamiltonian,
    u: np.ndarray,
    p: float,
    nonlinear: bool = True,
    grad: np.ndarray | None = None,
    w_trap: np.ndarray | None = None,
    rv_r: np.ndarray | None = None,
) -> VirialTerms:
    """Variance acceleration along the focusing magnetic flow.

    total is the direct multiplier form; total_energy_form re-expresses it
    through the conserved energy -- the two must agree to round-off.
    """
    grid = ham.grid
    g = ham.covariant_gradient(u) if grad is None else grad
    if w_trap is None:
        w_trap = sample_weighted_trapping(ham)
    if rv_r is None:
        rv_r = grid.radius * sample_electric_radial_derivative(ham.spec, grid)

    n = grid.dim
    kin = float(grid.quadrature((np.abs(g) ** 2).sum(axis=0)).real)
    pot = float(grid.quadrature(ham.electric_values * np.abs(u) ** 2))
    nl = float(grid.quadrature(np.abs(u) ** (p + 1.0))) if nonlinear else 0.0

    kinetic_term = 8.0 * kin
    radial_term = -4.0 * _radial_electric_integral(ham, u, rv_r)
    magnetic_term = 8.0 * _magnetic_virial_integral(ham, u, g, w_trap)
    nonlinear_term = -4.0 * n * (p - 1.0) / (p + 1.0) * nl
    total = kinetic_term + radial_term + magnetic_term + nonlinear_term

    energy = 0.5 * kin + 0.5 * pot - nl / (p + 1.0)
    total_energy_form = (
        16.0 * energy
        - 8.0 * pot
        + radial_term
        + magnetic_term
        + (16.0 - 4.0 * n * (p - 1.0)) / (p + 1.0) * nl
    )
    return VirialTerms(
        kinetic=kinetic_term,
        electric_radial=radial_term,
        magnetic=magnetic_term,
        nonlinear=nonlinear_term,
        total=total,
        total_energy_form=total_energy_form,
    )


def wave_virial_quantity(
    ham: DiscreteHamiltonian, u: np.ndarray, v: np.ndarray, grad: np.ndarray | None = None
) -> float:
    """Weighted wave analogue of the variance, with its -(n-1) mass counterterm."""
    grid = ham.grid
    g = ham.covariant_gradient(u) if grad is None else grad
    density = (
        np.abs(v) ** 2 + (np.abs(g) ** 2).sum(axis=0) + ham.electric_values * np.abs(u) ** 2
    )
    weighted = float(grid.quadrature(grid.radius**2 * density).real)
    return weighted - (grid.dim - 1.0) * grid.norm2(u)


def virial_rhs_wave(
    ham: DiscreteHamiltonian,
    u: np.ndarray,
    v: np.ndarray,
    p: float,
    nonlinear: bool = True,
    grad: np.ndarray | None = None,
    w_trap: np.ndarray | None = None,
    rv_r: np.ndarray | None = None,
) -> VirialTerms:
    grid = ham.grid
    g = ham.covariant_gradient(u) if grad is None else grad
    if w_trap is None:
        w_trap = sample_weighted_trapping(ham)
    if rv_r is None:
        rv_r = grid.radius * sample_electric_radial_derivative(ham.spec, grid)

    n = grid.dim
    kin = float(grid.quadrature((np.abs(g) ** 2).sum(axis=0)).real)
    ut2 = grid.norm2(v)
    pot = float(grid.quadrature(ham.electric_values * np.abs(u) ** 2))
    nl = float(grid.quadrature(np.abs(u) ** (p + 1.0))) if nonlinear else 0.0

    kinetic_term = 2.0 * (ut2 + kin)
    radial_term = -2.0 * _radial_electric_integral(ham, u, rv_r)
    electric_term = -2.0 * pot
    magnetic_term = 4.0 * _magnetic_virial_integral(ham, u, g, w_trap)
    nonlinear_term = 2.0 * (1.0 - n * (p - 1.0) / (p + 1.0)) * nl
    total = kinetic_term + radial_term + electric_term + magnetic_term + nonlinear_term
    return VirialTerms(
        kinetic=kinetic_term,
        electric_radial=radial_term + electric_term,
        magnetic=magnetic_term,
        nonlinear=nonlinear_term,
        total=total,
        total_energy_form=total,
    )


# -- per-run recording --------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    sup_norm: float
    h1a: float
    boundary_mass_frac: float
    kinetic: float
    potential_electric: float
    nonlinear_integral: float
    variance: float
    variance_rate: float | None
    virial_rhs: float
    virial_rhs_energy_form: float
    virial_terms: VirialTerms
    levine_f: float | None = None
    levine_f_rate: float | None = None
    levine_f_accel: float | None = None
    levine_h: float | None = None
    ut_norm2: float | None = None
    boundary_flag: bool = False


class DiagnosticProbe:
    """Per-run sampler; all weights precomputed once, record() is pure."""

    def __init__(
        self,
        ham: DiscreteHamiltonian,
        p: float,
        equation: str = "schrodinger",
        nonlinear: bool = True,
        boundary_warn: float = 1e-6,
    ):
        self.ham = ham
        self.p = p
        self.equation = equation
        self.nonlinear = nonlinear
        self.boundary_warn = boundary_warn
        grid = ham.grid
        self.w_trap = sample_weighted_trapping(ham)
        self.rv_r = grid.radius * sample_electric_radial_derivative(ham.spec, grid)
        self.trap_free = bool(np.max(np.abs(self.w_trap)) <= TRAP_FREE_TOL)
        self.alpha = (p - 1.0) / 4.0

    def record(self, state) -> DiagnosticsRecord:
        ham, grid, p = self.ham, self.ham.grid, self.p
        u = state.u
        g = ham.covariant_gradient(u)
        mass = grid.norm2(u)
        kin = float(grid.quadrature((np.abs(g) ** 2).sum(axis=0)).real)
        pot = float(grid.quadrature(ham.electric_values * np.abs(u) ** 2))
        nl = float(grid.quadrature(np.abs(u) ** (p + 1.0))) if self.nonlinear else 0.0
        energy = 0.5 * kin + 0.5 * pot - nl / (p + 1.0)
        bmf = boundary_mass_fraction(grid, u)
        common = dict(
            t=state.t,
            mass=mass,
            sup_norm=float(np.max(np.abs(u))),
            h1a=float(np.sqrt(mass + kin)),
            boundary_mass_frac=bmf,
            kinetic=kin,
            potential_electric=pot,
            nonlinear_integral=nl,
            boundary_flag=bmf > self.boundary_warn,
        )
        if self.equation == "schrodinger":
            terms = virial_rhs_nls(
                ham, u, p, self.nonlinear, grad=g, w_trap=self.w_trap, rv_r=self.rv_r
            )
            return DiagnosticsRecord(
                energy=energy,
                variance=variance(grid, u),
                variance_rate=variance_rate(ham, u, grad=g),
                virial_rhs=terms.total,
                virial_rhs_energy_form=terms.total_energy_form,
                virial_terms=terms,
                **common,
            )
        v = state.v
        ut2 = grid.norm2(v)
        terms = virial_rhs_wave(
            ham, u, v, p, self.nonlinear, grad=g, w_trap=self.w_trap, rv_r=self.rv_r
        )
        hfun = -kin - pot + nl - (2.0 * self.alpha + 1.0) * ut2
        return DiagnosticsRecord(
            energy=0.5 * ut2 + energy,
            variance=wave_virial_quantity(ham, u, v, grad=g),
            variance_rate=None,
            virial_rhs=terms.total,
            virial_rhs_energy_form=terms.total_energy_form,
            virial_terms=terms,
            levine_f=mass,
            levine_f_rate=2.0 * grid.inner(v, u).real,
            levine_f_accel=2.0 * ut2 + 2.0 * (-kin - pot + nl),
            levine_h=hfun,
            ut_norm2=ut2,
            **common,
        )


@dataclass
class TimeSeries:
    """Uniform-cadence diagnostic records plus run metadata."""

    records: list[DiagnosticsRecord]
    metadata: dict = field(default_factory=dict)

    @property
    def equation(self) -> str:
        return self.metadata.get("equation", "schrodinger")

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def virial_residuals(self) -> np.ndarray:
        """|second difference of Q minus the identity RHS| / max(1, |RHS|).

        NaN at the two endpoints where the centered stencil does not exist.
        """
        t = self.times()
        q = self.column("variance")
        rhs = self.column("virial_rhs")
        out = np.full(len(q), np.nan)
        if len(q) >= 3:
            dt = t[1] - t[0]
            second = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / dt**2
            out[1:-1] = np.abs(second - rhs[1:-1]) / np.maximum(1.0, np.abs(rhs[1:-1]))
        return out

    def write_csv(self, path) -> None:
        is_wave = self.equation == "wave"
        residuals = self.virial_residuals()

        def fmt(x) -> str:
            if x is None or (isinstance(x, float) and not np.isfinite(x)):
                return ""
            return repr(float(x))

        lines = [",".join(CSV_COLUMNS)]
        for i, r in enumerate(self.records):
            row = [
                fmt(r.t),
                fmt(r.mass),
                fmt(r.energy),
                fmt(r.variance),
                "" if is_wave else fmt(r.variance_rate),
                fmt(r.virial_rhs),
                fmt(residuals[i]),
                fmt(r.sup_norm),
                fmt(r.h1a),
                fmt(r.boundary_mass_frac),
                fmt(r.levine_f) if is_wave else "",
                fmt(r.levine_f_rate) if is_wave else "",
                fmt(r.levine_h) if is_wave else "",
            ]
            lines.append(",".join(row))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


# -- proof-derived checks ------------------------------------------------------


@dataclass
class QuadraticBound:
    """Verdict for the integrated variance bound on the trap-free branch.

    The variance acceleration bound 16 E0 integrates twice to
    Q(t) <= Q0 + Qdot0 t + 8 E0 t^2; that parabola is what the margins are
    measured against.  detection_root is the positive root of the steeper
    reference parabola 16 E0 t^2 + Qdot0 t + Q0, which upper-bounds the
    detection time in the acceptance checks.
    """

    applicable: bool
    ok: bool | None
    slack: float
    detection_root: float | None
    bound_root: float | None
    min_margin: float | None
    first_violation_t: float | None
    fitted_coefficient: float | None


def _parabola_positive_root(coeff: float, e0: float, qdot0: float, q0: float) -> float | None:
    if e0 >= 0:
        return None
    a, b, c = coeff * e0, qdot0, q0
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    roots = [(-b - np.sqrt(disc)) / (2.0 * a), (-b + np.sqrt(disc)) / (2.0 * a)]
    pos = [r for r in roots if r > 0]
    return float(min(pos)) if pos else None


def parabola_positive_root(e0: float, qdot0: float, q0: float) -> float | None:
    """Positive root of 16 E0 t^2 + Qdot0 t + Q0 for E0 < 0 (detection bound)."""
    return _parabola_positive_root(16.0, e0, qdot0, q0)


def quadratic_bound_check(series: TimeSeries, slack: float | None = None) -> QuadraticBound:
    """Check the integrated variance bound against the recorded series.

    Only applicable on trap-free runs with negative initial energy, where the
    acceleration bound carries the explicit constant; elsewhere the best-fit
    coefficient is still reported as data.  Violations appear once the
    collapse saturates at grid scale (the continuum solution has ceased to
    exist there) and are reported, not suppressed.
    """
    r0 = series.records[0]
    e0, qdot0, q0 = r0.energy, r0.variance_rate or 0.0, r0.variance
    trap_free = bool(series.metadata.get("trap_free", False))
    if slack is None:
        slack = 1e-6 * max(1.0, abs(q0))
    t = series.times()
    q = series.column("variance")
    detection_root = _parabola_positive_root(16.0, e0, qdot0, q0)
    bound_root = _parabola_positive_root(8.0, e0, qdot0, q0)

    fitted = None
    interior = t > 0
    if e0 < 0 and interior.any():
        ratios = (q[interior] - q0 - qdot0 * t[interior]) / (t[interior] ** 2 * e0)
        fitted = float(np.max(ratios))

    if not (trap_free and e0 < 0):
        return QuadraticBound(
            applicable=False,
            ok=None,
            slack=slack,
            detection_root=detection_root,
            bound_root=bound_root,
            min_margin=None,
            first_violation_t=None,
            fitted_coefficient=fitted,
        )
    bound = 8.0 * e0 * t**2 + qdot0 * t + q0
    margin = bound + slack - q
    violated = margin < 0
    return QuadraticBound(
        applicable=True,
        ok=bool(not violated.any()),
        slack=slack,
        detection_root=detection_root,
        bound_root=bound_root,
        min_margin=float(margin.min()),
        first_violation_t=float(t[violated][0]) if violated.any() else None,
        fitted_coefficient=fitted,
    )


@dataclass
class LevineReport:
    alpha: float
    time_bound: float | None
    concavity_ok: bool
    max_second_difference: float
    hfun_ok: bool
    hfun_min_margin: float
    wedge_ok: bool
    wedge_min: float
    f_pow: np.ndarray


def levine_diagnostics(
    series: TimeSeries, p: float, tol: float = 1e-6, sup_gate: float | None = None
) -> LevineReport:
    """Concavity-method diagnostics for a recorded wave run.

    alpha solves 2(2 alpha + 1) = p + 1; F^{-alpha} must be discretely
    concave, H must stay above -(p+1) E_W(0), and F(0)/(alpha F'(0)) bounds
    the blow-up time whenever F'(0) > 0.

    The H floor relies on energy conservation, which the discrete flow only
    delivers while the solution is resolved; sup_gate restricts the checks to
    the record prefix with sup_norm <= sup_gate * sup_norm(0).
    """
    if series.equation != "wave":
        raise ValueError("Levine diagnostics apply to wave runs")
    alpha = (p - 1.0) / 4.0
    f = series.column("levine_f")
    fdot0 = series.records[0].levine_f_rate
    e0 = series.records[0].energy

    if sup_gate is not None:
        sup = series.column("sup_norm")
        beyond = np.nonzero(sup > sup_gate * sup[0])[0]
        keep = beyond[0] if len(beyond) else len(f)
        series = TimeSeries(records=series.records[:keep], metadata=series.metadata)
        f = f[:keep]
    f_pow = f ** (-alpha)

    second = np.diff(f_pow, 2)
    max_second = float(second.max()) if len(second) else 0.0
    concavity_ok = max_second <= tol * abs(f_pow[0])

    hfun = series.column("levine_h")
    floor = -(p + 1.0) * e0
    scale = max(1.0, abs(floor))
    hfun_margin = float((hfun - floor).min())
    hfun_ok = hfun_margin >= -tol * scale

    fddot = series.column("levine_f_accel")
    fdot = series.column("levine_f_rate")
    wedge = f * fddot - (alpha + 1.0) * fdot**2
    wedge_scale = max(1.0, float(np.abs(wedge).max()))
    wedge_min = float(wedge.min())
    wedge_ok = wedge_min >= -tol * wedge_scale

    time_bound = f[0] / (alpha * fdot0) if (fdot0 or 0.0) > 0 else None
    return LevineReport(
        alpha=alpha,
        time_bound=time_bound,
        concavity_ok=bool(concavity_ok),
        max_second_difference=max_second,
        hfun_ok=bool(hfun_ok),
        hfun_min_margin=hfun_margin,
        wedge_ok=bool(wedge_ok),
        wedge_min=wedge_min,
        f_pow=f_pow,
    )
