"""Time integration of the focusing magnetic NLS and wave equations.

Method of lines: spectral space derivatives plus classical RK4 in time.
The magnetic cross term is diagonal in neither space nor frequency, so
operator splitting has no exact sub-flows here; RK4 keeps every term
together and conservation drift is monitored instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from math import pi

import numpy as np

from .diagnostics import DiagnosticProbe, DiagnosticsRecord, TimeSeries
from .grid import Grid, make_grid
from .operators import (
    DiscreteHamiltonian,
    energy_schrodinger,
    energy_wave,
    sample_hamiltonian,
)
from .potentials import PotentialSpec

EQUATIONS = ("schrodinger", "wave")

# RK4 keeps the imaginary axis stable up to |lambda| dt = 2*sqrt(2); the
# margin below that is the hard error, the spec-level 0.5 factor is a warning.
RK4_IMAG_LIMIT = 2.5
DT_WARN_FACTOR = 0.5

# a non-finite state counts as detected blow-up only if the amplitude had
# already grown by this factor; otherwise it is plain numerical divergence
NONFINITE_GROWTH_FACTOR = 10.0


class AmplitudeBracketError(ValueError):
    """The requested energy level is not reached anywhere in the bracket."""


@dataclass
class GaussianInitial:
    """a * exp(-|x-x0|^2 / (2 sigma^2)) * exp(i (velocity.x + chirp |x-x0|^2))."""

    amplitude: float = 1.0
    width: float = 1.0
    center: tuple | None = None
    velocity: tuple | None = None
    chirp: float = 0.0

    def sample(self, grid: Grid) -> np.ndarray:
        center = np.zeros(grid.dim) if self.center is None else np.asarray(self.center)
        shifted = grid.coords - center.reshape((grid.dim,) + (1,) * grid.dim)
        r2 = (shifted**2).sum(axis=0)
        phase = self.chirp * r2
        if self.velocity is not None:
            vel = np.asarray(self.velocity)
            phase = phase + np.einsum("i,i...->...", vel, grid.coords)
        return self.amplitude * np.exp(-r2 / (2.0 * self.width**2) + 1j * phase)


@dataclass
class FileInitial:
    """State loaded from an .npz archive: array 'u', plus 'v' for wave runs."""

    path: str

    def load(self, grid: Grid, equation: str):
        data = np.load(self.path)
        u = np.asarray(data["u"], dtype=complex)
        if u.shape != grid.shape:
            raise ValueError(f"initial 'u' shape {u.shape} != grid shape {grid.shape}")
        if equation == "wave":
            if "v" not in data:
                raise ValueError("wave initial data file must contain 'v'")
            v = np.asarray(data["v"], dtype=complex)
            if v.shape != grid.shape:
                raise ValueError("initial 'v' shape does not match the grid")
            return u, v
        return u, None


@dataclass
class SimState:
    t: float
    u: np.ndarray
    v: np.ndarray | None = None
    step: int = 0
    diverged: bool = False


@dataclass
class SimConfig:
    equation: str
    dim: int
    p: float
    extent: float
    points: int
    dt: float
    t_end: float
    potential: PotentialSpec
    initial: GaussianInitial | FileInitial
    dealias: bool = True
    nonlinear: bool = True
    cadence: int = 10
    sup_factor: float = 1e3
    h1a_factor: float = 1e4
    boundary_warn: float = 1e-6
    velocity_factor: float = 0.2
    taper: object = "auto"
    seed: int = 0

    def validate(self) -> list[str]:
        """Raise on hard errors; return advisory notes."""
        notes: list[str] = []
        if self.equation not in EQUATIONS:
            raise ValueError(f"unknown equation {self.equation!r}")
        if not 2 <= self.dim <= 3:
            raise ValueError("dynamics supports dim in {2, 3} (memory guard)")
        if self.potential.dim != self.dim:
            raise ValueError("potential dim does not match the run dim")
        p_max = np.inf if self.dim == 2 else 1.0 + 4.0 / (self.dim - 2)
        if not 1.0 < self.p < p_max:
            raise ValueError(f"exponent p={self.p} outside (1, {p_max}) for dim={self.dim}")
        if self.equation == "wave" and self.dim < 3:
            raise ValueError("wave runs require dim >= 3")
        if self.equation == "schrodinger":
            if self.p >= 1.0 + 4.0 / self.dim:
                notes.append("mass-critical/supercritical exponent: blow-up range")
            else:
                notes.append("mass-subcritical exponent: small data stay global")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")

        k_axis_max = (pi / self.extent) * (self.points / 2.0)
        k2_max = self.dim * k_axis_max**2
        stiffness = k2_max if self.equation == "schrodinger" else np.sqrt(k2_max)
        if self.dt * stiffness > RK4_IMAG_LIMIT:
            raise ValueError(
                f"dt={self.dt} exceeds the RK4 stability limit "
                f"{RK4_IMAG_LIMIT / stiffness:.3e} for this grid"
            )
        if self.dt > DT_WARN_FACTOR / stiffness:
            notes.append(
                f"dt={self.dt} above the conservative guard "
                f"{DT_WARN_FACTOR / stiffness:.3e}; monitor conservation drift"
            )
        return notes


@dataclass
class TerminationReport:
    status: str  # completed | blowup_detected | diverged
    t: float
    trigger: str | None = None
    steps: int = 0
    sup_max: float = 0.0
    notes: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


# -- right-hand sides ----------------------------------------------------------


def _nonlinear_term(grid: Grid, u: np.ndarray, p: float, dealias: bool) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        m2 = u.real**2 + u.imag**2
        nl = (m2 if p == 3.0 else m2 ** ((p - 1.0) / 2.0)) * u
    return grid.dealias(nl) if dealias else nl


def nls_rhs(
    ham: DiscreteHamiltonian, u: np.ndarray, p: float, dealias: bool = True, nonlinear: bool = True
) -> np.ndarray:
    """du/dt = -i (H u - |u|^{p-1} u)."""
    rhs = ham.apply(u)
    if nonlinear:
        rhs = rhs - _nonlinear_term(ham.grid, u, p, dealias)
    return -1j * rhs


def nlw_rhs(
    ham: DiscreteHamiltonian,
    u: np.ndarray,
    v: np.ndarray,
    p: float,
    dealias: bool = True,
    nonlinear: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """First-order system: du/dt = v, dv/dt = -H u + |u|^{p-1} u."""
    accel = -ham.apply(u)
    if nonlinear:
        accel = accel + _nonlinear_term(ham.grid, u, p, dealias)
    return v, accel


def _rk4(y: np.ndarray, f, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _make_flow(ham: DiscreteHamiltonian, config: SimConfig):
    if config.equation == "schrodinger":
        def f(y):
            return nls_rhs(ham, y, config.p, config.dealias, config.nonlinear)
    else:
        def f(y):
            du, dv = nlw_rhs(ham, y[0], y[1], config.p, config.dealias, config.nonlinear)
            return np.stack([du, dv])
    return f


def rk4_step(state: SimState, ham: DiscreteHamiltonian, config: SimConfig) -> SimState:
    """One fixed-dt classical RK4 step; divergence is a state, not an error."""
    if state.diverged:
        raise ValueError("cannot step a diverged state")
    f = _make_flow(ham, config)
    if config.equation == "schrodinger":
        u = _rk4(state.u, f, config.dt)
        v = None
        finite = bool(np.isfinite(u).all())
    else:
        y = _rk4(np.stack([state.u, state.v]), f, config.dt)
        u, v = y[0], y[1]
        finite = bool(np.isfinite(y).all())
    return SimState(
        t=(state.step + 1) * config.dt,
        u=u,
        v=v,
        step=state.step + 1,
        diverged=not finite,
    )


def initial_state(config: SimConfig, grid: Grid) -> SimState:
    if isinstance(config.initial, FileInitial):
        u, v = config.initial.load(grid, config.equation)
    else:
        u = config.initial.sample(grid)
        v = config.velocity_factor * u if config.equation == "wave" else None
    return SimState(t=0.0, u=u, v=v)


def run(config: SimConfig) -> tuple[TimeSeries, TerminationReport]:
    """Integrate to t_end or to the first blow-up trigger.

    Diagnostics are recorded on the uniform cadence only, so the series stays
    evenly spaced; detection details go to the report with one-step (sup) or
    one-cadence (covariant Sobolev norm) uncertainty.
    """
    notes = config.validate()
    grid = make_grid(config.dim, config.extent, config.points)
    spec = config.potential.with_grid_defaults(grid)
    ham = sample_hamiltonian(grid, spec, taper=config.taper)
    probe = DiagnosticProbe(
        ham,
        config.p,
        equation=config.equation,
        nonlinear=config.nonlinear,
        boundary_warn=config.boundary_warn,
    )

    state = initial_state(config, grid)
    records = [probe.record(state)]
    sup0 = records[0].sup_norm
    h1a0 = records[0].h1a
    sup_max = sup0
    run_warnings: list[str] = []

    f = _make_flow(ham, config)
    is_wave = config.equation == "wave"
    y = np.stack([state.u, state.v]) if is_wave else state.u

    status, trigger = "completed", None
    n_steps = int(round(config.t_end / config.dt))
    step = 0
    for step in range(1, n_steps + 1):
        y = _rk4(y, f, config.dt)
        t = step * config.dt
        u = y[0] if is_wave else y
        sup = float(np.max(np.abs(u)))
        if not np.isfinite(sup) or not np.isfinite(y).all():
            grew = sup_max >= NONFINITE_GROWTH_FACTOR * sup0 > 0.0
            status = "blowup_detected" if grew else "diverged"
            trigger = "nonfinite" if grew else None
            break
        sup_max = max(sup_max, sup)
        if sup0 > 0.0 and sup > config.sup_factor * sup0:
            status, trigger = "blowup_detected", "sup_norm"
            break
        if step % config.cadence == 0:
            state = SimState(t=t, u=u, v=y[1] if is_wave else None, step=step)
            rec = probe.record(state)
            records.append(rec)
            if rec.boundary_flag and not any("boundary" in w for w in run_warnings):
                run_warnings.append(
                    f"boundary mass fraction {rec.boundary_mass_frac:.2e} exceeded "
                    f"{config.boundary_warn:.1e} at t={t:.4g}"
                )
            if h1a0 > 0.0 and rec.h1a > config.h1a_factor * h1a0:
                status, trigger = "blowup_detected", "h1a"
                break

    t_final = step * config.dt if status != "completed" else n_steps * config.dt
    metadata = {
        "equation": config.equation,
        "dim": config.dim,
        "p": config.p,
        "extent": config.extent,
        "points": config.points,
        "dt": config.dt,
        "cadence": config.cadence,
        "nonlinear": config.nonlinear,
        "dealias": config.dealias,
        "epsilon": spec.effective_epsilon(grid),
        "taper_radii": ham.taper_radii,
        "gauge_residual": ham.gauge_residual,
        "trap_free": probe.trap_free,
        "seed": config.seed,
    }
    report = TerminationReport(
        status=status,
        t=t_final,
        trigger=trigger,
        steps=step,
        sup_max=sup_max,
        notes=notes,
        warnings=run_warnings,
    )
    return TimeSeries(records=records, metadata=metadata), report


def tune_amplitude_for_negative_energy(
    config: SimConfig,
    a_lo: float = 1e-3,
    a_hi: float = 10.0,
    margin_frac: float = 0.1,
    rel_tol: float = 1e-3,
) -> float:
    """Bisect the Gaussian amplitude until the initial energy sits below
    -margin, with margin = margin_frac * |E(a_hi)|.

    For wave runs the velocity profile is velocity_factor * f, keeping the
    initial mass derivative positive as the concavity argument requires.
    """
    if not isinstance(config.initial, GaussianInitial):
        raise ValueError("amplitude tuning needs Gaussian initial data")
    grid = make_grid(config.dim, config.extent, config.points)
    spec = config.potential.with_grid_defaults(grid)
    ham = sample_hamiltonian(grid, spec, taper=config.taper)

    def energy_at(a: float) -> float:
        trial = replace(config, initial=replace(config.initial, amplitude=a))
        state = initial_state(trial, grid)
        if config.equation == "wave":
            return energy_wave(ham, state.u, state.v, config.p, config.nonlinear)
        return energy_schrodinger(ham, state.u, config.p, config.nonlinear)

    e_hi = energy_at(a_hi)
    if e_hi >= 0.0:
        raise AmplitudeBracketError(
            f"energy is {e_hi:.4g} >= 0 at the bracket top a={a_hi}; widen the bracket"
        )
    target = -margin_frac * abs(e_hi)
    if energy_at(a_lo) <= target:
        return a_lo
    lo, hi = a_lo, a_hi
    while hi - lo > rel_tol * a_hi:
        mid = 0.5 * (lo + hi)
        if energy_at(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi
