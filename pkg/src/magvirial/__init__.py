"""Pseudospectral focusing NLS / wave simulation with electromagnetic
potentials, virial identities, and blow-up diagnostics."""

from .diagnostics import (
    DiagnosticProbe,
    DiagnosticsRecord,
    LevineReport,
    QuadraticBound,
    TimeSeries,
    VirialTerms,
    levine_diagnostics,
    quadratic_bound_check,
    variance,
    variance_rate,
    virial_rhs_nls,
    virial_rhs_wave,
    wave_virial_quantity,
)
from .dynamics import (
    AmplitudeBracketError,
    FileInitial,
    GaussianInitial,
    SimConfig,
    SimState,
    TerminationReport,
    nls_rhs,
    nlw_rhs,
    rk4_step,
    run,
    tune_amplitude_for_negative_energy,
)
from .grid import Grid, boundary_mass_fraction, make_grid
from .operators import (
    DiscreteHamiltonian,
    energy_schrodinger,
    energy_wave,
    h1a_norm,
    kinetic_energy,
    sample_hamiltonian,
    zero_hamiltonian,
)
from .potentials import (
    AssumptionReport,
    PotentialSpec,
    block_antisym_matrix,
    coulomb_gauge_residual,
    electric_potential,
    electric_radial_derivative,
    field_matrix,
    field_matrix_sampled,
    hypothesis_report,
    kato_norm,
    kato_threshold,
    radial_tangential_norm,
    strichartz_threshold,
    trapping_component,
    vector_potential,
    weighted_trapping,
)

__version__ = "0.1.0"
