"""Exact-diagonalization checks of how far and how fast a small subsystem
fluctuates around its time-averaged state while coupled to a finite bath."""

from .qcore import (
    BipartiteDims,
    OperatorBasis,
    hermitian_basis,
    hs_norm,
    kron,
    operator_norm,
    partial_trace_bath,
    partial_trace_sys,
    trace_distance,
    trace_norm,
)
from .hamiltonian import (
    GapReport,
    HamiltonianDecomposition,
    SpectralData,
    check_nondegenerate_gaps,
    compose,
    coupling_norm,
    decompose,
    random_gue,
    spectral_decomposition,
)
from .dynamics import (
    EvolutionContext,
    Trajectory,
    basis_coefficients,
    evolution_context,
    evolve,
    nth_derivative,
    sample_trajectory,
    subsystem_derivative,
    subsystem_speed,
    subsystem_state,
)
from .equilibrium import (
    EquilibriumData,
    dephased_average,
    effective_dimension,
    empirical_time_average,
    observable_expectation,
    observable_variance_empirical,
)
from .bounds import (
    BoundVerdict,
    certify_distance,
    certify_fraction,
    certify_speed,
    certify_variance,
    distance_bound_rhs,
    natural_units_speed,
    reimann_bound_rhs,
    speed_bound_rhs,
)

__version__ = "0.1.0"
