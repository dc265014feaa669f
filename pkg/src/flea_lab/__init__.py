"""Numerical laboratory for the double-well eigenproblem and its flea instability.

The package solves the 1D Schrödinger problem H = -hbar^2 d^2/dx^2 + V(x) on
a hard-wall box for harmonic, anharmonic, and symmetric double-well
potentials, and studies how an exponentially small compactly supported bump
(the "flea") relocates the semiclassical ground state: static spectra and
localization, Husimi phase-space densities, adiabatic collapse dynamics,
two-level reductions (exact, quenched, and stochastic), WKB quantization
with connection matrices, and classical Langevin baselines.
"""

__version__ = "0.1.0"

from .classical_baseline import (
    PassageTimes,
    classical_energy,
    eyring_kramers_time,
    langevin_first_passages,
    leapfrog,
)
from .dynamics import (
    BornTally,
    PropagationConfig,
    Trajectory,
    TrajectoryPoint,
    adiabatic_fidelity,
    born_ensemble,
    propagate,
)
from .errors import (
    ConfigError,
    ConvergenceFailure,
    FleaCoversMinimum,
    FleaLabError,
    LevelAboveBarrier,
    NegativePotentialRegion,
    NoBracket,
    NormBlowup,
    NoTransitions,
    OverlappingDisks,
    PoleProximity,
    StepRejected,
    UnclassifiedOutcome,
    WrongTopology,
)
from .phase_space import (
    ClassicalMeasureSummary,
    HusimiField,
    PhaseGrid,
    berezin_expectation,
    classical_limit_summary,
    coherent_state,
    default_phase_grid,
    husimi,
)
from .potential import (
    FleaClassification,
    FleaSizeReport,
    FleaSpec,
    PotentialSpec,
    RampSpec,
    agmon_distance,
    classify_flea,
    eval_potential,
    flea_size_check,
    from_config,
    to_config,
)
from .spectral import (
    Grid,
    LocalizationReport,
    Spectrum,
    WaveFunction,
    assemble_hamiltonian,
    auto_refine_n,
    default_grid,
    localization_ratio,
    localized_combinations,
    lowest_eigenpairs,
    solve_spectrum,
    splitting,
    tunneling_time,
)
from .two_level import (
    Eigensystem,
    TwoLevelModel,
    brownian_ensemble,
    brownian_path,
    closed_form_p_left,
    dephasing_p_left,
    ground_doublet,
    integrate_quench,
    p_left,
    p_right,
    poisson_ensemble,
    poisson_path,
    quench_evolution,
)
from .wkb import (
    TurningPoints,
    WkbActions,
    WkbLevels,
    actions,
    barrier_matrix,
    connection_matrices,
    d1_c4_chain,
    d1_c4_closed_form,
    localization_ratio_wkb,
    phi_tilde,
    quantization_residual,
    solve_levels,
    turning_points,
)

__all__ = [name for name in dir() if not name.startswith("_")]
