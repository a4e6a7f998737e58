"""Schedule design, ensemble statistics, and verification for rodeo-algorithm
ground-state projection.

The package is organized by concern:

- :mod:`rodeosched.core` -- dimensionless suppression products and probability
  bookkeeping for explicit iteration schedules and discrete spectra;
- :mod:`rodeosched.rra` -- closed forms, separatrix fits, and Monte Carlo for
  randomly drawn (half-normal) iteration times;
- :mod:`rodeosched.superiter` -- geometric time ladders and their spherical
  Bessel closed forms, including finite truncation and its validity limit;
- :mod:`rodeosched.wam` -- the peak-whacking minimax optimizer that builds
  super-iteration schedules with certified worst-case suppression;
- :mod:`rodeosched.bounds` -- monotone suppression envelopes and bounds that
  exploit partial knowledge of the excited spectral weight;
- :mod:`rodeosched.qsim` -- an exact statevector oracle for the underlying
  ancilla-interferometry circuit, used to validate every closed form;
- :mod:`rodeosched.cli` -- the ``rodeosched`` command-line interface.
"""

from .core import (
    DegenerateBranchError,
    DiscreteSpectrum,
    NumericError,
    Schedule,
    SuppressionProfile,
    expected_total_time,
    ground_state_probability,
    overall_excited_suppression,
    schedule_suppression,
    single_iteration_suppression,
    success_probability,
)
from .rra import (
    EnsembleStatistics,
    HalfNormalTimeDistribution,
    MonteCarloResult,
    SeparatrixFit,
    closed_form_statistics,
    min_time_for_mean_suppression,
    monte_carlo_statistics,
    rra_geometric_mean,
    rra_mean_per_iteration,
    rra_mean_total,
    rra_rms,
    rra_sigma_over_mean,
    sample_schedule,
    separatrix_fit_for,
    solve_separatrix,
)
from .superiter import (
    SuperIteration,
    SuperSchedule,
    expand,
    ideal_profile,
    max_valid_energy,
    super_suppression,
    truncated_super_suppression,
)
from .wam import (
    WamState,
    WorstPeak,
    find_worst_peak,
    rescale_to_equalize,
    wam_optimize,
    wam_table,
    whack,
    worst_case_bound,
)
from .bounds import (
    MonotoneEnvelope,
    PartialSpectralInfo,
    TableLookupResult,
    exact_SE_from_table,
    monotone_envelope,
    partial_info_bound,
)
from .qsim import (
    IterationOutcome,
    PhysicalState,
    TrajectoryResult,
    apply_iteration,
    run_trajectory,
    suppression_via_simulation,
    verify_reduced_density,
)

__version__ = "0.1.0"
