"""Spectral laboratory for the cubic fourth-order NLS on the circle.

Fields, exact resonance arithmetic, flow variants with gauge and
interaction-picture maps, normal-form and modified-energy diagnostics,
and Gaussian-measure transport experiments.
"""

from .dynamics import (
    FlowSpec,
    Trajectory,
    evolve,
    free_evolve,
    from_interaction,
    gauge_forward,
    gauge_inverse,
    residual,
    rhs,
    rhs_split,
    single_mode_solution,
    to_interaction,
    truncated_gauge_forward,
)
from .energy import correction, derivative_terms, energy_bound_scan, modified_energy
from .fields import (
    ConservedReport,
    SpectralField,
    hamiltonian,
    mass,
    project_high,
    project_low,
    sobolev_norm,
)
from .measures import (
    Ensemble,
    EventSpec,
    GaussianSpec,
    change_of_variable_test,
    invariance_test,
    liouville_check,
    lp_weight_convergence,
    measure_growth_experiment,
    sample,
    tail_sanity,
    weight,
)
from .normalform import (
    DuhamelSplit,
    NormalFormTerms,
    dk_hs_diagnostics,
    duhamel_split,
    linearized_evolve,
    normal_form_terms,
    smoothing_report,
)
from .reports import DiagnosticsReport
from .resonance import (
    FrequencyQuad,
    TripleSet,
    count_triples_with_factor,
    divisor_count,
    nonresonant_triples,
    phase,
    phase_factored,
)

__version__ = "0.1.0"
