"""Multiscale simulation of network evolution under triadic closure.

Four model levels share one set of rate constants: an exact graph-level
stochastic simulation, a scalar edge-count birth-death chain with an
analytic stationary distribution and exit times, a Langevin diffusion with a
mean-first-passage-time solver, and the deterministic reaction-rate ODE.
"""

from .chain import (
    BDChain,
    Distribution,
    Modality,
    ModalityReport,
    TransitionTimeTable,
    build_chain,
    mc_hitting_times,
    mean_exit_times,
    modality,
    simulate_macro_path,
    stationary_distribution,
    transition_time_curve,
)
from .errors import (
    AccuracyError,
    ConfigError,
    DegenerateRegimeError,
    ReducibleChainError,
    SingularSystemError,
    StuckStateError,
    TriadicNetError,
)
from .graph import (
    ClassPropensities,
    EdgeProbabilities,
    ErdosRenyi,
    Event,
    EventKind,
    ExactEdges,
    GraphState,
    HalfEdges,
    class_propensities,
    estimate_edge_probabilities,
    simulate_path,
    ssa_step,
    wedge_weight,
)
from .model import (
    Equilibria,
    ModelParams,
    Regime,
    birth_death_balance,
    drift,
    drift_derivative,
    equilibrium_densities,
)
from .ode import MeanFieldRun, OdeRun, integrate, mean_field_euler
from .records import Observable, PathRecord
from .rng import DrawBuffer, as_generator, path_stream
from .sde import (
    BoundaryKind,
    EmPath,
    MfptCurve,
    MfptProblem,
    MfptSolution,
    SdeSpec,
    em_ensemble_mean,
    em_hitting_times,
    em_path,
    mfpt_curve,
    solve_mfpt,
    solve_mfpt_operator,
)

__version__ = "0.1.0"
