"""Control-schedule synthesis and minimum gate-time bounds for d-level
systems whose drift is a weighted coupling graph and whose controls are
the d diagonal projectors."""

from .bounds import (
    BoundReport,
    QubitNetworkSpec,
    cnot_bound,
    s_function,
    tb_bounds,
    unitary_qubit_bound,
    upper_bound_edge,
    upper_bound_unitary,
    variational_lower_bound,
)
from .decoupling import (
    AveragingMap,
    EffectiveHamiltonian,
    apply_map,
    compose_maps,
    isolate_edge,
    trotter_sequence,
    vertex_removal_map,
)
from .graphs import (
    ControlSystem,
    DisconnectedGraphError,
    HamiltonianGraph,
    enumerate_connected_graphs,
    g_min,
    is_connected,
    normalize_phases,
    random_weights,
    tight_binding,
    to_matrix,
)
from .grape import (
    GrapeConfig,
    GrapeResult,
    SearchFailure,
    grape_optimize,
    minimum_time_search,
    propagate,
)
from .linalg import (
    DiagonalPhases,
    commutator,
    gate_error,
    hs_norm,
    mat_exp,
)
from .synthesis import (
    DiagonalPulse,
    EdgeEvolution,
    EulerAngles,
    PulseSchedule,
    TwoLevelUnitary,
    euler_decompose,
    shortest_time_path,
    simulate,
    swap_chain_schedule,
    synthesize,
    two_level_decompose,
)

__version__ = "0.1.0"
