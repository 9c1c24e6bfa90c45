"""Wasserstein geodesics on finite weighted graphs.

Solves the dynamical optimal transport problem between two probability
densities on a connected graph: a kinetic-energy minimizing path subject
to the graph continuity equation.  The two-point boundary value problem
is discretized in time and solved by Newton's method on a reduced set of
unknowns (one eliminated density per level, spanning-tree velocities).
"""

from .errors import (
    DimensionMismatchError,
    DisconnectedGraphError,
    DuplicateEdgeError,
    EdgeNotInGraphError,
    GraphConstructionError,
    GraphOTError,
    InputFormatError,
    InvalidDensityError,
    LevelOutOfRangeError,
    NegativeDensityError,
    NodeOutOfRangeError,
    NonpositiveWeightError,
    NonSquareGridError,
    NotA1DLatticeError,
    NotA2DLatticeError,
    NotATreeError,
    SelfLoopError,
    SingularJacobianError,
    TooFewNodesError,
)
from .graph import (
    Lattice1D,
    Lattice2D,
    WeightedGraph,
    build_from_edge_list,
    complete_graph,
    dumbbell,
    lattice_1d_periodic,
    lattice_2d_periodic,
    read_edge_list,
    write_edge_list,
)
from .tree import SpanningTree, kruskal, read_tree_file
from .mobility import (
    ARITHMETIC_MEAN,
    MOBILITIES,
    UPWIND,
    ArithmeticMean,
    Mobility,
    Upwind,
    get_mobility,
    theta,
    theta_partials,
)
from .system import (
    TransportProblem,
    Trajectory,
    assemble_residual,
    divergence,
    explicit_upwind_update,
    hamiltonian,
    level_fields,
    nodal_kinetic,
    pack,
    pack_fields,
    recover_last_density,
    reduced_rhs,
    residual_fields,
    state_size,
    unpack,
)
from .newton import (
    JACOBIAN_MODES,
    SolveConfig,
    SolveReport,
    assemble_jacobian_analytic,
    assemble_jacobian_fd,
    check_cfl,
    default_initial_guess,
    newton_solve,
)
from .metrics import (
    DistanceEstimates,
    distance_estimates,
    effective_edges,
    hamiltonian_drift,
    map_error_1d,
    w2_action,
    w2_initial,
)
from .generators import (
    BENCHMARK_1D_W2,
    benchmark_1d_exact_map,
    benchmark_1d_map_densities,
    gaussian_density_1d,
    gaussian_density_2d,
    random_connected_graph,
    seeded_random_density,
    uniform_density,
)
from .scenarios import (
    EXIT_INPUT_ERROR,
    EXIT_INVARIANT_VIOLATION,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    SCENARIOS,
    ScenarioRun,
    ScenarioSpec,
    five_node_example,
    read_artifact,
    read_density_file,
    run_scenario,
    trajectory_from_artifact,
    write_artifact,
)

__version__ = "0.1.0"

__all__ = [
    "ARITHMETIC_MEAN",
    "ArithmeticMean",
    "BENCHMARK_1D_W2",
    "DimensionMismatchError",
    "DisconnectedGraphError",
    "DistanceEstimates",
    "DuplicateEdgeError",
    "EXIT_INPUT_ERROR",
    "EXIT_INVARIANT_VIOLATION",
    "EXIT_NOT_CONVERGED",
    "EXIT_OK",
    "EdgeNotInGraphError",
    "GraphConstructionError",
    "GraphOTError",
    "InputFormatError",
    "InvalidDensityError",
    "JACOBIAN_MODES",
    "Lattice1D",
    "Lattice2D",
    "LevelOutOfRangeError",
    "MOBILITIES",
    "Mobility",
    "NegativeDensityError",
    "NodeOutOfRangeError",
    "NonSquareGridError",
    "NonpositiveWeightError",
    "NotA1DLatticeError",
    "NotA2DLatticeError",
    "NotATreeError",
    "SCENARIOS",
    "ScenarioRun",
    "ScenarioSpec",
    "SelfLoopError",
    "SingularJacobianError",
    "SolveConfig",
    "SolveReport",
    "SpanningTree",
    "TooFewNodesError",
    "Trajectory",
    "TransportProblem",
    "UPWIND",
    "Upwind",
    "WeightedGraph",
    "assemble_jacobian_analytic",
    "assemble_jacobian_fd",
    "assemble_residual",
    "benchmark_1d_exact_map",
    "benchmark_1d_map_densities",
    "build_from_edge_list",
    "check_cfl",
    "complete_graph",
    "default_initial_guess",
    "distance_estimates",
    "divergence",
    "dumbbell",
    "effective_edges",
    "explicit_upwind_update",
    "five_node_example",
    "gaussian_density_1d",
    "gaussian_density_2d",
    "get_mobility",
    "hamiltonian",
    "hamiltonian_drift",
    "kruskal",
    "lattice_1d_periodic",
    "lattice_2d_periodic",
    "level_fields",
    "map_error_1d",
    "newton_solve",
    "nodal_kinetic",
    "pack",
    "pack_fields",
    "random_connected_graph",
    "read_artifact",
    "read_density_file",
    "read_edge_list",
    "read_tree_file",
    "recover_last_density",
    "reduced_rhs",
    "residual_fields",
    "run_scenario",
    "seeded_random_density",
    "state_size",
    "theta",
    "theta_partials",
    "trajectory_from_artifact",
    "uniform_density",
    "unpack",
    "w2_action",
    "w2_initial",
    "write_artifact",
    "write_edge_list",
]
