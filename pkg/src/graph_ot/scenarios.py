"""Scenario resolution, execution, and the trajectory artifact format.

A scenario bundles a graph source, endpoint densities, and solver options
into one reproducible run.  Every run writes a single JSON document with a
versioned schema: resolved config, graph summary, solver diagnostics, the
full trajectory arrays, and scenario-specific extras.  Arrays round-trip
bitwise through the writer and reader.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputFormatError, InvalidDensityError, NegativeDensityError
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
from .metrics import effective_edges, hamiltonian_drift, map_error_1d
from .mobility import get_mobility
from .newton import SolveConfig, SolveReport, check_cfl, newton_solve
from .system import TransportProblem, Trajectory
from .tree import SpanningTree, read_tree_file

__all__ = [
    "ScenarioSpec",
    "ScenarioRun",
    "SCENARIOS",
    "five_node_example",
    "run_scenario",
    "read_density_file",
    "write_artifact",
    "read_artifact",
    "trajectory_from_artifact",
    "EXIT_OK",
    "EXIT_INPUT_ERROR",
    "EXIT_NOT_CONVERGED",
    "EXIT_INVARIANT_VIOLATION",
]

logger = logging.getLogger(__name__)

ARTIFACT_SCHEMA = "graph-ot/1"
_MASS_MONITOR_TOL = 1e-10

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NOT_CONVERGED = 3
EXIT_INVARIANT_VIOLATION = 4


@dataclass
class ScenarioSpec:
    """Everything needed to run one scenario.

    Unset fields fall back to per-scenario defaults; at most one graph
    source and one density source per endpoint may be set.
    """

    scenario: str
    graph_file: str | None = None
    lattice1d: tuple[int, float] | None = None
    lattice2d: tuple[int, float] | None = None
    dumbbell_sizes: tuple[int, int] | None = None
    complete: int | None = None
    origin: float | None = None
    mu_file: str | None = None
    mu_gauss1d: tuple[float, float, float] | None = None
    mu_gauss2d: tuple[float, float, float, float, float, float] | None = None
    mu_random: bool = False
    mu_uniform: bool = False
    nu_file: str | None = None
    nu_gauss1d: tuple[float, float, float] | None = None
    nu_gauss2d: tuple[float, float, float, float, float, float] | None = None
    nu_random: bool = False
    nu_uniform: bool = False
    normalize: bool = False
    steps: int | None = None
    theta: str | None = None
    jacobian: str = "analytic"
    tolerance: float = 1e-10
    max_iterations: int = 100
    # None means the per-scenario default (off everywhere except benchmark-2d,
    # whose concentrated endpoint profiles sit far from the linear-path guess)
    damping: bool | None = None
    tree_files: tuple[str, ...] = ()
    threshold: float | None = None
    seed: int = 0
    out: str | None = None


@dataclass
class ScenarioRun:
    """Result of run_scenario: exit code, artifact document, output path."""

    exit_code: int
    document: dict
    out_path: Path
    reports: list[SolveReport] = field(default_factory=list)


def five_node_example() -> WeightedGraph:
    """5-cycle with the extra chord (1, 3), unit weights."""
    return build_from_edge_list(
        [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (1, 5, 1.0), (1, 3, 1.0)]
    )


_FIVE_NODE_TREES = (
    ((1, 2), (2, 3), (3, 4), (4, 5)),
    ((2, 3), (3, 4), (4, 5), (1, 5)),
    ((2, 3), (1, 3), (1, 5), (4, 5)),
)


# -- input files --------------------------------------------------------------


def read_density_file(
    path: str | Path, node_count: int, normalize: bool = False
) -> np.ndarray:
    """Read a density vector: one decimal per line, # comments ignored.

    Without ``normalize`` the values must sum to 1 within 1e-8; the vector
    is then rescaled exactly either way so downstream mass checks hold.
    """
    path = Path(path)
    values = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise InputFormatError(
                f"{path}:{lineno}: expected a decimal, got {text!r}"
            ) from None
    rho = np.array(values, dtype=float)
    if rho.shape != (node_count,):
        raise InputFormatError(
            f"{path}: expected {node_count} values, got {rho.shape[0]}"
        )
    if np.any(rho < 0.0):
        raise NegativeDensityError(f"{path}: densities must be nonnegative")
    total = float(rho.sum())
    if total <= 0.0:
        raise InvalidDensityError(f"{path}: densities sum to {total!r}")
    if not normalize and abs(total - 1.0) > 1e-8:
        raise InvalidDensityError(
            f"{path}: mass {total!r} differs from 1 by more than 1e-8 "
            f"(pass --normalize to rescale)"
        )
    return rho / total


# -- source resolution ---------------------------------------------------------


def _resolve_graph(spec: ScenarioSpec) -> tuple[WeightedGraph | None, dict]:
    """Build the user-selected graph, or None when no source was given."""
    sources = [
        spec.graph_file is not None,
        spec.lattice1d is not None,
        spec.lattice2d is not None,
        spec.dumbbell_sizes is not None,
        spec.complete is not None,
    ]
    if sum(sources) > 1:
        raise InputFormatError("give at most one graph source")
    if spec.graph_file is not None:
        return read_edge_list(spec.graph_file), {"kind": "file", "path": spec.graph_file}
    if spec.lattice1d is not None:
        n, length = spec.lattice1d
        origin = 0.0 if spec.origin is None else spec.origin
        g = lattice_1d_periodic(int(n), float(length), origin)
        return g, {"kind": "lattice1d", "grid_points": int(n), "length": float(length), "origin": origin}
    if spec.lattice2d is not None:
        n, side = spec.lattice2d
        origin = 0.0 if spec.origin is None else spec.origin
        g = lattice_2d_periodic(int(n), int(n), float(side), origin)
        return g, {"kind": "lattice2d", "points_per_side": int(n), "side": float(side), "origin": origin}
    if spec.dumbbell_sizes is not None:
        left, right = spec.dumbbell_sizes
        return dumbbell(int(left), int(right)), {"kind": "dumbbell", "left": int(left), "right": int(right)}
    if spec.complete is not None:
        return complete_graph(int(spec.complete)), {"kind": "complete", "node_count": int(spec.complete)}
    return None, {}


def _resolve_density(
    spec: ScenarioSpec, graph: WeightedGraph, endpoint: str
) -> tuple[np.ndarray | None, dict]:
    """Build one endpoint density from its selected source, or None."""
    file_ = getattr(spec, f"{endpoint}_file")
    gauss1d = getattr(spec, f"{endpoint}_gauss1d")
    gauss2d = getattr(spec, f"{endpoint}_gauss2d")
    random_ = getattr(spec, f"{endpoint}_random")
    uniform = getattr(spec, f"{endpoint}_uniform")
    sources = [file_ is not None, gauss1d is not None, gauss2d is not None, random_, uniform]
    if sum(sources) > 1:
        raise InputFormatError(f"give at most one source for {endpoint}")
    if file_ is not None:
        return (
            read_density_file(file_, graph.node_count, spec.normalize),
            {"kind": "file", "path": file_},
        )
    if gauss1d is not None:
        a, b, r = gauss1d
        return gaussian_density_1d(graph, a, b, r), {"kind": "gauss1d", "a": a, "b": b, "r": r}
    if gauss2d is not None:
        a, c, b, d, w, eps = gauss2d
        return (
            gaussian_density_2d(graph, a, c, b, d, w, eps),
            {"kind": "gauss2d", "a": a, "c": c, "b": b, "d": d, "w": w, "eps": eps},
        )
    if random_:
        # mu and nu draw from different seeded streams so they differ
        seed = spec.seed if endpoint == "mu" else spec.seed + 1
        return seeded_random_density(graph.node_count, seed), {"kind": "random", "seed": seed}
    if uniform:
        return uniform_density(graph.node_count), {"kind": "uniform"}
    return None, {}


def _resolve_tree(
    spec: ScenarioSpec, graph: WeightedGraph
) -> tuple[SpanningTree | None, dict]:
    if not spec.tree_files:
        return None, {"kind": "kruskal"}
    if len(spec.tree_files) > 1:
        raise InputFormatError(
            f"scenario {spec.scenario!r} accepts a single --tree"
        )
    path = spec.tree_files[0]
    return read_tree_file(path, graph), {"kind": "file", "path": path}


# -- artifact document ---------------------------------------------------------


def _geometry_block(graph: WeightedGraph) -> dict | None:
    geom = graph.geometry
    if isinstance(geom, Lattice1D):
        return {
            "kind": "lattice1d",
            "grid_points": geom.grid_points,
            "length": geom.length,
            "origin": geom.origin,
        }
    if isinstance(geom, Lattice2D):
        return {
            "kind": "lattice2d",
            "nx": geom.nx,
            "ny": geom.ny,
            "side": geom.side,
            "origin": geom.origin,
        }
    return None


def _graph_block(graph: WeightedGraph) -> dict:
    return {
        "node_count": graph.node_count,
        "edge_count": graph.edge_count,
        "edges": [list(e) for e in graph.edges],
        "weights": graph.weights.tolist(),
        "geometry": _geometry_block(graph),
    }


def _solver_block(report: SolveReport, wall_time: float) -> dict:
    return {
        "status": report.status,
        "converged": report.converged,
        "iterations": report.iterations,
        "residual_history": report.residual_history.tolist(),
        "positivity_ok": report.positivity_ok,
        "cfl_margin": report.cfl_margin,
        "jacobian_rcond": report.jacobian_rcond,
        "wall_time_seconds": wall_time,
    }


def _metrics_block(problem: TransportProblem, report: SolveReport) -> dict:
    trajectory = report.trajectory
    return {
        "w2_action": report.w2_action,
        "w2_initial": report.w2_initial,
        "w2": float(np.sqrt(max(report.w2_action, 0.0))),
        "hamiltonian_drift": hamiltonian_drift(
            trajectory, problem.graph, problem.model
        ),
    }


def _trajectory_block(trajectory: Trajectory) -> dict:
    return {
        "times": trajectory.times.tolist(),
        "densities": trajectory.densities.tolist(),
        "tree_velocities": trajectory.tree_velocities.tolist(),
        "edge_velocities": trajectory.edge_velocities.tolist(),
    }


def trajectory_from_artifact(document: dict) -> Trajectory:
    """Rebuild the Trajectory arrays from a parsed artifact document."""
    block = document["trajectory"]
    return Trajectory(
        times=np.array(block["times"], dtype=float),
        densities=np.array(block["densities"], dtype=float),
        tree_velocities=np.array(block["tree_velocities"], dtype=float),
        edge_velocities=np.array(block["edge_velocities"], dtype=float),
    )


def write_artifact(document: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(document, indent=1) + "\n")


def read_artifact(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def _monitors_clean(report: SolveReport) -> bool:
    row_mass = report.trajectory.densities.sum(axis=1)
    mass_ok = bool(np.abs(row_mass - 1.0).max() <= _MASS_MONITOR_TOL)
    return mass_ok and report.positivity_ok


def _classify(reports: list[SolveReport]) -> int:
    if not all(r.converged for r in reports):
        return EXIT_NOT_CONVERGED
    if not all(_monitors_clean(r) for r in reports):
        return EXIT_INVARIANT_VIOLATION
    return EXIT_OK


def _resolve_damping(spec: ScenarioSpec, scenario_default: bool = False) -> bool:
    return scenario_default if spec.damping is None else spec.damping


def _config_block(
    spec: ScenarioSpec, problem: TransportProblem, resolved: dict, damping: bool
) -> dict:
    return {
        "scenario": spec.scenario,
        "steps": problem.steps,
        "tau": problem.tau,
        "theta": problem.model.kind,
        "jacobian": spec.jacobian,
        "tolerance": spec.tolerance,
        "max_iterations": spec.max_iterations,
        "damping": damping,
        "seed": spec.seed,
        "threshold": spec.threshold,
        "normalize": spec.normalize,
        **resolved,
    }


def _solve_document(
    spec: ScenarioSpec,
    problem: TransportProblem,
    resolved: dict,
    extras: dict | None = None,
    damping_default: bool = False,
) -> tuple[SolveReport, dict, float]:
    damping = _resolve_damping(spec, damping_default)
    config = SolveConfig(
        tolerance=spec.tolerance,
        max_iterations=spec.max_iterations,
        jacobian=spec.jacobian,
        damping=damping,
    )
    start = time.monotonic()
    report = newton_solve(problem, config=config)
    wall_time = time.monotonic() - start
    document = {
        "schema": ARTIFACT_SCHEMA,
        "scenario": spec.scenario,
        "config": _config_block(spec, problem, resolved, damping),
        "graph": _graph_block(problem.graph),
        "tree_edges": [list(e) for e in problem.tree.tree_edges],
        "solver": _solver_block(report, wall_time),
        "metrics": _metrics_block(problem, report),
        "trajectory": _trajectory_block(report.trajectory),
    }
    if extras:
        document["extras"] = extras
    return report, document, wall_time


# -- scenario handlers ----------------------------------------------------------


def _default_model(spec: ScenarioSpec, fallback: str = "mean"):
    return get_mobility(spec.theta if spec.theta is not None else fallback)


def _seeded_endpoints(spec: ScenarioSpec, graph: WeightedGraph):
    mu, mu_src = _resolve_density(spec, graph, "mu")
    nu, nu_src = _resolve_density(spec, graph, "nu")
    if mu is None:
        mu = seeded_random_density(graph.node_count, spec.seed)
        mu_src = {"kind": "random", "seed": spec.seed}
    if nu is None:
        nu = seeded_random_density(graph.node_count, spec.seed + 1)
        nu_src = {"kind": "random", "seed": spec.seed + 1}
    return mu, nu, {"mu_source": mu_src, "nu_source": nu_src}


def _run_solve(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        raise InputFormatError("scenario 'solve' needs a graph source")
    mu, mu_src = _resolve_density(spec, graph, "mu")
    nu, nu_src = _resolve_density(spec, graph, "nu")
    if mu is None or nu is None:
        raise InputFormatError("scenario 'solve' needs both --mu and --nu sources")
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 32, model=_default_model(spec), tree=tree
    )
    resolved = {
        "graph_source": graph_src,
        "mu_source": mu_src,
        "nu_source": nu_src,
        "tree_source": tree_src,
    }
    report, document, _ = _solve_document(spec, problem, resolved)
    return _finish(spec, document, [report])


def _run_benchmark_1d(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        origin = -1.0 if spec.origin is None else spec.origin
        graph = lattice_1d_periodic(64, 4.0, origin)
        graph_src = {"kind": "lattice1d", "grid_points": 64, "length": 4.0, "origin": origin}
    mu, mu_src = _resolve_density(spec, graph, "mu")
    nu, nu_src = _resolve_density(spec, graph, "nu")
    if mu is None:
        mu = gaussian_density_1d(graph, 15.0, 1.4, 1e-4)
        mu_src = {"kind": "gauss1d", "a": 15.0, "b": 1.4, "r": 1e-4}
    if nu is None:
        nu = gaussian_density_1d(graph, 15.0, 1.7, 1e-4)
        nu_src = {"kind": "gauss1d", "a": 15.0, "b": 1.7, "r": 1e-4}
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 32, model=_default_model(spec), tree=tree
    )
    resolved = {
        "graph_source": graph_src,
        "mu_source": mu_src,
        "nu_source": nu_src,
        "tree_source": tree_src,
    }
    report, document, wall_time = _solve_document(spec, problem, resolved)
    geom = graph.geometry
    document["extras"] = {
        "results_row": {
            "dx": geom.spacing if isinstance(geom, Lattice1D) else None,
            "w2": float(np.sqrt(max(report.w2_action, 0.0))),
            "map_error": None,
            "wall_time_seconds": wall_time,
        }
    }
    return _finish(spec, document, [report])


def _run_benchmark_2d(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        # desk-scale default; pass --lattice2d 64 4.0 for the full-size run
        origin = -1.0 if spec.origin is None else spec.origin
        graph = lattice_2d_periodic(16, 16, 4.0, origin)
        graph_src = {"kind": "lattice2d", "points_per_side": 16, "side": 4.0, "origin": origin}
    mu, mu_src = _resolve_density(spec, graph, "mu")
    nu, nu_src = _resolve_density(spec, graph, "nu")
    if mu is None:
        mu = gaussian_density_2d(graph, 10.0, 10.0, 0.5, 1.5, 1.0, 1e-4)
        mu_src = {"kind": "gauss2d", "a": 10.0, "c": 10.0, "b": 0.5, "d": 1.5, "w": 1.0, "eps": 1e-4}
    if nu is None:
        nu = gaussian_density_2d(graph, 10.0, 10.0, 1.5, 1.3, 1.0, 1e-4)
        nu_src = {"kind": "gauss2d", "a": 10.0, "c": 10.0, "b": 1.5, "d": 1.3, "w": 1.0, "eps": 1e-4}
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 16, model=_default_model(spec), tree=tree
    )
    resolved = {
        "graph_source": graph_src,
        "mu_source": mu_src,
        "nu_source": nu_src,
        "tree_source": tree_src,
    }
    report, document, wall_time = _solve_document(
        spec, problem, resolved, damping_default=True
    )
    geom = graph.geometry
    document["extras"] = {
        "results_row": {
            "dx": geom.spacing if isinstance(geom, Lattice2D) else None,
            "w2": float(np.sqrt(max(report.w2_action, 0.0))),
            "map_error": None,
            "wall_time_seconds": wall_time,
        }
    }
    return _finish(spec, document, [report])


def _run_map_benchmark(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        graph = lattice_1d_periodic(128, 1.0, 0.0)
        graph_src = {"kind": "lattice1d", "grid_points": 128, "length": 1.0, "origin": 0.0}
    geom = graph.geometry
    if not isinstance(geom, Lattice1D) or geom.length != 1.0:
        raise InputFormatError("map-benchmark needs a 1-d lattice over [0, 1]")
    mu, nu = benchmark_1d_map_densities(graph)
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 64, model=_default_model(spec), tree=tree
    )
    resolved = {
        "graph_source": graph_src,
        "mu_source": {"kind": "benchmark-map"},
        "nu_source": {"kind": "benchmark-map"},
        "tree_source": tree_src,
    }
    report, document, wall_time = _solve_document(spec, problem, resolved)
    error = map_error_1d(report.trajectory, graph, benchmark_1d_exact_map)
    document["extras"] = {
        "results_row": {
            "dx": geom.spacing,
            "w2": float(np.sqrt(max(report.w2_action, 0.0))),
            "map_error": error,
            "wall_time_seconds": wall_time,
        },
        "analytic_w2": float(BENCHMARK_1D_W2),
    }
    return _finish(spec, document, [report])


def _run_tree_compare(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        graph = five_node_example()
        graph_src = {"kind": "five-node-example"}
        default_trees = [SpanningTree(graph, edges) for edges in _FIVE_NODE_TREES]
    else:
        default_trees = []
    if spec.tree_files:
        trees = [read_tree_file(p, graph) for p in spec.tree_files]
        tree_src = {"kind": "files", "paths": list(spec.tree_files)}
    elif default_trees:
        trees = default_trees
        tree_src = {"kind": "five-node-default-trees"}
    else:
        raise InputFormatError(
            "tree-compare on a custom graph needs at least one --tree file"
        )
    mu, nu, endpoint_src = _seeded_endpoints(spec, graph)
    steps = spec.steps or 64
    model = _default_model(spec)
    damping = _resolve_damping(spec)
    config = SolveConfig(
        tolerance=spec.tolerance,
        max_iterations=spec.max_iterations,
        jacobian=spec.jacobian,
        damping=damping,
    )

    reports = []
    per_tree = []
    problems = []
    for tree in trees:
        problem = TransportProblem(graph, mu, nu, steps, model=model, tree=tree)
        start = time.monotonic()
        report = newton_solve(problem, config=config)
        wall_time = time.monotonic() - start
        reports.append(report)
        problems.append(problem)
        per_tree.append(
            {
                "tree_edges": [list(e) for e in tree.tree_edges],
                "w2_action": report.w2_action,
                "w2_initial": report.w2_initial,
                "iterations": report.iterations,
                "converged": report.converged,
                "wall_time_seconds": wall_time,
            }
        )

    gaps = {"action": 0.0, "initial": 0.0, "densities": 0.0, "edge_velocities": 0.0}
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            ti, tj = reports[i].trajectory, reports[j].trajectory
            gaps["action"] = max(
                gaps["action"], abs(reports[i].w2_action - reports[j].w2_action)
            )
            gaps["initial"] = max(
                gaps["initial"], abs(reports[i].w2_initial - reports[j].w2_initial)
            )
            gaps["densities"] = max(
                gaps["densities"], float(np.abs(ti.densities - tj.densities).max())
            )
            gaps["edge_velocities"] = max(
                gaps["edge_velocities"],
                float(np.abs(ti.edge_velocities - tj.edge_velocities).max()),
            )

    resolved = {"graph_source": graph_src, "tree_source": tree_src, **endpoint_src}
    first = reports[0]
    document = {
        "schema": ARTIFACT_SCHEMA,
        "scenario": spec.scenario,
        "config": _config_block(spec, problems[0], resolved, damping),
        "graph": _graph_block(graph),
        "tree_edges": [list(e) for e in trees[0].tree_edges],
        "solver": _solver_block(first, per_tree[0]["wall_time_seconds"]),
        "metrics": _metrics_block(problems[0], first),
        "trajectory": _trajectory_block(first.trajectory),
        "extras": {"per_tree": per_tree, "max_pairwise_gaps": gaps},
    }
    return _finish(spec, document, reports)


def _run_dumbbell(spec: ScenarioSpec) -> ScenarioRun:
    left, right = spec.dumbbell_sizes or (4, 4)
    graph = dumbbell(int(left), int(right))
    graph_src = {"kind": "dumbbell", "left": int(left), "right": int(right)}
    mu, nu, endpoint_src = _seeded_endpoints(spec, graph)
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 128, model=_default_model(spec), tree=tree
    )
    resolved = {"graph_source": graph_src, "tree_source": tree_src, **endpoint_src}
    report, document, _ = _solve_document(spec, problem, resolved)

    bridge = (int(left), int(left) + 1)
    mean_abs = np.abs(report.trajectory.edge_velocities).mean(axis=0)
    document["extras"] = {
        "bridge_edge": list(bridge),
        "bridge_mean_abs_velocity": float(mean_abs[graph.edge_position(*bridge)]),
        "edge_mean_abs_velocity": mean_abs.tolist(),
        "overall_mean_abs_velocity": float(mean_abs.mean()),
        "min_density": float(report.trajectory.densities.min()),
    }
    return _finish(spec, document, [report])


def _run_recover_topology(spec: ScenarioSpec) -> ScenarioRun:
    n = spec.complete or 10
    graph = complete_graph(int(n))
    graph_src = {"kind": "complete", "node_count": int(n)}
    mu, nu, endpoint_src = _seeded_endpoints(spec, graph)
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 128, model=_default_model(spec), tree=tree
    )
    resolved = {"graph_source": graph_src, "tree_source": tree_src, **endpoint_src}
    report, document, _ = _solve_document(spec, problem, resolved)

    threshold = spec.threshold if spec.threshold is not None else 1e-3
    per_level = [
        [list(e) for e in effective_edges(report.trajectory, graph, level, threshold)]
        for level in range(1, problem.steps + 2)
    ]
    document["extras"] = {
        "threshold": threshold,
        "effective_edges_per_level": per_level,
        "effective_edge_count_per_level": [len(es) for es in per_level],
    }
    return _finish(spec, document, [report])


def _run_consensus(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        graph = random_connected_graph(10, 0.3, spec.seed)
        graph_src = {
            "kind": "random-connected",
            "node_count": 10,
            "extra_edge_probability": 0.3,
            "seed": spec.seed,
        }
    mu, mu_src = _resolve_density(spec, graph, "mu")
    nu, nu_src = _resolve_density(spec, graph, "nu")
    if mu is None:
        mu = seeded_random_density(graph.node_count, spec.seed + 1)
        mu_src = {"kind": "random", "seed": spec.seed + 1}
    if nu is None:
        nu = uniform_density(graph.node_count)
        nu_src = {"kind": "uniform"}
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 256, model=_default_model(spec), tree=tree
    )
    resolved = {
        "graph_source": graph_src,
        "mu_source": mu_src,
        "nu_source": nu_src,
        "tree_source": tree_src,
    }
    report, document, _ = _solve_document(spec, problem, resolved)
    uniform = 1.0 / graph.node_count
    deviation = np.abs(report.trajectory.densities - uniform).max(axis=1)
    document["extras"] = {
        "max_deviation_from_uniform_per_level": deviation.tolist(),
        "final_deviation_from_uniform": float(deviation[-1]),
    }
    return _finish(spec, document, [report])


def _run_check_cfl(spec: ScenarioSpec) -> ScenarioRun:
    graph, graph_src = _resolve_graph(spec)
    if graph is None:
        graph = dumbbell(4, 4)
        graph_src = {"kind": "dumbbell", "left": 4, "right": 4}
    mu, nu, endpoint_src = _seeded_endpoints(spec, graph)
    tree, tree_src = _resolve_tree(spec, graph)
    problem = TransportProblem(
        graph, mu, nu, spec.steps or 128, model=_default_model(spec, "upwind"), tree=tree
    )
    resolved = {"graph_source": graph_src, "tree_source": tree_src, **endpoint_src}
    report, document, _ = _solve_document(spec, problem, resolved)

    velocities = report.trajectory.edge_velocities[: problem.steps]
    margins = []
    for level_v in velocities:
        level_margins, _ = check_cfl(graph, level_v, problem.tau)
        margins.append(float(level_margins.min()))
    vmax = float(np.abs(velocities).max()) if velocities.size else 0.0
    if vmax == 0.0:
        tau_star = None  # unbounded
    else:
        tau_star = 1.0 / (graph.max_degree * float(graph.sqrt_weights.max()) * vmax)
    document["extras"] = {
        "tau": problem.tau,
        "tau_star": tau_star,
        "min_margin_per_level": margins,
        "min_margin": min(margins) if margins else 1.0,
        "cfl_satisfied": bool(margins and min(margins) >= 0.0),
    }
    return _finish(spec, document, [report])


SCENARIOS = {
    "solve": _run_solve,
    "benchmark-1d": _run_benchmark_1d,
    "benchmark-2d": _run_benchmark_2d,
    "map-benchmark": _run_map_benchmark,
    "tree-compare": _run_tree_compare,
    "dumbbell": _run_dumbbell,
    "recover-topology": _run_recover_topology,
    "consensus": _run_consensus,
    "check-cfl": _run_check_cfl,
}


def _finish(spec: ScenarioSpec, document: dict, reports: list[SolveReport]) -> ScenarioRun:
    exit_code = _classify(reports)
    document["exit_code"] = exit_code
    out_path = Path(spec.out) if spec.out else Path(f"graph_ot_{spec.scenario}.json")
    write_artifact(document, out_path)
    logger.info("scenario %s -> %s (exit %d)", spec.scenario, out_path, exit_code)
    return ScenarioRun(exit_code, document, out_path, reports)


def run_scenario(spec: ScenarioSpec) -> ScenarioRun:
    """Resolve defaults, solve, and write the artifact; returns the outcome.

    Raises GraphOTError subclasses on invalid inputs; solver non-convergence
    and invariant violations are reported through the exit code instead.
    """
    try:
        handler = SCENARIOS[spec.scenario]
    except KeyError:
        raise InputFormatError(
            f"unknown scenario {spec.scenario!r}; choose from {sorted(SCENARIOS)}"
        ) from None
    return handler(spec)
