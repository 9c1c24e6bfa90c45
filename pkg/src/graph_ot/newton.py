"""Newton solver for the discrete geodesic residual.

The residual couples at most two consecutive time levels, so the Jacobian is
block bidiagonal in time and a sparse direct LU factorization solves each
Newton step in essentially linear time.  Three Jacobian modes are offered:
exact analytic assembly, a forward finite-difference assembly that exploits
the same level-local sparsity, and a chord mode that factors the analytic
Jacobian once at the initial iterate and reuses it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import metrics
from .errors import DimensionMismatchError, SingularJacobianError
from .graph import WeightedGraph
from .system import (
    TransportProblem,
    Trajectory,
    assemble_residual,
    density_residual_level,
    level_fields,
    pack_fields,
    residual_fields,
    state_size,
    unpack,
    velocity_residual_level,
)

__all__ = [
    "SolveConfig",
    "SolveReport",
    "JACOBIAN_MODES",
    "default_initial_guess",
    "assemble_jacobian_analytic",
    "assemble_jacobian_fd",
    "newton_solve",
    "check_cfl",
]

logger = logging.getLogger(__name__)

JACOBIAN_MODES = ("analytic", "fd", "chord")


@dataclass
class SolveConfig:
    """Newton iteration controls.

    ``fd_step`` is a base factor: the forward-difference step for unknown j
    is fd_step * (1 + |x_j|).  ``damping`` halves a rejected step up to 30
    times until the residual norm decreases; plain Newton when off.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100
    jacobian: str = "analytic"  # one of JACOBIAN_MODES
    fd_step: float = 1e-7
    damping: bool = False
    rcond_warn: float = 1e-12

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.jacobian not in JACOBIAN_MODES:
            raise ValueError(
                f"jacobian must be one of {JACOBIAN_MODES}, got {self.jacobian!r}"
            )
        if self.fd_step <= 0:
            raise ValueError("fd_step must be > 0")


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``status`` is "converged", "max_iterations_exceeded" or
    "nonfinite_residual"; ``converged`` is true iff the final residual norm
    is below the tolerance.  ``cfl_margin`` is the worst local margin
    1 - tau * sum sqrt(w) v^+ over nodes and the M update levels (relevant
    for the upwind model).  ``jacobian_rcond`` is a reciprocal-condition
    estimate from the first factored Jacobian, None when no factorization
    happened.
    """

    trajectory: Trajectory
    converged: bool
    status: str
    iterations: int
    residual_history: np.ndarray
    positivity_ok: bool
    cfl_margin: float
    w2_action: float
    w2_initial: float
    jacobian_rcond: float | None = None


def default_initial_guess(problem: TransportProblem) -> np.ndarray:
    """Linear density interpolation between the endpoints, zero velocities.

    Interior rows stay on the simplex by convexity; when mu == nu the guess
    already has zero residual.
    """
    m = problem.steps
    n1 = problem.graph.node_count - 1
    s = (np.arange(1, m) / m)[:, None]
    interior = (1.0 - s) * problem.mu[:n1] + s * problem.nu[:n1]
    return pack_fields(problem, interior, np.zeros((m + 1, n1)))


# -- Jacobian assembly -------------------------------------------------------


def assemble_jacobian_analytic(problem: TransportProblem, x: np.ndarray) -> sp.csr_matrix:
    """Exact sparse Jacobian of the residual at x.

    Includes the chain-rule terms through the eliminated density
    rho_N = 1 - sum rho_i and through the gauge expansion.  The velocity
    residual has no density derivative because both supported mobility
    models have density-independent partials; a model with curved partials
    would need an extra block here.
    """
    g = problem.graph
    tree = problem.tree
    model = problem.model
    m = problem.steps
    n = g.node_count
    n1 = n - 1
    tau = problem.tau
    sw = g.sqrt_weights

    rho, _, ve = level_fields(problem, x)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def add(r, c, v):
        rows.append(np.asarray(r, dtype=np.intp))
        cols.append(np.asarray(c, dtype=np.intp))
        vals.append(np.asarray(v, dtype=float))

    idx = np.arange(n1)
    ones = np.ones(n1)
    col_v0 = (m - 1) * n1
    row_v0 = m * n1

    # rows of the velocity residual pick head minus tail of the kinetic sums
    sel = sp.csr_matrix(
        (
            np.concatenate([0.5 * tau * tree.sqrt_weights, -0.5 * tau * tree.sqrt_weights]),
            (np.concatenate([idx, idx]), np.concatenate([tree.head, tree.tail])),
        ),
        shape=(n1, n),
    )
    expansion = tree.expansion

    for lv in range(1, m + 1):
        r = rho[lv - 1]
        v = ve[lv - 1]
        rt, rh = r[g.tail], r[g.head]
        th = model.theta_values(rt, rh, v)
        p_tail, p_head = model.theta_density_partials(rt, rh, v)
        p_head_own = model.theta_density_partials(rh, rt, -v)[0]

        row_d = (lv - 1) * n1
        row_v = row_v0 + (lv - 1) * n1

        # density residual: identity on the next-level density
        if lv + 1 <= m:
            add(row_d + idx, (lv - 1) * n1 + idx, ones)

        # density residual: -I + tau * flux derivative on the same level
        if lv >= 2:
            c0 = (lv - 2) * n1
            add(row_d + idx, c0 + idx, -ones)
            ct = sw * v * p_tail
            ch = sw * v * p_head
            er = np.concatenate([g.tail, g.tail, g.head, g.head])
            ec = np.concatenate([g.tail, g.head, g.tail, g.head])
            ev = np.concatenate([ct, ch, -ct, -ch])
            keep = er < n1
            er, ec, ev = er[keep], ec[keep], ev[keep]
            direct = ec < n1
            add(row_d + er[direct], c0 + ec[direct], tau * ev[direct])
            # a unit increase of any interior density lowers rho_N by one
            hit_last = ~direct
            if hit_last.any():
                add(
                    row_d + np.repeat(er[hit_last], n1),
                    c0 + np.tile(idx, int(hit_last.sum())),
                    -tau * np.repeat(ev[hit_last], n1),
                )

        # density residual: velocity derivative d(v*theta)/dv = theta(.,.,v)
        flux_v = (g.incidence @ sp.diags(sw * th) @ expansion)[:n1].tocoo()
        add(row_d + flux_v.row, col_v0 + (lv - 1) * n1 + flux_v.col, tau * flux_v.data)

        # velocity residual: identity on the next level
        add(row_v + idx, col_v0 + lv * n1 + idx, ones)

        # velocity residual: -I + derivative of the kinetic sums
        add(row_v + idx, col_v0 + (lv - 1) * n1 + idx, -ones)
        dg = g.tail_matrix @ sp.diags(2.0 * v * p_tail) + g.head_matrix @ sp.diags(
            2.0 * v * p_head_own
        )
        blk = (sel @ dg @ expansion).tocoo()
        add(row_v + blk.row, col_v0 + (lv - 1) * n1 + blk.col, blk.data)

    size = state_size(problem)
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    matrix.sum_duplicates()
    return matrix


def assemble_jacobian_fd(
    problem: TransportProblem, x: np.ndarray, fd_step: float = 1e-7
) -> sp.csr_matrix:
    """Forward finite-difference Jacobian with the level-local sparsity.

    Perturbing an unknown at time level l touches residual levels l-1 and l
    only, so each column recomputes at most three residual blocks instead of
    the full residual.
    """
    g = problem.graph
    tree = problem.tree
    m = problem.steps
    n1 = g.node_count - 1
    x = np.asarray(x, dtype=float)

    rho, vt, ve = level_fields(problem, x)
    base_rho, base_v = residual_fields(problem, rho, vt, ve)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    idx = np.arange(n1)
    col_v0 = (m - 1) * n1
    row_v0 = m * n1

    def add_block(row0: int, col: int, diff: np.ndarray):
        nz = np.flatnonzero(diff)
        if nz.size:
            rows.append(row0 + nz)
            cols.append(np.full(nz.size, col, dtype=np.intp))
            vals.append(diff[nz])

    # density unknowns live at levels 2..M
    for lv in range(2, m + 1):
        for i in range(n1):
            col = (lv - 2) * n1 + i
            h = fd_step * (1.0 + abs(x[col]))
            rho_p = rho[lv - 1].copy()
            rho_p[i] += h
            rho_p[n1] -= h  # mass elimination
            new = density_residual_level(problem, rho[lv - 2], rho_p, ve[lv - 2])
            add_block((lv - 2) * n1, col, (new - base_rho[lv - 2]) / h)
            new = density_residual_level(problem, rho_p, rho[lv], ve[lv - 1])
            add_block((lv - 1) * n1, col, (new - base_rho[lv - 1]) / h)
            new = velocity_residual_level(
                problem, rho_p, vt[lv - 1], vt[lv], ve[lv - 1]
            )
            add_block(row_v0 + (lv - 1) * n1, col, (new - base_v[lv - 1]) / h)

    # velocity unknowns live at levels 1..M+1
    for lv in range(1, m + 2):
        for f in range(n1):
            col = col_v0 + (lv - 1) * n1 + f
            h = fd_step * (1.0 + abs(x[col]))
            vt_p = vt[lv - 1].copy()
            vt_p[f] += h
            if lv <= m:
                ve_p = tree.expand_velocities(vt_p)
                new = density_residual_level(problem, rho[lv - 1], rho[lv], ve_p)
                add_block((lv - 1) * n1, col, (new - base_rho[lv - 1]) / h)
                new = velocity_residual_level(
                    problem, rho[lv - 1], vt_p, vt[lv], ve_p
                )
                add_block(row_v0 + (lv - 1) * n1, col, (new - base_v[lv - 1]) / h)
            if lv >= 2:
                new = velocity_residual_level(
                    problem, rho[lv - 2], vt[lv - 2], vt_p, ve[lv - 2]
                )
                add_block(row_v0 + (lv - 2) * n1, col, (new - base_v[lv - 2]) / h)

    size = state_size(problem)
    if rows:
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(size, size),
        ).tocsr()
    else:  # pragma: no cover - degenerate size-0 problems don't occur
        matrix = sp.csr_matrix((size, size))
    matrix.sum_duplicates()
    return matrix


# -- linear algebra helpers --------------------------------------------------


def _factor(matrix: sp.csr_matrix):
    try:
        return spla.splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SingularJacobianError(
            f"Jacobian factorization failed: {exc}"
        ) from exc


def _rcond_estimate(matrix: sp.csr_matrix, lu) -> float | None:
    """1 / (norm1(J) * est(norm1(J^-1))) from the existing factorization."""
    try:
        norm1 = spla.norm(matrix, 1)
        if norm1 == 0.0:
            return 0.0
        n = matrix.shape[0]
        inverse = spla.LinearOperator(
            (n, n),
            matvec=lu.solve,
            matmat=lu.solve,
            rmatvec=lambda b: lu.solve(b, trans="T"),
            dtype=float,
        )
        inv_norm1 = spla.onenormest(inverse)
        return float(1.0 / (norm1 * inv_norm1))
    except Exception:  # estimation is best-effort diagnostics only
        logger.debug("reciprocal-condition estimate failed", exc_info=True)
        return None


# -- the solver ---------------------------------------------------------------


def newton_solve(
    problem: TransportProblem,
    x0: np.ndarray | None = None,
    config: SolveConfig | None = None,
) -> SolveReport:
    """Solve the discrete geodesic equations by (quasi-)Newton iteration.

    Stops when the Euclidean residual norm drops below the tolerance or the
    iteration budget is exhausted.  Divergence and non-finite residuals are
    reported through the status, never raised; a failed factorization
    raises SingularJacobianError.
    """
    if config is None:
        config = SolveConfig()
    if x0 is None:
        x = default_initial_guess(problem)
    else:
        x = np.array(x0, dtype=float)
        if x.shape != (state_size(problem),):
            raise DimensionMismatchError(
                f"x0 must have shape ({state_size(problem)},), got {x.shape}"
            )

    residual = assemble_residual(problem, x)
    history = [float(np.linalg.norm(residual))]
    iterations = 0
    rcond: float | None = None
    chord_lu = None

    while True:
        if not np.isfinite(history[-1]):
            status = "nonfinite_residual"
            break
        if history[-1] < config.tolerance:
            status = "converged"
            break
        if iterations >= config.max_iterations:
            status = "max_iterations_exceeded"
            break

        if config.jacobian == "chord":
            if chord_lu is None:
                matrix = assemble_jacobian_analytic(problem, x)
                chord_lu = _factor(matrix)
                rcond = _rcond_estimate(matrix, chord_lu)
            lu = chord_lu
        else:
            if config.jacobian == "fd":
                matrix = assemble_jacobian_fd(problem, x, config.fd_step)
            else:
                matrix = assemble_jacobian_analytic(problem, x)
            lu = _factor(matrix)
            if rcond is None:
                rcond = _rcond_estimate(matrix, lu)

        step = lu.solve(-residual)
        if config.damping:
            alpha = 1.0
            for _ in range(31):
                trial = x + alpha * step
                trial_residual = assemble_residual(problem, trial)
                trial_norm = float(np.linalg.norm(trial_residual))
                if np.isfinite(trial_norm) and trial_norm < history[-1]:
                    break
                alpha *= 0.5
            x, residual = trial, trial_residual
        else:
            x = x + step
            residual = assemble_residual(problem, x)
        iterations += 1
        history.append(float(np.linalg.norm(residual)))

    if rcond is not None and rcond < config.rcond_warn:
        logger.warning(
            "Jacobian reciprocal-condition estimate %.3e below %.1e",
            rcond,
            config.rcond_warn,
        )

    trajectory = unpack(problem, x)
    m = problem.steps
    margins = _cfl_margins_all_levels(
        problem.graph, trajectory.edge_velocities[:m], problem.tau
    )
    report = SolveReport(
        trajectory=trajectory,
        converged=status == "converged",
        status=status,
        iterations=iterations,
        residual_history=np.array(history),
        positivity_ok=bool(trajectory.densities.min() >= 0.0),
        cfl_margin=float(margins.min()),
        w2_action=metrics.w2_action(trajectory, problem.graph, problem.model),
        w2_initial=metrics.w2_initial(trajectory, problem.graph, problem.model),
        jacobian_rcond=rcond,
    )
    logger.info(
        "newton_solve: status=%s iterations=%d residual=%.3e",
        report.status,
        report.iterations,
        history[-1],
    )
    return report


def _cfl_margins_all_levels(
    graph: WeightedGraph, edge_velocities: np.ndarray, tau: float
) -> np.ndarray:
    sw = graph.sqrt_weights
    vp = np.maximum(edge_velocities, 0.0)
    vm = np.maximum(-edge_velocities, 0.0)
    load = (graph.tail_matrix @ (sw * vp).T + graph.head_matrix @ (sw * vm).T).T
    return 1.0 - tau * load


def check_cfl(
    graph: WeightedGraph, v_edges: np.ndarray, tau: float
) -> tuple[np.ndarray, float]:
    """Local CFL margins and the global sufficient time-step bound.

    Returns (margins, tau_star): margin_i = 1 - tau * sum_j sqrt(w) v_ij^+
    and tau_star = 1 / (d_max * sqrt(w_max) * max|v|), reported as inf for a
    zero field.  Nonnegative margins everywhere guarantee the explicit
    upwind update preserves nonnegativity; tau <= tau_star implies that for
    every node.
    """
    v = np.asarray(v_edges, dtype=float)
    if v.shape != (graph.edge_count,):
        raise DimensionMismatchError(
            f"edge velocities must have shape ({graph.edge_count},), got {v.shape}"
        )
    margins = _cfl_margins_all_levels(graph, v[None, :], tau)[0]
    vmax = float(np.abs(v).max()) if v.size else 0.0
    if vmax == 0.0:
        tau_star = float("inf")
    else:
        tau_star = 1.0 / (graph.max_degree * float(graph.sqrt_weights.max()) * vmax)
    return margins, tau_star
