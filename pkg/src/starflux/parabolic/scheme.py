"""Implicit viscous step operator with algebraic node coupling.

One backward-Euler step solves a sparse linear system whose rows are:
upwind transport plus central diffusion at interior points, identities
at the outer Dirichlet points (so boundary values persist from the
current state), and the viscous transmission conditions at the junction
written with one-sided differences. The node rows carry no time
derivative; they are algebraic constraints enforced at every level, so
the junction flux balance holds to solver precision after each step.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..errors import (
    AssumptionViolated,
    LinearSolveFailure,
    NonPositiveParameter,
    UnstableConfig,
)
from ..grids import DiscreteState, Grid, new_state
from ..hyperbolic import PiecewiseConstantField
from ..network import CouplingMatrix, StarNetwork, alpha_from_k, validate_assumptions


@dataclass(frozen=True)
class SolverConfig:
    """Viscosity, step sizes, horizon, and the grid rule h = epsilon/h_rule."""

    epsilon: float
    T: float
    dt: float | None = None
    h_rule: float = 8.0

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise NonPositiveParameter("epsilon must be positive")
        if self.T <= 0.0:
            raise NonPositiveParameter("horizon T must be positive")
        if self.dt is not None and self.dt <= 0.0:
            raise NonPositiveParameter("dt must be positive")
        if self.h_rule < 4.0:
            raise NonPositiveParameter("h_rule must be at least 4")


def default_dt(net: StarNetwork, grid: Grid) -> float:
    """Transport-scale step: smallest spacing over twice the top speed."""
    return min(grid.spacings) / (2.0 * float(np.max(net.speeds())))


@dataclass(frozen=True)
class StepOperator:
    """Factorized implicit step, reusable across steps.

    rhs_scale maps the current state to the right-hand side: 1/dt at
    interior rows, 1 at Dirichlet rows (values persist), 0 at node rows.
    forcing is added on top each step. node_rows/inner_rows describe the
    junction stencil for flux diagnostics.
    """

    matrix: scipy.sparse.csc_matrix
    lu: scipy.sparse.linalg.SuperLU
    grid: Grid
    net: StarNetwork
    epsilon: float
    dt: float
    rhs_scale: np.ndarray
    forcing: np.ndarray
    offsets: tuple[int, ...]
    node_index: tuple[int, ...]
    inner_index: tuple[int, ...]
    node_block: np.ndarray
    unstable: bool

    @property
    def size(self) -> int:
        return self.rhs_scale.size


def _flatten(state: DiscreteState) -> np.ndarray:
    return np.concatenate(state.values)


def _split(flat: np.ndarray, grid: Grid, offsets: tuple[int, ...], t: float) -> DiscreteState:
    arrays = [
        flat[offsets[i] : offsets[i] + grid.cells[i] + 1]
        for i in range(grid.arc_count)
    ]
    return new_state(grid, arrays, t)


def assemble_step_operator(
    net: StarNetwork,
    K: CouplingMatrix,
    cfg: SolverConfig,
    grid: Grid,
    reaction: float = 0.0,
    forcing: PiecewiseConstantField | None = None,
    forcing_scale: float = 1.0,
) -> StepOperator:
    """Build and factorize the implicit step matrix.

    ``reaction`` adds a zeroth-order term to the interior rows and
    ``forcing`` a time-independent source (scaled by forcing_scale),
    which is how steady problems are marched. Warns UnstableConfig when
    any spacing exceeds epsilon/2, the point where the boundary layer
    is no longer resolved.
    """
    report = validate_assumptions(net, K)
    if not report.holds_sign_symmetry or not report.holds_incoming_linked:
        raise AssumptionViolated("; ".join(report.messages) or "assumptions fail")
    alpha = alpha_from_k(K).alpha
    eps = cfg.epsilon
    dt = cfg.dt if cfg.dt is not None else default_dt(net, grid)

    unstable = any(h > eps / 2.0 for h in grid.spacings)
    if unstable:
        warnings.warn(
            f"coarsest spacing {max(grid.spacings):.3e} exceeds epsilon/2 = "
            f"{eps / 2.0:.3e}; the viscous layer is unresolved",
            UnstableConfig,
        )

    offsets = []
    total = 0
    for i in range(net.m):
        offsets.append(total)
        total += grid.cells[i] + 1
    offsets_t = tuple(offsets)

    node_index = tuple(
        offsets_t[i] + (grid.cells[i] if net.arc(i).incoming else 0)
        for i in range(net.m)
    )
    inner_index = tuple(
        offsets_t[i] + (grid.cells[i] - 1 if net.arc(i).incoming else 1)
        for i in range(net.m)
    )

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs_scale = np.zeros(total)
    forcing_vec = np.zeros(total)

    def put(r: int, c: int, v: float) -> None:
        rows.append(r)
        cols.append(c)
        vals.append(v)

    for i, arc in enumerate(net.arcs):
        n = grid.cells[i]
        h = grid.spacings[i]
        lam = arc.speed
        base = offsets_t[i]
        adv = lam / h
        dif = eps / (h * h)

        for k in range(1, n):
            r = base + k
            put(r, r, 1.0 / dt + reaction + adv + 2.0 * dif)
            put(r, r - 1, -(adv + dif))
            put(r, r + 1, -dif)
            rhs_scale[r] = 1.0 / dt
            if forcing is not None:
                x_k = k * h
                forcing_vec[r] = forcing_scale * float(
                    forcing.arcs[i].evaluate(x_k)
                )

        outer = base + (0 if arc.incoming else n)
        put(outer, outer, 1.0)
        rhs_scale[outer] = 1.0

        # transmission row: algebraic, no time derivative
        r = node_index[i]
        eh = eps / h
        if arc.incoming:
            put(r, r, alpha[i, i] - lam + eh)
        else:
            put(r, r, alpha[i, i] + lam + eh)
        put(r, inner_index[i], -eh)
        for j in range(net.m):
            if j != i and alpha[i, j] != 0.0:
                put(r, node_index[j], alpha[i, j])
        rhs_scale[r] = 0.0

    matrix = scipy.sparse.csc_matrix(
        (vals, (rows, cols)), shape=(total, total)
    )
    try:
        lu = scipy.sparse.linalg.splu(matrix)
    except RuntimeError as exc:
        raise LinearSolveFailure(f"step matrix factorization failed: {exc}") from exc

    # node-value block used to project initial data onto the constraints
    node_block = np.zeros((net.m, net.m))
    for i, arc in enumerate(net.arcs):
        lam = arc.speed
        eh = eps / grid.spacings[i]
        node_block[i, i] = alpha[i, i] + eh + (-lam if arc.incoming else lam)
        for j in range(net.m):
            if j != i:
                node_block[i, j] = alpha[i, j]

    return StepOperator(
        matrix=matrix,
        lu=lu,
        grid=grid,
        net=net,
        epsilon=eps,
        dt=dt,
        rhs_scale=rhs_scale,
        forcing=forcing_vec,
        offsets=offsets_t,
        node_index=node_index,
        inner_index=inner_index,
        node_block=node_block,
        unstable=unstable,
    )


def step(state: DiscreteState, op: StepOperator) -> DiscreteState:
    """Advance one implicit step; raises LinearSolveFailure on blowup."""
    flat = _flatten(state)
    if flat.size != op.size:
        raise LinearSolveFailure(
            f"state has {flat.size} values, operator expects {op.size}"
        )
    rhs = op.rhs_scale * flat + op.forcing
    out = op.lu.solve(rhs)
    if not np.all(np.isfinite(out)):
        raise LinearSolveFailure("implicit solve produced non-finite values")
    return _split(out, op.grid, op.offsets, state.t + op.dt)


def flux_residual(state: DiscreteState, op: StepOperator) -> float:
    """Junction flux imbalance with the scheme's one-sided differences.

    Sums speed*u - eps*du at the node over incoming arcs minus the same
    over outgoing arcs; zero for any state satisfying the node rows.
    """
    flat = _flatten(state)
    total = 0.0
    for i, arc in enumerate(op.net.arcs):
        h = op.grid.spacings[i]
        u_node = flat[op.node_index[i]]
        u_in = flat[op.inner_index[i]]
        if arc.incoming:
            du = (u_node - u_in) / h
            total += arc.speed * u_node - op.epsilon * du
        else:
            du = (u_in - u_node) / h
            total -= arc.speed * u_node - op.epsilon * du
    return float(total)


def compatibility_residual(state: DiscreteState, op: StepOperator) -> float:
    """Largest defect of the discrete node conditions for this state."""
    flat = _flatten(state)
    rows = np.asarray(op.node_index)
    resid = op.matrix[rows, :] @ flat
    return float(np.max(np.abs(resid)))


def project_node_values(state: DiscreteState, op: StepOperator) -> DiscreteState:
    """Overwrite the m junction values so the node rows hold exactly.

    Solves the m x m node block with the neighboring interior values
    frozen; this is the consistent initialization of the algebraic
    constraints and leaves every other value untouched.
    """
    flat = _flatten(state).copy()
    rhs = np.array(
        [
            op.epsilon / op.grid.spacings[i] * flat[op.inner_index[i]]
            for i in range(op.net.m)
        ]
    )
    try:
        node_vals = np.linalg.solve(op.node_block, rhs)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveFailure(f"node projection failed: {exc}") from exc
    flat[list(op.node_index)] = node_vals
    return _split(flat, op.grid, op.offsets, state.t)
