"""Experiment orchestration: the viscosity sweep and CSV emission.

run_convergence drives the full pipeline per viscosity level: smooth the
rough data into admissible form, march the viscous scheme, solve the
inviscid problem exactly from the transmission weights, and tabulate the
L1 gaps. Rows are independent, so the sweep can fan out over a bounded
process pool; a failure in one row is recorded with its reason and never
disturbs the others.

The module also hosts the thin runners behind the other subcommands
(gamma/design/simulate/approx-data) and the CSV formatting used by all
of them: fixed 17-significant-digit scientific notation, so emitted
doubles round-trip exactly and runs can be diffed byte for byte.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .configio import load_experiment, load_initial_data, load_network
from .dataprep import DEFAULT_THETA, build_compatible
from .errors import ConfigError
from .hyperbolic import (
    ArcProfile,
    HyperbolicSolution,
    PiecewiseConstantField,
    l1_distance,
    solve_exact,
)
from .network import CouplingMatrix, StarNetwork, build_network
from .parabolic import ParabolicTrajectory, SolverConfig, solve_parabolic
from .transmission import TransmissionSystem, compute_gamma


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExperimentSpec:
    """Resolved viscosity-sweep plan: inputs in memory, levels validated."""

    net: StarNetwork
    K: CouplingMatrix
    u0: PiecewiseConstantField
    B: np.ndarray
    epsilons: tuple[float, ...]
    T: float
    h_rule: float = 8.0
    theta: float = DEFAULT_THETA

    def __post_init__(self) -> None:
        if not self.epsilons:
            raise ConfigError("epsilons: need at least one viscosity level")
        if any(e <= 0.0 for e in self.epsilons):
            raise ConfigError("epsilons: all entries must be positive")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ConfigError("epsilons: must be strictly decreasing")
        if self.T <= 0.0:
            raise ConfigError("T: must be positive")


def load_experiment_spec(path: str | Path) -> ExperimentSpec:
    """Read an experiment document and everything it points at."""
    cfg = load_experiment(path)
    net, K = load_network(cfg.network_path)
    assert K is not None
    u0, B = load_initial_data(cfg.data_path, net)
    return ExperimentSpec(
        net=net,
        K=K,
        u0=u0,
        B=B,
        epsilons=cfg.epsilons,
        T=cfg.T,
        h_rule=cfg.h_rule,
        theta=cfg.theta,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    """One viscosity level of the sweep; wall_time is always last."""

    epsilon: float
    h: float
    dt: float
    l1_error_final_time: float
    node_trace_l1_error: float
    flux_residual_max: float
    min_value: float
    wall_time: float

    FIELDS = (
        "epsilon",
        "h",
        "dt",
        "l1_error_final_time",
        "node_trace_l1_error",
        "flux_residual_max",
        "min_value",
        "wall_time",
    )

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.epsilon,
            self.h,
            self.dt,
            self.l1_error_final_time,
            self.node_trace_l1_error,
            self.flux_residual_max,
            self.min_value,
            self.wall_time,
        )


@dataclass(frozen=True)
class ConvergenceReport:
    """Sweep outcome: rows sorted by viscosity descending, plus failures.

    failures pairs each aborted viscosity level with the reason string;
    an aborted level never removes or corrupts the successful rows.
    """

    rows: tuple[ConvergenceRow, ...]
    failures: tuple[tuple[float, str], ...]

    def csv(self) -> str:
        return _csv(
            ConvergenceRow.FIELDS,
            ([_fmt(v) for v in row.as_tuple()] for row in self.rows),
        )


def node_trace_error(
    trajectory: ParabolicTrajectory, exact: HyperbolicSolution
) -> float:
    """L1 gap on (0, T) between marched and exact outgoing junction traces.

    Only outgoing arcs are compared: their junction value feeds the
    characteristics directly, so the viscous trace approaches the exact
    transmitted value. Incoming arcs keep an O(1) node layer for every
    viscosity, so their pointwise junction values are not expected to
    match the inviscid traces.
    """
    net = exact.net
    step_times = trajectory.diagnostics[:, 0]
    horizon = step_times[-1]
    total = 0.0
    for pos, arc_id in enumerate(net.outgoing_ids):
        signal = exact.node_values[pos]
        inner = signal.breakpoints[
            (signal.breakpoints > 0.0) & (signal.breakpoints < horizon)
        ]
        edges = np.unique(np.concatenate([step_times, inner]))
        mids = 0.5 * (edges[:-1] + edges[1:])
        hyp = np.asarray(signal.evaluate(mids), dtype=float)
        # the marched value on (t_{k-1}, t_k] is the end-of-step row k
        idx = np.searchsorted(step_times, mids, side="left")
        para = trajectory.node_history[idx, arc_id]
        total += float(np.sum(np.abs(para - hyp) * np.diff(edges)))
    return total


def _spec_payload(spec: ExperimentSpec) -> tuple:
    # plain nested tuples so worker processes receive a cheap, exact copy
    arcs = tuple(
        (a.length, a.speed, "in" if a.incoming else "out") for a in spec.net.arcs
    )
    k_rows = tuple(tuple(float(v) for v in row) for row in spec.K.k)
    profiles = tuple(
        (tuple(p.breakpoints.tolist()), tuple(p.values.tolist()))
        for p in spec.u0.arcs
    )
    boundary = tuple(float(b) for b in spec.B)
    return (arcs, k_rows, profiles, boundary, spec.T, spec.h_rule, spec.theta)


def _rebuild_inputs(
    payload: tuple,
) -> tuple[StarNetwork, CouplingMatrix, PiecewiseConstantField, np.ndarray, float, float, float]:
    arcs, k_rows, profiles, boundary, T, h_rule, theta = payload
    net = build_network(arcs)
    K = CouplingMatrix.from_array(np.asarray(k_rows), net)
    u0 = PiecewiseConstantField(
        tuple(
            ArcProfile.from_lists(net.arc(i).length, list(b), list(v))
            for i, (b, v) in enumerate(profiles)
        )
    )
    return net, K, u0, np.asarray(boundary), T, h_rule, theta


def _sweep_row(payload: tuple, epsilon: float) -> tuple[str, tuple | str]:
    """Run one viscosity level; returns ("ok", row) or ("fail", reason)."""
    try:
        start = time.perf_counter()
        net, K, u0, B, T, h_rule, theta = _rebuild_inputs(payload)
        compat = build_compatible(u0, B, net, K, epsilon, theta)
        cfg = SolverConfig(epsilon=epsilon, T=T, h_rule=h_rule)
        trajectory = solve_parabolic(net, K, compat.arcs, B, cfg)
        system = compute_gamma(net, K)
        exact = solve_exact(net, system.gamma, u0, B, T)
        final_error = l1_distance(
            trajectory.final, exact, trajectory.grid, t=T
        )
        trace_error = node_trace_error(trajectory, exact)
        times = trajectory.diagnostics[:, 0]
        row = (
            float(epsilon),
            float(max(trajectory.grid.spacings)),
            float(times[1] - times[0]),
            float(final_error),
            float(trace_error),
            float(np.max(np.abs(trajectory.diagnostics[:, 3]))),
            float(np.min(trajectory.diagnostics[:, 2])),
            time.perf_counter() - start,
        )
        return ("ok", row)
    except Exception as exc:  # crash isolation: one level must not kill the sweep
        return ("fail", f"{type(exc).__name__}: {exc}")


def run_convergence(spec: ExperimentSpec, workers: int = 1) -> ConvergenceReport:
    """Run the viscosity sweep, one row per level.

    The coupling assumptions are checked once up front (raising on
    violation); per-level work then runs inline or on a bounded process
    pool when workers > 1. Rows come back sorted by viscosity
    descending, failed levels in the failures list with their reasons.
    """
    compute_gamma(spec.net, spec.K)  # fail fast on assumption violations
    payload = _spec_payload(spec)
    if workers <= 1:
        outcomes = [_sweep_row(payload, e) for e in spec.epsilons]
    else:
        with ProcessPoolExecutor(
            max_workers=min(workers, len(spec.epsilons))
        ) as pool:
            outcomes = list(pool.map(partial(_sweep_row, payload), spec.epsilons))

    rows: list[ConvergenceRow] = []
    failures: list[tuple[float, str]] = []
    for eps, (status, result) in zip(spec.epsilons, outcomes):
        if status == "ok":
            rows.append(ConvergenceRow(*result))  # type: ignore[arg-type]
        else:
            failures.append((float(eps), str(result)))
    rows.sort(key=lambda r: -r.epsilon)
    return ConvergenceReport(rows=tuple(rows), failures=tuple(failures))


def gamma_csv(system: TransmissionSystem) -> str:
    """Transmission weights, one row per outgoing arc, incoming columns."""
    header = ["outgoing_arc"] + [f"incoming_{j}" for j in system.incoming_ids]
    rows = (
        [str(l)] + [_fmt(v) for v in system.gamma[pos]]
        for pos, l in enumerate(system.outgoing_ids)
    )
    return _csv(header, rows)


def certificate_summary(system: TransmissionSystem) -> str:
    c = system.certificates
    return (
        f"certificates: irreducible={c.irreducible} "
        f"gershgorin_ok={c.gershgorin_ok} m_matrix_ok={c.m_matrix_ok} "
        f"det_q={system.det_q:.6e} "
        f"condition_indicator={system.condition_indicator:.6e}"
    )


def coupling_csv(K: CouplingMatrix) -> str:
    """Full symmetric coupling matrix, one row per arc."""
    m = K.m
    header = ["arc"] + [f"arc_{j}" for j in range(m)]
    rows = ([str(i)] + [_fmt(v) for v in K.k[i]] for i in range(m))
    return _csv(header, rows)


def field_csv(samples: Iterable[tuple[int, float, float, float]]) -> str:
    """Long-format space-time samples: (arc_id, x, t, u) per row."""
    rows = (
        [str(arc_id), _fmt(x), _fmt(t), _fmt(u)] for arc_id, x, t, u in samples
    )
    return _csv(["arc_id", "x", "t", "u"], rows)


def diagnostics_csv(diagnostics: np.ndarray) -> str:
    """Per-step march diagnostics in recorded order."""
    rows = ([_fmt(v) for v in row] for row in diagnostics)
    return _csv(["t", "l1_norm", "min_value", "flux_residual"], rows)


def sample_hyperbolic(
    net: StarNetwork,
    K: CouplingMatrix,
    u0: PiecewiseConstantField,
    B: np.ndarray,
    T: float,
    times: int = 9,
    points: int = 201,
) -> list[tuple[int, float, float, float]]:
    """Exact transport solution sampled on a uniform space-time lattice."""
    if times < 1 or points < 2:
        raise ConfigError("need at least 1 time and 2 sample points")
    system = compute_gamma(net, K)
    sol = solve_exact(net, system.gamma, u0, B, T)
    t_grid = np.linspace(0.0, T, times) if times > 1 else np.array([T])
    samples = []
    for t in t_grid:
        for arc in net.arcs:
            xs = np.linspace(0.0, arc.length, points)
            us = np.asarray(sol.evaluate(arc.id, xs, float(t)), dtype=float)
            samples.extend(
                (arc.id, float(x), float(t), float(u)) for x, u in zip(xs, us)
            )
    return samples


def run_parabolic_simulation(
    net: StarNetwork,
    K: CouplingMatrix,
    u0: PiecewiseConstantField,
    B: np.ndarray,
    epsilon: float,
    T: float,
    h_rule: float = 8.0,
) -> tuple[list[tuple[int, float, float, float]], np.ndarray]:
    """March the viscous scheme; final snapshot plus per-step diagnostics.

    The raw data is sampled directly onto the grid (junction values are
    projected onto the discrete node conditions, with a warning when the
    data was far from compatible).
    """
    cfg = SolverConfig(epsilon=epsilon, T=T, h_rule=h_rule)
    trajectory = solve_parabolic(net, K, u0, B, cfg)
    snapshot = []
    for arc in net.arcs:
        xs = trajectory.grid.nodes(arc.id)
        vals = trajectory.final.values[arc.id]
        snapshot.extend(
            (arc.id, float(x), float(T), float(u)) for x, u in zip(xs, vals)
        )
    return snapshot, trajectory.diagnostics


@dataclass(frozen=True)
class ApproxRow:
    """One smoothing level of the admissible-data sweep."""

    n: int
    epsilon_n: float
    l1_error: float
    tv_norm: float
    scaled_w21: float
    membership_residual: float


def run_approx(
    net: StarNetwork,
    K: CouplingMatrix,
    u0: PiecewiseConstantField,
    B: np.ndarray,
    n_range: tuple[int, int],
    theta: float = DEFAULT_THETA,
) -> tuple[ApproxRow, ...]:
    """Build compatible data at epsilon_n = 2^-n for n over the range."""
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ConfigError(f"n range: need 1 <= lo <= hi, got {lo}:{hi}")
    rows = []
    for n in range(lo, hi + 1):
        eps_n = 2.0 ** (-n)
        data = build_compatible(u0, B, net, K, eps_n, theta)
        rows.append(
            ApproxRow(
                n=n,
                epsilon_n=eps_n,
                l1_error=data.l1_error,
                tv_norm=float(np.sum(data.deriv_norms)),
                scaled_w21=data.scaled_w21,
                membership_residual=data.membership_residual,
            )
        )
    return tuple(rows)


def approx_csv(rows: Sequence[ApproxRow]) -> str:
    header = [
        "n",
        "epsilon_n",
        "l1_error",
        "tv_norm",
        "scaled_w21",
        "membership_residual",
    ]
    body = (
        [
            str(r.n),
            _fmt(r.epsilon_n),
            _fmt(r.l1_error),
            _fmt(r.tv_norm),
            _fmt(r.scaled_w21),
            _fmt(r.membership_residual),
        ]
        for r in rows
    )
    return _csv(header, body)


def write_manifest(out_dir: Path, manifest: dict) -> Path:
    """Drop the resolved run description next to the CSV outputs."""
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


__all__ = [name for name in dir() if not name.startswith("_")]
