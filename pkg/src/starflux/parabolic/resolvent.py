"""Closed-form solution of the steady viscous resolvent equation.

On each arc, v - theta*(eps*v'' - speed*v') = f with piecewise-constant
f has an explicit solution: two exponential modes plus a particular
part. The particular part is built from one-sided convolutions, the
decaying mode integrated from the left end and the growing mode from
the right end, so every exponent that appears is nonpositive and the
representation stays bounded for arbitrarily small viscosity. The outer
Dirichlet values eliminate one coefficient per arc; the transmission
conditions couple the remaining ones through an m x m system that is
strictly diagonally dominant by columns, with margins given by the
mode fluxes themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import (
    DimensionMismatch,
    NonPositiveParameter,
    NumericalError,
    SingularMatrix,
)
from ..grids import DiscreteState, Grid
from ..hyperbolic import ArcProfile, PiecewiseConstantField
from ..network import CouplingMatrix, StarNetwork, alpha_from_k


@dataclass(frozen=True)
class ResolventProblem:
    """Relaxation weight, forcing field, and outer Dirichlet values."""

    theta: float
    f: PiecewiseConstantField
    boundary: np.ndarray

    @classmethod
    def build(
        cls, theta: float, f: PiecewiseConstantField, boundary: Sequence[float]
    ) -> "ResolventProblem":
        if theta <= 0.0:
            raise NonPositiveParameter("theta must be positive")
        b = np.asarray(boundary, dtype=float)
        if b.ndim != 1:
            raise DimensionMismatch("boundary must be a flat vector")
        b = b.copy()
        b.flags.writeable = False
        return cls(theta=theta, f=f, boundary=b)


@dataclass(frozen=True)
class _ArcSolution:
    """All per-arc constants needed to evaluate v, v', v''.

    v(x) = c*exp(a1*x) + d*exp(a2*(x - L)) + p(x): both homogeneous
    modes are written with nonpositive exponents on [0, L], c attached
    to the left end and d to the right end.
    """

    incoming: bool
    speed: float
    length: float
    a1: float
    a2: float
    edges: np.ndarray  # forcing piece edges including 0 and length
    g: np.ndarray  # -f_r / (theta*eps) per piece
    c: float
    d: float

    def _convolutions(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One-sided mode integrals I1 (left, decaying) and I2 (right).

        I1(x) integrates exp(a1*(x-s)) g(s) over [0, x] and I2(x)
        integrates exp(a2*(x-s)) g(s) over [x, L]; every exponent is
        nonpositive, so both are bounded by |g| over the mode scale.
        """
        a1, a2 = self.a1, self.a2
        i1 = np.zeros_like(x)
        i2 = np.zeros_like(x)
        for r in range(self.g.size):
            lo, hi = self.edges[r], self.edges[r + 1]
            # left part of the piece, [lo, min(hi, x)]
            hi_l = np.minimum(hi, x)
            w = hi_l - lo
            mask = w > 0.0
            w = np.where(mask, w, 0.0)
            anchor = np.where(mask, hi_l, x)
            i1 += np.where(
                mask,
                self.g[r] * np.exp(a1 * (x - anchor)) * np.expm1(a1 * w) / a1,
                0.0,
            )
            # right part of the piece, [max(lo, x), hi]
            lo_r = np.maximum(lo, x)
            w = hi - lo_r
            mask = w > 0.0
            w = np.where(mask, w, 0.0)
            anchor = np.where(mask, lo_r, x)
            i2 += np.where(
                mask,
                -self.g[r] * np.exp(a2 * (x - anchor)) * np.expm1(-a2 * w) / a2,
                0.0,
            )
        return i1, i2

    def p_eval(self, x: np.ndarray, order: int) -> np.ndarray:
        """Bounded particular part (or derivative) of the arc equation."""
        a1, a2 = self.a1, self.a2
        i1, i2 = self._convolutions(x)
        gap = a2 - a1
        if order == 0:
            return -(i1 + i2) / gap
        if order == 1:
            return -(a1 * i1 + a2 * i2) / gap
        idx = np.searchsorted(self.edges[1:-1], x, side="left")
        return self.g[idx] - (a1 * a1 * i1 + a2 * a2 * i2) / gap

    def evaluate(self, x: np.ndarray | float, order: int = 0) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        a1, a2, L = self.a1, self.a2, self.length
        mode1 = np.exp(a1 * xs)
        mode2 = np.exp(a2 * (xs - L))
        # an underflowed mode contributes nothing even when the a2^order
        # prefactor has overflowed, so keep 0*inf out of the product
        hom = self.c * a1**order * mode1 + np.where(
            mode2 > 0.0, self.d * a2**order * mode2, 0.0
        )
        out = hom + self.p_eval(xs, order)
        if np.isscalar(x):
            return float(out)
        return out


@dataclass(frozen=True)
class ResidualReport:
    """Worst defects of a resolvent solution, absolute and scaled."""

    ode_max: float
    dirichlet_max: float
    node_max: float
    scale: float

    @property
    def worst_scaled(self) -> float:
        return max(self.ode_max, self.dirichlet_max, self.node_max) / self.scale


@dataclass(frozen=True)
class ResolventSolution:
    """Evaluable resolvent solution with its coupling-system evidence."""

    net: StarNetwork
    epsilon: float
    theta: float
    problem: ResolventProblem
    arcs: tuple[_ArcSolution, ...]
    alpha: np.ndarray
    h_matrix: np.ndarray
    h_rhs: np.ndarray
    dominance_margins: np.ndarray

    def evaluate(
        self, arc_id: int, x: np.ndarray | float, order: int = 0
    ) -> np.ndarray | float:
        return self.arcs[arc_id].evaluate(x, order)

    def node_flux(self, arc_id: int) -> float:
        """speed*v - eps*v' at this arc's junction end."""
        arc = self.arcs[arc_id]
        xn = arc.length if arc.incoming else 0.0
        v = arc.evaluate(xn)
        dv = arc.evaluate(xn, order=1)
        return float(arc.speed * v - self.epsilon * dv)

    def residual_report(self, samples_per_arc: int = 400) -> ResidualReport:
        alpha = self.alpha
        ode_max = 0.0
        for i, arc in enumerate(self.arcs):
            xs = (np.arange(samples_per_arc) + 0.5) * (
                arc.length / samples_per_arc
            )
            v = arc.evaluate(xs)
            dv = arc.evaluate(xs, order=1)
            ddv = arc.evaluate(xs, order=2)
            fvals = self.problem.f.arcs[i].evaluate(xs)
            resid = v - self.theta * (self.epsilon * ddv - arc.speed * dv) - fvals
            ode_max = max(ode_max, float(np.max(np.abs(resid))))

        dir_max = 0.0
        node_max = 0.0
        node_vals = np.array(
            [
                a.evaluate(a.length if a.incoming else 0.0)
                for a in self.arcs
            ]
        )
        for i, arc in enumerate(self.arcs):
            outer = 0.0 if arc.incoming else arc.length
            dir_max = max(
                dir_max, abs(float(arc.evaluate(outer)) - self.problem.boundary[i])
            )
            beta = 1.0 if arc.incoming else -1.0
            defect = beta * self.node_flux(i) - float(alpha[i] @ node_vals)
            node_max = max(node_max, abs(defect))

        scale = max(
            1.0,
            max(float(np.max(np.abs(p.values))) for p in self.problem.f.arcs),
            float(np.max(np.abs(self.problem.boundary))),
        )
        return ResidualReport(
            ode_max=ode_max,
            dirichlet_max=dir_max,
            node_max=node_max,
            scale=scale,
        )


def solve_resolvent(
    net: StarNetwork,
    K: CouplingMatrix,
    epsilon: float,
    prob: ResolventProblem,
) -> ResolventSolution:
    """Assemble and solve the coupled two-mode system on every arc.

    The unknown per arc is the coefficient of its junction-attached
    mode; the outer Dirichlet condition eliminates the other one. The
    resulting m x m system is strictly column dominant with margins
    mu_i + nu_i*E_i on incoming arcs and nu_i + mu_i*E_i on outgoing
    ones (mu = eps*a2 - speed, nu = speed - eps*a1), so it stays
    solvable down to vanishing viscosity, where it degenerates to the
    transport transmission system.
    """
    if epsilon <= 0.0:
        raise NonPositiveParameter("epsilon must be positive")
    theta = prob.theta
    alpha = alpha_from_k(K).alpha
    m = net.m
    if len(prob.f.arcs) != m:
        raise DimensionMismatch(f"{len(prob.f.arcs)} forcing profiles for {m} arcs")
    if prob.boundary.shape != (m,):
        raise DimensionMismatch(f"need {m} boundary values")

    a1 = np.empty(m)
    a2 = np.empty(m)
    mu = np.empty(m)  # eps*a2 - speed, positive
    nu = np.empty(m)  # speed - eps*a1, positive
    E = np.empty(m)  # exp(-(a2 - a1) * L)
    F = np.empty(m)  # exp(a1 * L)
    G = np.empty(m)  # exp(-a2 * L)
    incoming = np.array([arc.incoming for arc in net.arcs])
    edges_all: list[np.ndarray] = []
    g_all: list[np.ndarray] = []

    for i, arc in enumerate(net.arcs):
        lam, L = arc.speed, arc.length
        disc = float(np.sqrt(lam * lam + 4.0 * epsilon / theta))
        a2[i] = (lam + disc) / (2.0 * epsilon)
        a1[i] = -2.0 / (theta * (lam + disc))
        mu[i] = 2.0 * epsilon / (theta * (disc + lam))
        nu[i] = (lam + disc) / 2.0
        F[i] = np.exp(a1[i] * L)
        G[i] = np.exp(-a2[i] * L)
        E[i] = F[i] * G[i]

        profile = prob.f.arcs[i]
        edges = np.concatenate([[0.0], profile.breakpoints, [L]])
        edges_all.append(edges)
        g_all.append(-profile.values / (theta * epsilon))

    # particular part and its slope at both arc ends
    p0 = np.empty(m)
    pL = np.empty(m)
    dp0 = np.empty(m)
    dpL = np.empty(m)
    for i, arc in enumerate(net.arcs):
        probe = _ArcSolution(
            incoming=arc.incoming,
            speed=arc.speed,
            length=arc.length,
            a1=a1[i],
            a2=a2[i],
            edges=edges_all[i],
            g=g_all[i],
            c=0.0,
            d=0.0,
        )
        ends = np.array([0.0, arc.length])
        p0[i], pL[i] = probe.p_eval(ends, 0)
        dp0[i], dpL[i] = probe.p_eval(ends, 1)

    b = prob.boundary
    lam = net.speeds()
    # node value of each arc splits as unknown*(1 - E) + t
    t = np.where(incoming, (b - p0) * F + pL, (b - pL) * G + p0)

    one_minus_E = 1.0 - E
    H = alpha * one_minus_E[np.newaxis, :]
    base_diag = np.where(incoming, mu + nu * E, nu + mu * E)
    H[np.arange(m), np.arange(m)] += base_diag

    alpha_t = alpha @ t
    rhs = np.where(
        incoming,
        (b - p0) * F * nu + (lam * pL - epsilon * dpL) - alpha_t,
        (b - pL) * G * mu - (lam * p0 - epsilon * dp0) - alpha_t,
    )
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(rhs))):
        raise NumericalError(
            "coupling system assembly produced non-finite entries"
        )

    margins = np.abs(np.diag(H)) - (
        np.sum(np.abs(H), axis=0) - np.abs(np.diag(H))
    )
    if np.any(margins <= 0.0):
        raise SingularMatrix("coupling system lost strict column dominance")
    w = np.linalg.solve(H, rhs)

    arcs = []
    for i, arc in enumerate(net.arcs):
        if arc.incoming:
            d = float(w[i])
            c = float((b[i] - p0[i]) - d * G[i])
        else:
            c = float(w[i])
            d = float((b[i] - pL[i]) - c * F[i])
        arcs.append(
            _ArcSolution(
                incoming=arc.incoming,
                speed=arc.speed,
                length=arc.length,
                a1=a1[i],
                a2=a2[i],
                edges=edges_all[i],
                g=g_all[i],
                c=c,
                d=d,
            )
        )

    return ResolventSolution(
        net=net,
        epsilon=epsilon,
        theta=theta,
        problem=prob,
        arcs=tuple(arcs),
        alpha=alpha,
        h_matrix=H,
        h_rhs=rhs,
        dominance_margins=margins,
    )


def l1_error_against_state(
    sol: ResolventSolution, state: DiscreteState, grid: Grid
) -> float:
    """Composite-midpoint L1 gap between the closed form and a state."""
    total = 0.0
    for i in range(grid.arc_count):
        mids = grid.midpoints(i)
        exact = np.asarray(sol.evaluate(i, mids), dtype=float)
        approx = 0.5 * (state.values[i][:-1] + state.values[i][1:])
        total += grid.spacings[i] * float(np.sum(np.abs(exact - approx)))
    return total


def resolvent_forcing_field(
    net: StarNetwork, rng: np.random.Generator, pieces: int = 3, amplitude: float = 1.0
) -> PiecewiseConstantField:
    """Random piecewise-constant forcing, handy for consistency checks."""
    profiles = []
    for arc in net.arcs:
        n_b = int(rng.integers(0, pieces))
        breaks = np.sort(rng.uniform(0.1 * arc.length, 0.9 * arc.length, n_b))
        vals = rng.uniform(-amplitude, amplitude, n_b + 1)
        profiles.append(ArcProfile.from_lists(arc.length, breaks, vals))
    return PiecewiseConstantField(tuple(profiles))
