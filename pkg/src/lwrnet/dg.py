"""Discontinuous Galerkin discretization of the LWR equation on each road.

Each element carries coefficients in the Legendre basis mapped to [-1, 1],
so c_0 is the cell average and the mass matrix is diag(h / (2k + 1)).
A state for one road is an array of shape (num_elements, p + 1); a network
state is a dict keyed by road id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MassViolationError, UnsupportedDegree, UnsupportedOrder
from .flux import (
    FundamentalDiagram,
    JunctionFluxKind,
    JunctionFluxResult,
    f_in,
    f_out,
    junction_flux,
)
from .network import RoadSpec, ValidatedNetwork

MAX_DEGREE = 1
MAX_QUAD_POINTS = 10


# --------------------------------------------------------------------------
# mesh, basis, quadrature
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Mesh:
    road_id: object
    nodes: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def num_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


def build_mesh(road: RoadSpec) -> Mesh:
    a, b = road.interval
    nodes = np.linspace(a, b, road.num_elements + 1)
    nodes[0], nodes[-1] = a, b
    return Mesh(road.id, nodes)


def legendre_eval(k: int, xi):
    """Return (P_k(xi), P_k'(xi)) via the three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    p_prev, p = np.zeros_like(xi), np.ones_like(xi)
    dp_prev, dp = np.zeros_like(xi), np.zeros_like(xi)
    for n in range(k):
        p_next = ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
        # P'_{n+1} = P'_{n-1} + (2n + 1) P_n
        dp_next = dp_prev + (2 * n + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    if xi.ndim == 0:
        return float(p), float(dp)
    return p, dp


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray


def gauss_rule(q: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``q`` points on [-1, 1]."""
    if not 1 <= q <= MAX_QUAD_POINTS:
        raise UnsupportedOrder(f"quadrature point count must be in 1..{MAX_QUAD_POINTS}, got {q}")
    if q == 1:
        return QuadratureRule(np.array([0.0]), np.array([2.0]))
    if q == 2:
        r = 1.0 / math.sqrt(3.0)
        return QuadratureRule(np.array([-r, r]), np.array([1.0, 1.0]))
    if q == 3:
        r = math.sqrt(3.0 / 5.0)
        return QuadratureRule(np.array([-r, 0.0, r]), np.array([5.0, 8.0, 5.0]) / 9.0)
    points = np.empty(q)
    weights = np.empty(q)
    for i in range(q):
        x = math.cos(math.pi * (i + 0.75) / (q + 0.5))
        for _ in range(100):
            p, dp = legendre_eval(q, x)
            dx = p / dp
            x -= dx
            if abs(dx) < 1e-15:
                break
        _, dp = legendre_eval(q, x)
        points[q - 1 - i] = x
        weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp)
    return QuadratureRule(points, weights)


# --------------------------------------------------------------------------
# projection and traces
# --------------------------------------------------------------------------


def _legendre_antiderivative(k: int, xi: float) -> float:
    # int_{-1}^{xi} P_k; for k >= 1 this is (P_{k+1} - P_{k-1}) / (2k + 1)
    if k == 0:
        return xi + 1.0
    return (legendre_eval(k + 1, xi)[0] - legendre_eval(k - 1, xi)[0]) / (2 * k + 1)


def project_initial(road: RoadSpec, mesh: Mesh, p: int) -> np.ndarray:
    """Exact elementwise L2 projection of piecewise-constant initial data."""
    N = mesh.num_elements
    coeffs = np.zeros((N, p + 1))
    nodes = mesh.nodes
    for e in range(N):
        xl, xr = nodes[e], nodes[e + 1]
        h = xr - xl
        for piece in road.initial_condition:
            lo, hi = max(xl, piece.start), min(xr, piece.end)
            if hi <= lo or piece.value == 0.0:
                continue
            xa = 2.0 * (lo - xl) / h - 1.0
            xb = 2.0 * (hi - xl) / h - 1.0
            for k in range(p + 1):
                integral = _legendre_antiderivative(k, xb) - _legendre_antiderivative(k, xa)
                coeffs[e, k] += 0.5 * (2 * k + 1) * piece.value * integral
    return coeffs


def _endpoint_values(p: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(p + 1)
    return np.where(k % 2 == 0, 1.0, -1.0), np.ones(p + 1)


def element_traces(state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left and right traces u(x_K^+), u(x_{K+1}^-) of every element."""
    left, right = _endpoint_values(state.shape[1] - 1)
    return state @ left, state @ right


@dataclass(frozen=True)
class TraceSet:
    """Traces of a network state.

    ``road_left[id]`` is u+(a), ``road_right[id]`` is u-(b), and
    ``faces[id]`` is an (N - 1, 2) array of (u-, u+) at interior faces.
    """

    road_left: dict
    road_right: dict
    faces: dict


def traces(states: dict) -> TraceSet:
    left, right, faces = {}, {}, {}
    for rid, c in states.items():
        ul, ur = element_traces(c)
        left[rid] = float(ul[0])
        right[rid] = float(ur[-1])
        faces[rid] = np.column_stack([ur[:-1], ul[1:]])
    return TraceSet(left, right, faces)


def evaluate(state: np.ndarray, xi) -> np.ndarray:
    """Evaluate every element's polynomial at reference coordinate(s) ``xi``."""
    p = state.shape[1] - 1
    basis = np.array([np.atleast_1d(legendre_eval(k, xi)[0]) for k in range(p + 1)])
    return state @ basis


# --------------------------------------------------------------------------
# semidiscrete operator
# --------------------------------------------------------------------------


@dataclass
class Discretization:
    """Network, fundamental diagram and per-road tables needed by the DG operator."""

    network: ValidatedNetwork
    diagram: FundamentalDiagram
    degree: int = 1
    quad_points: int | None = None
    meshes: dict = field(init=False)
    rule: QuadratureRule = field(init=False)

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise UnsupportedDegree(f"polynomial degree must be in 0..{MAX_DEGREE}, got {self.degree}")
        if self.quad_points is None:
            self.quad_points = self.degree + 1
        self.rule = gauss_rule(self.quad_points)
        p = self.degree
        self._basis = np.array([legendre_eval(k, self.rule.points)[0] for k in range(p + 1)])
        dbasis = np.array([legendre_eval(k, self.rule.points)[1] for k in range(p + 1)])
        # (q, p+1): weighted derivative table for the volume term
        self._vol = (dbasis * self.rule.weights).T
        self._pl, self._pr = _endpoint_values(p)
        self._kfac = 2.0 * np.arange(p + 1) + 1.0
        self.meshes = {r.id: build_mesh(r) for r in self.network.roads}
        self._inv_mass = {
            rid: self._kfac[None, :] / m.h[:, None] for rid, m in self.meshes.items()
        }
        self._matrices = [j.matrix for j in self.network.junctions]
        self._dmax = self.diagram.max_flux
        self._ustar = self.diagram.critical_density

    def initial_state(self) -> dict:
        return {
            r.id: project_initial(r, self.meshes[r.id], self.degree) for r in self.network.roads
        }

    def check_kind(self, kind: JunctionFluxKind) -> None:
        """Fail early if ``kind`` cannot be applied to some junction."""
        for j in self.network.junctions:
            if kind is JunctionFluxKind.MAX_POSSIBLE_1X2:
                junction_flux(self.diagram, kind, [0.0] * len(j.incoming), [0.0] * len(j.outgoing), j.matrix)

    def junction_results(self, states: dict, kind: JunctionFluxKind) -> list[JunctionFluxResult]:
        results = []
        for junc, A in zip(self.network.junctions, self._matrices):
            u_in = [_right_trace(states[rid], self._pr) for rid in junc.incoming]
            u_out = [_left_trace(states[rid], self._pl) for rid in junc.outgoing]
            results.append(junction_flux(self.diagram, kind, u_in, u_out, A))
        return results

    def _godunov(self, um, up):
        # inlined demand/supply form; equal to flux.godunov_two
        d = self.diagram
        ustar, dmax = self._ustar, self._dmax
        dem = np.where(um < ustar, d.flux(um), dmax)
        sup = np.where(up <= ustar, dmax, d.flux(up))
        return np.minimum(dem, sup)

    def rhs(self, states: dict, kind: JunctionFluxKind, t: float = 0.0):
        """Coefficient time derivatives and the junction fluxes that were applied."""
        d = self.diagram
        u_max = self.network.u_max
        results = self.junction_results(states, kind)
        out = {}
        for road in self.network.roads:
            rid = road.id
            c = states[rid]
            N = c.shape[0]
            ul = c @ self._pl
            ur = c @ self._pr
            F = np.empty(N + 1)
            if N > 1:
                F[1:N] = self._godunov(ur[:-1], ul[1:])
            if rid in self.network.outgoing_of:
                k, row = self.network.outgoing_of[rid]
                F[0] = results[k].H_out[row]
            else:
                uD = road.left_boundary.datum(u_max, ul[0])
                F[0] = min(f_in(d, uD), f_out(d, ul[0]))
            if rid in self.network.incoming_of:
                k, col = self.network.incoming_of[rid]
                F[N] = results[k].H_in[col]
            else:
                uD = road.right_boundary.datum(u_max, ur[-1])
                F[N] = min(f_in(d, ur[-1]), f_out(d, uD))
            uq = c @ self._basis
            vol = d.flux(uq) @ self._vol
            R = vol - F[1:, None] * self._pr[None, :] + F[:-1, None] * self._pl[None, :]
            out[rid] = R * self._inv_mass[rid]
        return out, results


def _left_trace(c: np.ndarray, pl: np.ndarray) -> float:
    return float(c[0] @ pl)


def _right_trace(c: np.ndarray, pr: np.ndarray) -> float:
    return float(c[-1] @ pr)


def semidiscrete_rhs(
    disc: Discretization, states: dict, kind: JunctionFluxKind, t: float = 0.0
) -> dict:
    """Time derivatives of every road's Legendre coefficients."""
    return disc.rhs(states, kind, t)[0]


# --------------------------------------------------------------------------
# limiting and bounds
# --------------------------------------------------------------------------


def minmod(*args: np.ndarray) -> np.ndarray:
    """Smallest magnitude when all arguments share a sign, else 0."""
    a = np.stack(np.broadcast_arrays(*args))
    s = np.sign(a[0])
    same = np.all(np.sign(a) == s, axis=0)
    return np.where(same, s * np.min(np.abs(a), axis=0), 0.0)


def apply_minmod_limiter(state: np.ndarray, mesh: Mesh, M: float = 0.0) -> np.ndarray:
    """TVB-modified minmod slope limiter for piecewise linear states.

    The slope c_1 is kept when |2 c_1| <= M h^2, otherwise replaced by
    minmod(2 c_1, forward difference, backward difference) / 2. At road ends
    the missing neighbour difference is replaced by the element's other
    one-sided difference; a single-element road is left untouched.
    """
    p = state.shape[1] - 1
    if p == 0:
        return state.copy()
    if p > 1:
        raise UnsupportedDegree("slope limiting is implemented for p <= 1 only")
    out = state.copy()
    N = state.shape[0]
    if N < 2:
        return out
    avg = state[:, 0]
    diff = np.diff(avg)
    fwd = np.append(diff, diff[-1])
    bwd = np.insert(diff, 0, diff[0])
    jump = 2.0 * state[:, 1]
    limited = 0.5 * minmod(jump, fwd, bwd)
    keep = np.abs(jump) <= M * mesh.h**2
    out[:, 1] = np.where(keep, state[:, 1], limited)
    return out


@dataclass(frozen=True)
class MassViolation:
    road_id: object
    element: int
    average: float
    # mass added by clamping: h * (new average - old average)
    correction: float


@dataclass
class BoundsReport:
    rescaled: int = 0
    violations: list = field(default_factory=list)

    @property
    def mass_correction(self) -> float:
        return float(sum(v.correction for v in self.violations))

    def merge(self, other: "BoundsReport") -> None:
        self.rescaled += other.rescaled
        self.violations.extend(other.violations)


def enforce_bounds(
    state: np.ndarray, mesh: Mesh, u_max: float, lower: float = 0.0, strict: bool = False
) -> tuple[np.ndarray, BoundsReport]:
    """Keep every element inside [lower, u_max].

    Elements whose average is admissible get their slope scaled down so both
    end traces are admissible; the average is untouched. Elements whose
    average is not admissible are set to the nearest bound and reported,
    since that changes the number of vehicles.
    """
    p = state.shape[1] - 1
    if p > 1:
        raise UnsupportedDegree("bounds enforcement is implemented for p <= 1 only")
    out = state.copy()
    report = BoundsReport()
    avg = out[:, 0]
    bad = (avg < lower) | (avg > u_max)
    if p == 1:
        slope = np.abs(out[:, 1])
        room = np.minimum(avg - lower, u_max - avg)
        fix = ~bad & (slope > room)
        if np.any(fix):
            out[fix, 1] = np.sign(out[fix, 1]) * room[fix]
            report.rescaled = int(fix.sum())
    if np.any(bad):
        h = mesh.h
        for e in np.flatnonzero(bad):
            old = float(avg[e])
            new = lower if old < lower else u_max
            report.violations.append(MassViolation(mesh.road_id, int(e), old, float(h[e] * (new - old))))
            out[e, :] = 0.0
            out[e, 0] = new
        if strict:
            v = report.violations[0]
            raise MassViolationError(
                f"road {v.road_id!r} element {v.element}: cell average {v.average!r} "
                f"outside [{lower}, {u_max}]"
            )
    return out, report
