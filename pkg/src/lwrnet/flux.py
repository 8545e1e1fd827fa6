"""Fundamental diagram, Godunov fluxes and junction coupling rules.

All scalar fluxes accept floats or numpy arrays and broadcast.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAlpha, DimensionError, DomainError, UnsupportedJunction


class FundamentalDiagram(ABC):
    """Unimodal equilibrium flux with a single maximum at the critical density."""

    u_max: float

    @abstractmethod
    def flux(self, u):
        ...

    @property
    @abstractmethod
    def critical_density(self) -> float:
        ...

    @abstractmethod
    def max_wave_speed(self) -> float:
        """Upper bound of |f'(u)| over [0, u_max]."""

    @property
    def max_flux(self) -> float:
        return self.flux(self.critical_density)


@dataclass(frozen=True)
class Greenshields(FundamentalDiagram):
    """f(u) = v_max * u * (1 - u / u_max)."""

    v_max: float = 1.0
    u_max: float = 1.0

    def __post_init__(self):
        if not (self.v_max > 0 and self.u_max > 0):
            raise DomainError("v_max and u_max must be positive")

    def flux(self, u):
        return self.v_max * u * (1.0 - u / self.u_max)

    def derivative(self, u):
        return self.v_max * (1.0 - 2.0 * u / self.u_max)

    @property
    def critical_density(self) -> float:
        return 0.5 * self.u_max

    def max_wave_speed(self) -> float:
        return self.v_max

    def congested_inverse(self, q):
        """Density on the decreasing branch (u >= u*) carrying flow ``q``."""
        disc = 1.0 - 4.0 * np.asarray(q, dtype=float) / (self.v_max * self.u_max)
        return 0.5 * self.u_max * (1.0 + np.sqrt(np.maximum(disc, 0.0)))


def flux_value(d: FundamentalDiagram, u):
    return d.flux(u)


def f_in(d: FundamentalDiagram, u_minus):
    """Demand: largest flow the upstream state can send."""
    u_minus = np.asarray(u_minus, dtype=float)
    out = np.where(u_minus < d.critical_density, d.flux(u_minus), d.max_flux)
    return out[()] if out.ndim == 0 else out


def f_out(d: FundamentalDiagram, u_plus):
    """Supply: largest flow the downstream state can receive."""
    u_plus = np.asarray(u_plus, dtype=float)
    out = np.where(u_plus <= d.critical_density, d.max_flux, d.flux(u_plus))
    return out[()] if out.ndim == 0 else out


def godunov_original(d: FundamentalDiagram, u_minus, u_plus):
    """Godunov flux as the min (u- < u+) or max (u- >= u+) of f over the trace interval.

    The extremum is taken over the two endpoints plus the critical density
    when it lies inside the interval, which is exact for unimodal f.
    """
    um, up = np.broadcast_arrays(np.asarray(u_minus, float), np.asarray(u_plus, float))
    lo, hi = np.minimum(um, up), np.maximum(um, up)
    fm, fp = d.flux(um), d.flux(up)
    ustar = d.critical_density
    inside = (lo <= ustar) & (ustar <= hi)
    fstar = np.where(inside, d.max_flux, -np.inf)
    out = np.where(
        um < up,
        np.minimum(fm, fp),
        np.maximum(np.maximum(fm, fp), fstar),
    )
    return out[()] if out.ndim == 0 else out


def godunov_two(d: FundamentalDiagram, u_minus, u_plus):
    """Godunov flux in demand/supply form, min{f_in(u-), f_out(u+)}."""
    return np.minimum(f_in(d, u_minus), f_out(d, u_plus))


def godunov_three(d: FundamentalDiagram, u_minus, u_plus, alpha):
    """min{alpha * f_in(u-), f_out(u+)}, the demand scaled by a turning ratio."""
    a = np.asarray(alpha, dtype=float)
    if np.any((a < 0.0) | (a > 1.0)) or np.any(np.isnan(a)):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    return np.minimum(a * f_in(d, u_minus), f_out(d, u_plus))


# --------------------------------------------------------------------------
# junctions
# --------------------------------------------------------------------------


class JunctionFluxKind(enum.Enum):
    ALPHA_OUTSIDE = "alpha-outside"
    ALPHA_INSIDE = "alpha-inside"
    MAX_POSSIBLE_1X2 = "max-possible"

    @classmethod
    def parse(cls, text: str) -> "JunctionFluxKind":
        try:
            return cls(text)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown flux kind {text!r} (expected one of {names})") from None

    def applicable(self, n: int, m: int) -> bool:
        return self is not JunctionFluxKind.MAX_POSSIBLE_1X2 or (n, m) == (1, 2)


@dataclass(frozen=True)
class JunctionFluxResult:
    """Fluxes at one junction.

    Attributes:
        H_in: (n,) flux leaving each incoming road.
        H_out: (m,) flux entering each outgoing road.
        H_pairwise: (n, m) pairwise terms used by the rule.
    """

    H_in: np.ndarray
    H_out: np.ndarray
    H_pairwise: np.ndarray

    @property
    def residual(self) -> float:
        return float(self.H_in.sum() - self.H_out.sum())


def _junction_args(traces_in, traces_out, A):
    u_in = np.atleast_1d(np.asarray(traces_in, dtype=float))
    u_out = np.atleast_1d(np.asarray(traces_out, dtype=float))
    A = np.asarray(A, dtype=float)
    if u_in.ndim != 1 or u_out.ndim != 1 or A.shape != (u_out.size, u_in.size):
        raise DimensionError(
            f"distribution matrix shape {A.shape} does not match "
            f"{u_out.size} outgoing x {u_in.size} incoming traces"
        )
    return u_in, u_out, A


def junction_alpha_outside(d: FundamentalDiagram, traces_in, traces_out, A) -> JunctionFluxResult:
    u_in, u_out, A = _junction_args(traces_in, traces_out, A)
    pair = godunov_two(d, u_in[:, None], u_out[None, :])
    weighted = A.T * pair
    return JunctionFluxResult(weighted.sum(axis=1), weighted.sum(axis=0), pair)


def junction_alpha_inside(d: FundamentalDiagram, traces_in, traces_out, A) -> JunctionFluxResult:
    u_in, u_out, A = _junction_args(traces_in, traces_out, A)
    pair = godunov_three(d, u_in[:, None], u_out[None, :], A.T)
    return JunctionFluxResult(pair.sum(axis=1), pair.sum(axis=0), pair)


def junction_max_possible_1x2(d: FundamentalDiagram, trace_in, traces_out, alpha) -> JunctionFluxResult:
    """Maximum throughput for one incoming and two outgoing roads.

    ``alpha`` is the share of the incoming traffic heading to the first
    outgoing road; outflows keep the exact ratio alpha : (1 - alpha).
    """
    u_in = np.atleast_1d(np.asarray(trace_in, dtype=float))
    u_out = np.atleast_1d(np.asarray(traces_out, dtype=float))
    if u_in.size != 1 or u_out.size != 2:
        raise UnsupportedJunction(
            f"maximum possible flow is only available for 1x2 junctions, got "
            f"{u_in.size}x{u_out.size}"
        )
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DegenerateAlpha(f"maximum possible flow needs 0 < alpha < 1, got {alpha}")
    h1 = min(
        float(f_in(d, u_in[0])),
        float(f_out(d, u_out[0])) / alpha,
        float(f_out(d, u_out[1])) / (1.0 - alpha),
    )
    h_out = np.array([alpha * h1, (1.0 - alpha) * h1])
    return JunctionFluxResult(np.array([h1]), h_out, h_out[None, :].copy())


def junction_flux(d: FundamentalDiagram, kind: JunctionFluxKind, traces_in, traces_out, A):
    """Dispatch to the coupling rule selected by ``kind``."""
    if kind is JunctionFluxKind.ALPHA_OUTSIDE:
        return junction_alpha_outside(d, traces_in, traces_out, A)
    if kind is JunctionFluxKind.ALPHA_INSIDE:
        return junction_alpha_inside(d, traces_in, traces_out, A)
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 1):
        raise UnsupportedJunction(
            f"maximum possible flow is only available for 1x2 junctions, got "
            f"{A.shape[1]}x{A.shape[0]}"
        )
    return junction_max_possible_1x2(d, traces_in, traces_out, A[0, 0])


def distribution_error(result: JunctionFluxResult, A, kind: JunctionFluxKind | None = None) -> np.ndarray:
    """E_j = H_out[j] - sum_i A[j, i] * H_in[i].

    ``kind`` is accepted for symmetry with the closed forms; the definition
    itself does not depend on it.
    """
    A = np.asarray(A, dtype=float)
    return result.H_out - A @ result.H_in


def distribution_error_closed_form(result: JunctionFluxResult, A, kind: JunctionFluxKind) -> np.ndarray:
    """Distribution error expanded over pairs of outgoing roads.

    alpha-outside: E_j = sum_i sum_{l != j} a_ji a_li (H_ij - H_il)
    alpha-inside:  E_j = sum_i sum_{l != j} (a_li H_ij - a_ji H_il)
    """
    A = np.asarray(A, dtype=float)
    H = result.H_pairwise
    m, n = A.shape
    E = np.zeros(m)
    for j in range(m):
        total = 0.0
        for i in range(n):
            for l in range(m):
                if l == j:
                    continue
                if kind is JunctionFluxKind.ALPHA_OUTSIDE:
                    total += A[j, i] * A[l, i] * (H[i, j] - H[i, l])
                elif kind is JunctionFluxKind.ALPHA_INSIDE:
                    total += A[l, i] * H[i, j] - A[j, i] * H[i, l]
                else:
                    raise ValueError(f"no closed form for {kind}")
        E[j] = total
    return E
