"""Explicit time stepping of the network DG system."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

from .dg import BoundsReport, Discretization, apply_minmod_limiter, enforce_bounds
from .flux import JunctionFluxKind

log = logging.getLogger(__name__)


class Integrator(enum.Enum):
    EULER = "euler"
    AB2 = "ab2"


class BoundsMode(enum.Enum):
    REPORT = "report"
    STRICT = "strict"


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    integrator: Integrator = Integrator.EULER
    limiter_M: float = 0.0
    bounds_mode: BoundsMode = BoundsMode.REPORT
    output_every: int = 1
    degree: int = 1
    quad_points: int | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise ValueError(f"output_every must be a positive integer, got {self.output_every}")

    @property
    def num_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Snapshot:
    t: float
    states: dict
    mass_correction: float = 0.0


@dataclass
class Trajectory:
    meshes: dict
    snapshots: list = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.snapshots]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


def postprocess(
    disc: Discretization, states: dict, limiter_M: float = 0.0, strict: bool = False
) -> tuple[dict, BoundsReport]:
    """Limiter first, then bounds enforcement, road by road."""
    report = BoundsReport()
    out = {}
    u_max = disc.network.u_max
    for rid, c in states.items():
        mesh = disc.meshes[rid]
        c = apply_minmod_limiter(c, mesh, limiter_M)
        c, r = enforce_bounds(c, mesh, u_max, strict=strict)
        report.merge(r)
        out[rid] = c
    return out, report


def euler_update(states: dict, rhs: dict, dt: float) -> dict:
    return {rid: c + dt * rhs[rid] for rid, c in states.items()}


def ab2_update(states: dict, rhs_now: dict, rhs_prev: dict, dt: float) -> dict:
    return {
        rid: c + dt * (1.5 * rhs_now[rid] - 0.5 * rhs_prev[rid]) for rid, c in states.items()
    }


def step_euler(
    disc: Discretization,
    states: dict,
    kind: JunctionFluxKind,
    t: float,
    dt: float,
    limiter_M: float = 0.0,
    strict: bool = False,
) -> tuple[dict, BoundsReport]:
    rhs = disc.rhs(states, kind, t)[0]
    return postprocess(disc, euler_update(states, rhs, dt), limiter_M, strict)


def step_ab2(
    disc: Discretization,
    rhs_prev: dict,
    states: dict,
    kind: JunctionFluxKind,
    t: float,
    dt: float,
    limiter_M: float = 0.0,
    strict: bool = False,
) -> tuple[dict, BoundsReport, dict]:
    """Two-step Adams-Bashforth step.

    Returns the new states, the bounds report and the (unlimited) right-hand
    side at ``states``, which the caller passes back as ``rhs_prev`` next time.
    """
    rhs = disc.rhs(states, kind, t)[0]
    new, report = postprocess(disc, ab2_update(states, rhs, rhs_prev, dt), limiter_M, strict)
    return new, report, rhs


def cfl_number(disc: Discretization, dt: float) -> float:
    hmin = min(float(m.h.min()) for m in disc.meshes.values())
    return disc.diagram.max_wave_speed() * dt / hmin


def cfl_limit(degree: int) -> float:
    return 1.0 if degree == 0 else 1.0 / 3.0


def run_simulation(
    network,
    diagram,
    kind: JunctionFluxKind,
    config: SolverConfig,
    on_snapshot=None,
):
    """Advance projected initial data to ``config.t_end``.

    Args:
        network: a validated network.
        diagram: fundamental diagram.
        kind: junction coupling rule.
        config: time stepping parameters.
        on_snapshot: optional callable ``(snapshot, step_index)``.

    Returns:
        (Trajectory, list of DiagnosticsRecord, RunEvents)
    """
    from .diagnostics import diagnostics_record

    disc = Discretization(network, diagram, config.degree, config.quad_points)
    disc.check_kind(kind)
    strict = config.bounds_mode is BoundsMode.STRICT
    events = RunEvents()

    cfl = cfl_number(disc, config.dt)
    log.info("CFL number %.4g", cfl)
    if cfl > cfl_limit(config.degree):
        events.cfl_warnings += 1
        log.warning("CFL number %.4g exceeds %.4g for p=%d", cfl, cfl_limit(config.degree), config.degree)

    states = disc.initial_state()
    traj = Trajectory(disc.meshes)
    records = []
    correction = 0.0

    def record(n: int):
        t = n * config.dt if n < nsteps else config.t_end
        snap = Snapshot(t, states, correction)
        traj.snapshots.append(snap)
        records.append(diagnostics_record(disc, states, kind, t, len(events.violations), correction))
        if on_snapshot is not None:
            on_snapshot(snap, n)

    nsteps = config.num_steps
    record(0)
    rhs_prev = None
    for n in range(nsteps):
        t = n * config.dt
        if config.integrator is Integrator.AB2 and rhs_prev is not None:
            states, report, rhs_prev = step_ab2(
                disc, rhs_prev, states, kind, t, config.dt, config.limiter_M, strict
            )
        else:
            rhs_prev = disc.rhs(states, kind, t)[0]
            states, report = postprocess(
                disc, euler_update(states, rhs_prev, config.dt), config.limiter_M, strict
            )
        events.rescaled += report.rescaled
        if report.violations:
            events.violations.extend(report.violations)
            correction += report.mass_correction
            log.warning("%d cell averages left the admissible interval at t=%g",
                        len(report.violations), t + config.dt)
        if (n + 1) % config.output_every == 0 or n + 1 == nsteps:
            record(n + 1)
    return traj, records, events


@dataclass
class RunEvents:
    cfl_warnings: int = 0
    rescaled: int = 0
    violations: list = field(default_factory=list)

    @property
    def mass_violations(self) -> int:
        return len(self.violations)

