"""Vehicle totals, junction flux audits and mass-balance checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flux import JunctionFluxKind, distribution_error


def total_mass(state: np.ndarray, mesh) -> float:
    """Number of vehicles on one road: sum of h_K times the cell average."""
    return float(np.dot(mesh.h, state[:, 0]))


@dataclass(frozen=True)
class JunctionAudit:
    junction: int
    H_in: np.ndarray
    H_out: np.ndarray
    residual: float
    errors: np.ndarray


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    masses: dict
    junctions: tuple
    violation_count: int = 0
    mass_correction: float = 0.0

    @property
    def total(self) -> float:
        return float(sum(self.masses.values()))


def junction_audit(disc, states: dict, kind: JunctionFluxKind, t: float = 0.0) -> list[JunctionAudit]:
    """Fluxes, Rankine-Hugoniot residual and distribution errors at every junction."""
    audits = []
    for k, (junc, res) in enumerate(zip(disc.network.junctions, disc.junction_results(states, kind))):
        A = junc.matrix
        audits.append(
            JunctionAudit(
                junction=k,
                H_in=res.H_in.copy(),
                H_out=res.H_out.copy(),
                residual=res.residual,
                errors=distribution_error(res, A, kind),
            )
        )
    return audits


def diagnostics_record(disc, states, kind, t, violation_count=0, mass_correction=0.0) -> DiagnosticsRecord:
    masses = {rid: total_mass(c, disc.meshes[rid]) for rid, c in states.items()}
    return DiagnosticsRecord(
        t=t,
        masses=masses,
        junctions=tuple(junction_audit(disc, states, kind, t)),
        violation_count=violation_count,
        mass_correction=mass_correction,
    )


@dataclass(frozen=True)
class MassBalance:
    initial: float
    max_drift: float        # max |mass(t) - mass(0)|
    correction: float       # mass added by average clamping, at the worst snapshot
    unaccounted: float      # max |mass(t) - mass(0) - correction(t)|

    @property
    def relative(self) -> float:
        if self.initial == 0.0:
            return 0.0 if self.unaccounted == 0.0 else float("inf")
        return self.unaccounted / self.initial


def mass_balance(trajectory) -> MassBalance:
    """Compare total mass of every snapshot against the first one."""
    snaps = trajectory.snapshots
    totals = [
        sum(total_mass(c, trajectory.meshes[rid]) for rid, c in s.states.items()) for s in snaps
    ]
    m0 = totals[0]
    drift = [m - m0 for m in totals]
    raw_idx = int(np.argmax(np.abs(drift)))
    unaccounted = [abs(d - s.mass_correction) for d, s in zip(drift, snaps)]
    return MassBalance(
        initial=m0,
        max_drift=abs(drift[raw_idx]),
        correction=snaps[raw_idx].mass_correction,
        unaccounted=max(unaccounted),
    )
