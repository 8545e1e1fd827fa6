"""Directed road networks: roads, junctions and traffic distribution matrices.

A road is a finite interval carrying its own mesh size, initial data and,
at every end that is not attached to a junction, a boundary mode. A junction
joins an ordered list of incoming roads to an ordered list of outgoing roads;
column ``i`` of its distribution matrix says how traffic leaving incoming
road ``i`` splits over the outgoing roads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    BoundaryConflict,
    ColumnSumError,
    DanglingEndpoint,
    DuplicateAttachment,
    NetworkError,
    RangeError,
    UnknownRoad,
)

COLUMN_SUM_TOL = 1e-12
_COVER_TOL = 1e-12

RoadId = Hashable


# --------------------------------------------------------------------------
# boundary modes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedInlet:
    """Inflow boundary with Dirichlet density 0 (nothing enters)."""

    def datum(self, u_max: float, interior: float) -> float:
        return 0.0


@dataclass(frozen=True)
class ClosedOutlet:
    """Outflow boundary with Dirichlet density ``u_max`` (nothing leaves)."""

    def datum(self, u_max: float, interior: float) -> float:
        return u_max


@dataclass(frozen=True)
class DirichletValue:
    value: float

    def datum(self, u_max: float, interior: float) -> float:
        return self.value


@dataclass(frozen=True)
class FreeOutflow:
    """Dirichlet datum copied from the interior trace."""

    def datum(self, u_max: float, interior: float) -> float:
        return interior


BoundaryMode = ClosedInlet | ClosedOutlet | DirichletValue | FreeOutflow


# --------------------------------------------------------------------------
# specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InitialPiece:
    start: float
    end: float
    value: float


@dataclass(frozen=True)
class RoadSpec:
    id: RoadId
    interval: tuple[float, float]
    num_elements: int
    initial_condition: tuple[InitialPiece, ...]
    left_boundary: BoundaryMode | None = None
    right_boundary: BoundaryMode | None = None

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class JunctionSpec:
    incoming: tuple[RoadId, ...]
    outgoing: tuple[RoadId, ...]
    # shape (m, n): rows are outgoing roads, columns incoming roads
    distribution: tuple[tuple[float, ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.distribution, dtype=float).reshape(
            len(self.outgoing), len(self.incoming)
        )


@dataclass(frozen=True)
class NetworkSpec:
    roads: tuple[RoadSpec, ...]
    junctions: tuple[JunctionSpec, ...] = ()


@dataclass(frozen=True)
class ValidatedNetwork:
    """A network that passed :func:`validate_network`.

    ``incoming_of`` maps a road id to ``(junction index, column)`` for the
    junction the road flows into; ``outgoing_of`` maps it to
    ``(junction index, row)`` for the junction it leaves from.
    """

    roads: tuple[RoadSpec, ...]
    junctions: tuple[JunctionSpec, ...]
    u_max: float = 1.0
    incoming_of: dict = field(default_factory=dict, compare=False, repr=False)
    outgoing_of: dict = field(default_factory=dict, compare=False, repr=False)

    def road(self, road_id: RoadId) -> RoadSpec:
        for r in self.roads:
            if r.id == road_id:
                return r
        raise UnknownRoad(f"no road with id {road_id!r}")

    @property
    def road_ids(self) -> tuple:
        return tuple(r.id for r in self.roads)

    @property
    def is_closed(self) -> bool:
        """True if no boundary lets vehicles in or out."""
        for r in self.roads:
            if r.left_boundary is not None and not isinstance(r.left_boundary, ClosedInlet):
                return False
            if r.right_boundary is not None and not isinstance(r.right_boundary, ClosedOutlet):
                return False
        return True


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _check_road(road: RoadSpec, u_max: float) -> None:
    a, b = road.interval
    if not a < b:
        raise NetworkError(f"road {road.id!r}: interval ({a}, {b}) must have a < b")
    if int(road.num_elements) != road.num_elements or road.num_elements < 1:
        raise NetworkError(f"road {road.id!r}: num_elements must be a positive integer")
    pieces = sorted(road.initial_condition, key=lambda p: p.start)
    if not pieces:
        raise NetworkError(f"road {road.id!r}: empty initial condition")
    tol = _COVER_TOL * max(1.0, abs(a), abs(b))
    if abs(pieces[0].start - a) > tol or abs(pieces[-1].end - b) > tol:
        raise NetworkError(f"road {road.id!r}: initial condition does not cover [{a}, {b}]")
    for prev, nxt in zip(pieces, pieces[1:]):
        if abs(prev.end - nxt.start) > tol:
            raise NetworkError(
                f"road {road.id!r}: initial pieces leave a gap or overlap at {prev.end}"
            )
    for p in pieces:
        if not p.start < p.end:
            raise NetworkError(f"road {road.id!r}: empty initial piece [{p.start}, {p.end}]")
        if not 0.0 <= p.value <= u_max:
            raise RangeError(
                f"road {road.id!r}: initial density {p.value} outside [0, {u_max}]"
            )
    for side, mode in (("left", road.left_boundary), ("right", road.right_boundary)):
        if isinstance(mode, DirichletValue) and not 0.0 <= mode.value <= u_max:
            raise RangeError(
                f"road {road.id!r}: {side} Dirichlet density {mode.value} outside [0, {u_max}]"
            )


def _check_junction(k: int, junction: JunctionSpec) -> None:
    n, m = len(junction.incoming), len(junction.outgoing)
    if n < 1 or m < 1:
        raise NetworkError(f"junction {k}: needs at least one incoming and one outgoing road")
    rows = junction.distribution
    if len(rows) != m or any(len(row) != n for row in rows):
        raise NetworkError(f"junction {k}: distribution matrix must be {m}x{n}")
    A = junction.matrix
    if not np.all(np.isfinite(A)) or A.min() < 0.0 or A.max() > 1.0:
        raise RangeError(f"junction {k}: distribution coefficients must lie in [0, 1]")
    sums = A.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > COLUMN_SUM_TOL)
    if bad.size:
        i = int(bad[0])
        raise ColumnSumError(
            f"junction {k}: column {i} (road {junction.incoming[i]!r}) sums to {sums[i]!r}, not 1"
        )


def validate_network(raw: NetworkSpec | ValidatedNetwork, u_max: float = 1.0) -> ValidatedNetwork:
    """Check a network description and build its incidence maps.

    Ordering of each junction's incoming/outgoing lists is kept as given,
    since it indexes the distribution matrix. Validating an already valid
    network returns an equal network.

    Raises:
        ColumnSumError: a distribution column deviates from 1 by more than 1e-12.
        DanglingEndpoint: a road end has neither a junction nor a boundary mode.
        DuplicateAttachment: a road enters (or leaves) two junctions.
        BoundaryConflict: a junction-attached road end also has a boundary mode.
        RangeError: a coefficient or density is out of range.
    """
    roads = tuple(raw.roads)
    junctions = tuple(
        JunctionSpec(
            tuple(j.incoming),
            tuple(j.outgoing),
            tuple(tuple(float(a) for a in row) for row in j.distribution),
        )
        for j in raw.junctions
    )
    ids = [r.id for r in roads]
    if len(set(ids)) != len(ids):
        raise NetworkError("road ids must be unique")
    for r in roads:
        _check_road(r, u_max)

    known = set(ids)
    incoming_of: dict = {}
    outgoing_of: dict = {}
    for k, junc in enumerate(junctions):
        _check_junction(k, junc)
        for col, rid in enumerate(junc.incoming):
            if rid not in known:
                raise UnknownRoad(f"junction {k}: unknown incoming road {rid!r}")
            if rid in incoming_of:
                raise DuplicateAttachment(f"road {rid!r} is incoming to two junctions")
            incoming_of[rid] = (k, col)
        for row, rid in enumerate(junc.outgoing):
            if rid not in known:
                raise UnknownRoad(f"junction {k}: unknown outgoing road {rid!r}")
            if rid in outgoing_of:
                raise DuplicateAttachment(f"road {rid!r} is outgoing from two junctions")
            outgoing_of[rid] = (k, row)

    for r in roads:
        # right end feeds a junction, left end is fed by one
        for attached, mode, side in (
            (r.id in outgoing_of, r.left_boundary, "left"),
            (r.id in incoming_of, r.right_boundary, "right"),
        ):
            if attached and mode is not None:
                raise BoundaryConflict(
                    f"road {r.id!r}: {side} end is attached to a junction and has a boundary mode"
                )
            if not attached and mode is None:
                raise DanglingEndpoint(
                    f"road {r.id!r}: {side} end has neither a junction nor a boundary mode"
                )

    return ValidatedNetwork(
        roads=roads,
        junctions=junctions,
        u_max=float(u_max),
        incoming_of=incoming_of,
        outgoing_of=outgoing_of,
    )


def road_spec(
    id: RoadId,
    interval: Sequence[float],
    num_elements: int,
    initial: Sequence[tuple[float, float, float]],
    left: BoundaryMode | None = None,
    right: BoundaryMode | None = None,
) -> RoadSpec:
    """Convenience constructor taking ``initial`` as ``(start, end, value)`` triples."""
    return RoadSpec(
        id=id,
        interval=(float(interval[0]), float(interval[1])),
        num_elements=int(num_elements),
        initial_condition=tuple(InitialPiece(float(s), float(e), float(v)) for s, e, v in initial),
        left_boundary=left,
        right_boundary=right,
    )
