"""JSON run configuration and CSV/JSON result files."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .dg import element_traces, evaluate
from .errors import ParseError
from .flux import Greenshields, JunctionFluxKind
from .network import (
    ClosedInlet,
    ClosedOutlet,
    DirichletValue,
    FreeOutflow,
    InitialPiece,
    JunctionSpec,
    NetworkSpec,
    RoadSpec,
)
from .timestep import BoundsMode, Integrator, SolverConfig

_TOP_KEYS = {"diagram", "roads", "junctions", "solver", "flux"}
_REQUIRED_TOP = {"diagram", "roads", "solver"}
_DIAGRAM_KEYS = {"v_max", "u_max"}
_ROAD_KEYS = {"id", "interval", "elements", "initial", "boundary"}
_PIECE_KEYS = {"from", "to", "value"}
_JUNCTION_KEYS = {"in", "out", "matrix"}
_SOLVER_KEYS = {
    "dt", "t_end", "integrator", "limiter_M", "bounds_mode", "output_every", "degree", "quadrature",
}
_FLUX_KEYS = {"kind"}

_BOUNDARY_NAMES = {
    "closed-inlet": ClosedInlet,
    "closed-outlet": ClosedOutlet,
    "free-outflow": FreeOutflow,
}


@dataclass(frozen=True)
class RunConfig:
    network: NetworkSpec
    diagram: Greenshields
    solver: SolverConfig
    kind: JunctionFluxKind

    def with_overrides(self, kind=None, dt=None, t_end=None) -> "RunConfig":
        solver = self.solver
        if dt is not None:
            solver = replace(solver, dt=float(dt))
        if t_end is not None:
            solver = replace(solver, t_end=float(t_end))
        return replace(self, solver=solver, kind=kind if kind is not None else self.kind)


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _obj(value, path, allowed, required=()):
    if not isinstance(value, dict):
        raise ParseError("expected an object", path=path)
    unknown = sorted(set(value) - set(allowed))
    if unknown:
        raise ParseError(f"unknown key {unknown[0]!r}", path=path)
    for key in sorted(required):
        if key not in value:
            raise ParseError(f"missing key {key!r}", path=path)
    return value


def _num(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", path=path)
    return float(value)


def _int(value, path) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", path=path)
    return value


def _list(value, path) -> list:
    if not isinstance(value, list):
        raise ParseError("expected a list", path=path)
    return value


def _road_id(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ParseError(f"road id must be an integer or string, got {value!r}", path=path)
    return value


def _boundary(value, path):
    if value is None:
        return None
    if isinstance(value, str):
        try:
            return _BOUNDARY_NAMES[value]()
        except KeyError:
            raise ParseError(f"unknown boundary mode {value!r}", path=path) from None
    if isinstance(value, dict) and set(value) == {"dirichlet"}:
        return DirichletValue(_num(value["dirichlet"], f"{path}.dirichlet"))
    raise ParseError(f"invalid boundary mode {value!r}", path=path)


def _enum(cls, value, path):
    try:
        return cls(value)
    except ValueError:
        options = ", ".join(repr(k.value) for k in cls)
        raise ParseError(f"invalid value {value!r} (expected one of {options})", path=path) from None


def config_from_dict(doc) -> RunConfig:
    """Build a run configuration from an already decoded JSON document."""
    _obj(doc, "$", _TOP_KEYS, _REQUIRED_TOP)

    dg = _obj(doc["diagram"], "diagram", _DIAGRAM_KEYS, _DIAGRAM_KEYS)
    try:
        diagram = Greenshields(_num(dg["v_max"], "diagram.v_max"), _num(dg["u_max"], "diagram.u_max"))
    except ValueError as exc:
        raise ParseError(str(exc), path="diagram") from None

    roads = []
    for k, raw in enumerate(_list(doc["roads"], "roads")):
        path = f"roads[{k}]"
        _obj(raw, path, _ROAD_KEYS, {"id", "interval", "elements", "initial"})
        interval = _list(raw["interval"], f"{path}.interval")
        if len(interval) != 2:
            raise ParseError("interval must be [a, b]", path=f"{path}.interval")
        pieces = []
        for q, piece in enumerate(_list(raw["initial"], f"{path}.initial")):
            ppath = f"{path}.initial[{q}]"
            _obj(piece, ppath, _PIECE_KEYS, _PIECE_KEYS)
            pieces.append(InitialPiece(
                _num(piece["from"], f"{ppath}.from"),
                _num(piece["to"], f"{ppath}.to"),
                _num(piece["value"], f"{ppath}.value"),
            ))
        bnd = _obj(raw.get("boundary", {}), f"{path}.boundary", {"left", "right"})
        roads.append(RoadSpec(
            id=_road_id(raw["id"], f"{path}.id"),
            interval=(_num(interval[0], f"{path}.interval[0]"), _num(interval[1], f"{path}.interval[1]")),
            num_elements=_int(raw["elements"], f"{path}.elements"),
            initial_condition=tuple(pieces),
            left_boundary=_boundary(bnd.get("left"), f"{path}.boundary.left"),
            right_boundary=_boundary(bnd.get("right"), f"{path}.boundary.right"),
        ))

    junctions = []
    for k, raw in enumerate(_list(doc.get("junctions", []), "junctions")):
        path = f"junctions[{k}]"
        _obj(raw, path, _JUNCTION_KEYS, _JUNCTION_KEYS)
        matrix = []
        for r, row in enumerate(_list(raw["matrix"], f"{path}.matrix")):
            matrix.append(tuple(
                _num(a, f"{path}.matrix[{r}][{c}]") for c, a in enumerate(_list(row, f"{path}.matrix[{r}]"))
            ))
        junctions.append(JunctionSpec(
            incoming=tuple(_road_id(x, f"{path}.in") for x in _list(raw["in"], f"{path}.in")),
            outgoing=tuple(_road_id(x, f"{path}.out") for x in _list(raw["out"], f"{path}.out")),
            distribution=tuple(matrix),
        ))

    sv = _obj(doc["solver"], "solver", _SOLVER_KEYS, {"dt", "t_end"})
    try:
        solver = SolverConfig(
            dt=_num(sv["dt"], "solver.dt"),
            t_end=_num(sv["t_end"], "solver.t_end"),
            integrator=_enum(Integrator, sv.get("integrator", "euler"), "solver.integrator"),
            limiter_M=_num(sv.get("limiter_M", 0.0), "solver.limiter_M"),
            bounds_mode=_enum(BoundsMode, sv.get("bounds_mode", "report"), "solver.bounds_mode"),
            output_every=_int(sv.get("output_every", 1), "solver.output_every"),
            degree=_int(sv.get("degree", 1), "solver.degree"),
            quad_points=_int(sv["quadrature"], "solver.quadrature") if "quadrature" in sv else None,
        )
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc), path="solver") from None

    fx = _obj(doc.get("flux", {"kind": "alpha-inside"}), "flux", _FLUX_KEYS, _FLUX_KEYS)
    kind = _enum(JunctionFluxKind, fx["kind"], "flux.kind")
    return RunConfig(NetworkSpec(tuple(roads), tuple(junctions)), diagram, solver, kind)


def parse_config_text(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return config_from_dict(doc)


def parse_config(path) -> RunConfig:
    """Read and parse a JSON run configuration.

    Raises:
        ParseError: malformed JSON (with line/column) or schema violation
            (with the JSON path of the offending key).
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text)


def _boundary_to_json(mode):
    if mode is None:
        return None
    if isinstance(mode, DirichletValue):
        return {"dirichlet": mode.value}
    for name, cls in _BOUNDARY_NAMES.items():
        if isinstance(mode, cls):
            return name
    raise TypeError(mode)


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`config_from_dict`; used for the manifest echo."""
    s = cfg.solver
    solver = {
        "dt": s.dt,
        "t_end": s.t_end,
        "integrator": s.integrator.value,
        "limiter_M": s.limiter_M,
        "bounds_mode": s.bounds_mode.value,
        "output_every": s.output_every,
        "degree": s.degree,
    }
    if s.quad_points is not None:
        solver["quadrature"] = s.quad_points
    return {
        "diagram": {"v_max": cfg.diagram.v_max, "u_max": cfg.diagram.u_max},
        "roads": [
            {
                "id": r.id,
                "interval": list(r.interval),
                "elements": r.num_elements,
                "initial": [{"from": p.start, "to": p.end, "value": p.value} for p in r.initial_condition],
                "boundary": {
                    "left": _boundary_to_json(r.left_boundary),
                    "right": _boundary_to_json(r.right_boundary),
                },
            }
            for r in cfg.network.roads
        ],
        "junctions": [
            {"in": list(j.incoming), "out": list(j.outgoing), "matrix": [list(row) for row in j.distribution]}
            for j in cfg.network.junctions
        ],
        "solver": solver,
        "flux": {"kind": cfg.kind.value},
    }


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def fmt(x) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    runtime_seconds: float = 0.0
    events: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "software": "lwrnet",
            "version": self.version,
            "runtime_seconds": self.runtime_seconds,
            "events": self.events,
            "files": self.files,
            "config": self.config,
        }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_rows(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_outputs(
    trajectory,
    diagnostics,
    out_dir,
    config: RunConfig | dict | None = None,
    events=None,
    runtime: float = 0.0,
    emit_traces: bool = False,
) -> RunManifest:
    """Write road, summary and junction CSV files plus ``manifest.json``.

    Rows are time-major, then road/element order, so identical runs give
    byte-identical data files.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc

    snaps = trajectory.snapshots
    road_ids = list(trajectory.meshes)
    written = []

    for rid in road_ids:
        mesh = trajectory.meshes[rid]
        xs = [fmt(x) for x in mesh.midpoints]
        rows = []
        for s in snaps:
            t = fmt(s.t)
            u = evaluate(s.states[rid], 0.0)[:, 0]
            rows.extend((t, x, fmt(v)) for x, v in zip(xs, u))
        name = f"road_{rid}.csv"
        _write_rows(out / name, ("t", "x", "u"), rows)
        written.append(name)

        if emit_traces:
            rows = []
            for s in snaps:
                t = fmt(s.t)
                ul, ur = element_traces(s.states[rid])
                # face x_k: (u-, u+), one-sided at the road ends
                left = [""] + [fmt(v) for v in ur]
                right = [fmt(v) for v in ul] + [""]
                rows.extend((t, fmt(x), lm, rp) for x, lm, rp in zip(mesh.nodes, left, right))
            name = f"road_{rid}_traces.csv"
            _write_rows(out / name, ("t", "x", "u_minus", "u_plus"), rows)
            written.append(name)

    _write_rows(
        out / "summary.csv",
        ("t", "road_id", "mass"),
        [(fmt(r.t), str(rid), fmt(r.masses[rid])) for r in diagnostics for rid in road_ids],
    )
    written.append("summary.csv")

    if diagnostics and diagnostics[0].junctions:
        n_max = max(a.H_in.size for a in diagnostics[0].junctions)
        m_max = max(a.H_out.size for a in diagnostics[0].junctions)
        header = (
            ["t", "junction", "residual"]
            + [f"E_{j + 1}" for j in range(m_max)]
            + [f"H_in_{i + 1}" for i in range(n_max)]
            + [f"H_out_{j + 1}" for j in range(m_max)]
        )

        def pad(values, size):
            return [fmt(v) for v in values] + [""] * (size - len(values))

        rows = [
            [fmt(r.t), str(a.junction), fmt(a.residual)]
            + pad(a.errors, m_max) + pad(a.H_in, n_max) + pad(a.H_out, m_max)
            for r in diagnostics
            for a in r.junctions
        ]
    else:
        header, rows = ["t", "junction", "residual"], []
    _write_rows(out / "junctions.csv", header, rows)
    written.append("junctions.csv")

    if isinstance(config, RunConfig):
        config = config_to_dict(config)
    ev = {}
    if events is not None:
        ev = {
            "cfl_warnings": events.cfl_warnings,
            "mass_violations": events.mass_violations,
            "slope_rescales": events.rescaled,
        }
    manifest = RunManifest(
        config=config or {},
        runtime_seconds=runtime,
        events=ev,
        files={name: _sha256(out / name) for name in written},
    )
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
