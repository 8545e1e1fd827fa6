"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE`` line with its verdict, visible
even without ``-s``. Run alone with ``pytest tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from lwrnet.diagnostics import junction_audit, mass_balance, total_mass
from lwrnet.dg import (
    Discretization,
    apply_minmod_limiter,
    build_mesh,
    element_traces,
    enforce_bounds,
    gauss_rule,
    project_initial,
)
from lwrnet.flux import (
    Greenshields,
    JunctionFluxKind,
    distribution_error,
    f_in,
    godunov_original,
    godunov_two,
    junction_alpha_inside,
    junction_alpha_outside,
    junction_flux,
)
from lwrnet.io import parse_config
from lwrnet.network import validate_network, road_spec
from lwrnet.timestep import Integrator, run_simulation

from conftest import CONFIGS, random_matrix

GS = Greenshields(1.0, 1.0)
INSIDE = JunctionFluxKind.ALPHA_INSIDE
OUTSIDE = JunctionFluxKind.ALPHA_OUTSIDE
MAXPOS = JunctionFluxKind.MAX_POSSIBLE_1X2


@pytest.fixture
def report(capsys):
    def emit(label, checks):
        """checks: list of (description, ok) pairs."""
        ok = all(passed for _, passed in checks)
        with capsys.disabled():
            print(f"\nACCEPTANCE {label}: {'PASS' if ok else 'FAIL'}")
            for desc, passed in checks:
                print(f"    [{'ok' if passed else 'FAIL'}] {desc}")
        failed = [desc for desc, passed in checks if not passed]
        assert not failed, failed

    return emit


def draws(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n, m = rng.integers(1, 5, size=2)
        yield rng, rng.uniform(0, 1, n), rng.uniform(0, 1, m), random_matrix(rng, m, n)


# -- 1 ---------------------------------------------------------------------

def test_1_flux_equivalence(report):
    t0 = time.perf_counter()
    g = np.linspace(0.0, 1.0, 201)
    um, up = np.meshgrid(g, g, indexing="ij")
    dev = float(np.max(np.abs(godunov_original(GS, um, up) - godunov_two(GS, um, up))))
    elapsed = time.perf_counter() - t0
    report("1 flux equivalence", [
        (f"max |original - two-argument| on 201x201 grid = {dev:.2e} <= 1e-14", dev <= 1e-14),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ])


# -- 2 ---------------------------------------------------------------------

def test_2_discrete_rankine_hugoniot(report):
    t0 = time.perf_counter()
    worst = {OUTSIDE: 0.0, INSIDE: 0.0}
    for _, u_in, u_out, A in draws(2024, 10_000):
        for kind in worst:
            res = junction_flux(GS, kind, u_in, u_out, A)
            worst[kind] = max(worst[kind], abs(res.H_in.sum() - res.H_out.sum()))
    elapsed = time.perf_counter() - t0
    report("2 discrete Rankine-Hugoniot", [
        (f"alpha-outside max residual {worst[OUTSIDE]:.2e} <= 1e-12", worst[OUTSIDE] <= 1e-12),
        (f"alpha-inside max residual {worst[INSIDE]:.2e} <= 1e-12", worst[INSIDE] <= 1e-12),
        (f"runtime {elapsed:.2f} s < 5 s", elapsed < 5.0),
    ])


# -- 3 ---------------------------------------------------------------------

def outside_threshold(u_in):
    # every outgoing supply must dominate every incoming demand
    ut = np.where(u_in >= GS.critical_density, GS.critical_density, GS.congested_inverse(GS.flux(u_in)))
    return float(ut.min())


def inside_thresholds(u_in, A):
    return GS.congested_inverse(A * f_in(GS, u_in)[None, :]).min(axis=1)


def test_3_zero_distribution_error(report):
    t0 = time.perf_counter()
    free = {OUTSIDE: 0.0, INSIDE: 0.0}
    for rng, u_in, _, A in draws(3, 10_000):
        u_out = rng.uniform(0.0, GS.critical_density, A.shape[0])
        for kind in free:
            res = junction_flux(GS, kind, u_in, u_out, A)
            free[kind] = max(free[kind], float(np.max(np.abs(distribution_error(res, A)))))

    # congested outgoing traces below the decreasing-branch thresholds
    out_worst = in_worst = 0.0
    congested = 0
    for rng, u_in, _, A in draws(5, 10_000):
        m = A.shape[0]
        top = outside_threshold(u_in)
        u_out = rng.uniform(GS.critical_density, top, m) if rng.random() < 0.5 else rng.uniform(0, top, m)
        congested += int(np.any(u_out > GS.critical_density))
        res = junction_alpha_outside(GS, u_in, u_out, A)
        out_worst = max(out_worst, float(np.max(np.abs(distribution_error(res, A)))))

        tops = inside_thresholds(u_in, A)
        u_out = rng.uniform(GS.critical_density, tops) if rng.random() < 0.5 else rng.uniform(0, tops)
        congested += int(np.any(u_out > GS.critical_density))
        res = junction_alpha_inside(GS, u_in, u_out, A)
        in_worst = max(in_worst, float(np.max(np.abs(distribution_error(res, A)))))
    elapsed = time.perf_counter() - t0
    report("3 zero distribution error", [
        (f"free outgoing roads, alpha-outside max|E| {free[OUTSIDE]:.2e} <= 1e-14", free[OUTSIDE] <= 1e-14),
        (f"free outgoing roads, alpha-inside max|E| {free[INSIDE]:.2e} <= 1e-14", free[INSIDE] <= 1e-14),
        (f"alpha-outside below threshold max|E| {out_worst:.2e} <= 1e-14", out_worst <= 1e-14),
        (f"alpha-inside below threshold max|E| {in_worst:.2e} <= 1e-14", in_worst <= 1e-14),
        (f"{congested} draws with congested outgoing traces (> 5000)", congested > 5000),
        (f"runtime {elapsed:.2f} s < 10 s", elapsed < 10.0),
    ])


# -- 4 and 5: full experiments ----------------------------------------------

def run_experiment(name, kind):
    cfg = parse_config(CONFIGS / f"{name}.json")
    network = validate_network(cfg.network, cfg.diagram.u_max)
    t0 = time.perf_counter()
    traj, records, events = run_simulation(network, cfg.diagram, kind, cfg.solver)
    return cfg, traj, records, events, time.perf_counter() - t0


def masses_at(records, t):
    rec = min(records, key=lambda r: abs(r.t - t))
    assert abs(rec.t - t) < 1e-9, f"no snapshot at t={t}"
    return rec.masses


def discretization_checks(cfg):
    s = cfg.solver
    disc = Discretization(validate_network(cfg.network), cfg.diagram, s.degree, s.quad_points)
    return [(
        "N=150 per road, p=1, 2-point Gauss, explicit Euler, dt=1e-4",
        all(r.num_elements == 150 for r in cfg.network.roads)
        and s.degree == 1 and disc.rule.points.size == 2
        and s.integrator is Integrator.EULER and s.dt == 1e-4,
    )]


@pytest.mark.slow
def test_4_experiment_one(report):
    checks = []
    cfg, traj, rec_in, ev_in, time_in = run_experiment("experiment1", INSIDE)
    _, traj_out, rec_out, ev_out, time_out = run_experiment("experiment1", OUTSIDE)
    checks += discretization_checks(cfg)
    checks.append((f"t_end = {rec_in[-1].t}", rec_in[-1].t == 3.0))
    m0 = rec_in[0].masses
    checks.append((
        f"initial masses {m0[1]:.6f} / {m0[2]:.6f} / {m0[3]:.6f} (0.5 / 0.375 / 0.125)",
        np.allclose([m0[1], m0[2], m0[3]], [0.5, 0.375, 0.125], atol=1e-14),
    ))
    for label, recs, t2, t3 in [("alpha-inside", rec_in, 0.75, 0.25), ("alpha-outside", rec_out, 0.7498, 0.2502)]:
        m = recs[-1].masses
        checks.append((
            f"{label}: road 2 = {m[2]:.6f} (target {t2}), road 3 = {m[3]:.6f} (target {t3}), tol 2e-3",
            abs(m[2] - t2) <= 2e-3 and abs(m[3] - t3) <= 2e-3,
        ))
    for label, traj_, ev in [("alpha-inside", traj, ev_in), ("alpha-outside", traj_out, ev_out)]:
        drift = mass_balance(traj_).max_drift
        checks.append((f"{label}: total mass drift {drift:.2e} <= 1e-6", drift <= 1e-6))
        checks.append((f"{label}: mass violations {ev.mass_violations}", ev.mass_violations == 0))
    for label, elapsed in [("alpha-inside", time_in), ("alpha-outside", time_out)]:
        checks.append((f"{label}: runtime {elapsed:.1f} s < 120 s", elapsed < 120.0))
    report("4 experiment one", checks)


@pytest.mark.slow
def test_5_experiment_two(report):
    checks = []
    cfg, traj_mp, rec_mp, ev_mp, time_mp = run_experiment("experiment2", MAXPOS)
    _, traj_in, rec_in, ev_in, time_in = run_experiment("experiment2", INSIDE)
    checks += discretization_checks(cfg)
    checks.append((f"t_end = {rec_in[-1].t}", rec_in[-1].t == 4.0))

    for label, recs, t2, t3 in [("max-possible", rec_mp, 0.875, 0.125), ("alpha-inside", rec_in, 0.8438, 0.1562)]:
        m = recs[-1].masses
        checks.append((
            f"{label}: road 2 = {m[2]:.6f} (target {t2}), road 3 = {m[3]:.6f} (target {t3}), tol 2e-3",
            abs(m[2] - t2) <= 2e-3 and abs(m[3] - t3) <= 2e-3,
        ))
    for label, recs, target in [("alpha-inside", rec_in, 0.0003), ("max-possible", rec_mp, 0.0414)]:
        m1 = masses_at(recs, 2.5)[1]
        checks.append((
            f"{label}: road 1 at t=2.5 = {m1:.6f} (target {target}), tol 2e-3", abs(m1 - target) <= 2e-3,
        ))

    disc = Discretization(validate_network(cfg.network), cfg.diagram)
    states = disc.initial_state()
    (blocked,) = junction_audit(disc, states, MAXPOS)
    (leaky,) = junction_audit(disc, states, INSIDE)
    checks.append((
        f"t=0: max-possible H_in = {blocked.H_in[0]:.3g}, alpha-inside H_out[road 3] = {leaky.H_out[1]:.4g}",
        blocked.H_in[0] == 0.0 and leaky.H_out[1] > 0.0,
    ))
    for label, traj_, ev in [("max-possible", traj_mp, ev_mp), ("alpha-inside", traj_in, ev_in)]:
        drift = mass_balance(traj_).max_drift
        checks.append((f"{label}: total mass drift {drift:.2e} <= 1e-6", drift <= 1e-6))
        checks.append((f"{label}: mass violations {ev.mass_violations}", ev.mass_violations == 0))
    for label, elapsed in [("max-possible", time_mp), ("alpha-inside", time_in)]:
        checks.append((f"{label}: runtime {elapsed:.1f} s < 180 s", elapsed < 180.0))
    report("5 experiment two", checks)


# -- 6 ---------------------------------------------------------------------

def test_6_property_suites(report):
    rng = np.random.default_rng(6)
    mesh_of = lambda N: build_mesh(road_spec(1, (0.0, 1.0), N, [(0.0, 1.0, 0.0)]))

    limiter_dev = 0.0
    for _ in range(2000):
        N = int(rng.integers(1, 30))
        c = np.column_stack([rng.uniform(0, 1, N), rng.uniform(-1, 1, N)])
        mesh = mesh_of(N)
        out = apply_minmod_limiter(c, mesh, float(rng.choice([0.0, 1.0, 50.0])))
        limiter_dev = max(limiter_dev, float(np.max(np.abs(out[:, 0] - c[:, 0]))),
                          abs(float(np.dot(mesh.h, out[:, 0] - c[:, 0]))))

    proj_dev = 0.0
    for _ in range(500):
        k = int(rng.integers(1, 7))
        edges = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, k - 1)]))
        vals = rng.uniform(0, 1, k)
        road = road_spec(1, (0.0, 1.0), int(rng.integers(1, 40)), list(zip(edges[:-1], edges[1:], vals)))
        mesh = build_mesh(road)
        for p in (0, 1):
            got = total_mass(project_initial(road, mesh, p), mesh)
            proj_dev = max(proj_dev, abs(got - float(np.dot(np.diff(edges), vals))))

    quad_dev = 0.0
    for q in range(1, 11):
        r = gauss_rule(q)
        for d in range(2 * q):
            exact = 0.0 if d % 2 else 2.0 / (d + 1)
            quad_dev = max(quad_dev, abs(float(np.dot(r.weights, r.points**d)) - exact))

    trace_lo, trace_hi = 1.0, 0.0
    for _ in range(2000):
        N = int(rng.integers(1, 30))
        c = np.column_stack([rng.uniform(0, 1, N), rng.uniform(-1, 1, N)])
        out, _ = enforce_bounds(c, mesh_of(N), 1.0)
        left, right = element_traces(out)
        trace_lo = min(trace_lo, left.min(), right.min())
        trace_hi = max(trace_hi, left.max(), right.max())

    report("6 property suites", [
        (f"limiter average change {limiter_dev:.2e} <= 1e-14", limiter_dev <= 1e-14),
        (f"projection mass error {proj_dev:.2e} <= 1e-13", proj_dev <= 1e-13),
        (f"Gauss rules q=1..10 exact through degree 2q-1, max error {quad_dev:.2e}", quad_dev <= 1e-13),
        (f"bounded traces span [{trace_lo:.3g}, {trace_hi:.17g}] within [0, 1]",
         trace_lo >= 0.0 and trace_hi <= 1.0),
    ])
