"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary) and then asserts the criterion at its stated tolerance.
"""

import functools
import math
import time

import numpy as np

from landau_blowdown import lemma_lab
from landau_blowdown.cli import ExperimentSpec, sweep
from landau_blowdown.functionals import fisher_information
from landau_blowdown.gaussian_profiles import UNIT_MAXWELLIAN, equilibrium, profile_E
from landau_blowdown.landau_solver import (
    SolverConfig,
    SolverState,
    collision_rhs,
    initial_condition,
    linear_E_solver,
    run,
)
from landau_blowdown.radial_grid import RadialField, make_grid

ALPHA = 0.4


@functools.lru_cache(maxsize=None)
def trajectory(delta, t_end, n=1024, dt=1e-4):
    cfg = SolverConfig(delta=delta, alpha=ALPHA, n=n, dt=dt, t_end=t_end, snapshot_every=0.05)
    return run(cfg)


def records_until(result, t_max):
    return [r for r in result.records if r.time <= t_max + 1e-9]


def test_criterion_1_manufactured_solution(acceptance_log):
    started = time.perf_counter()
    errs = []
    for n, dt in ((256, 1e-3), (512, 2.5e-4), (1024, 6.25e-5)):
        cfg = SolverConfig(delta=0.1, alpha=ALPHA, n=n, dt=dt)
        E = linear_E_solver(cfg, 0.25)
        exact = profile_E(cfg.profile, 0.25)(E.r)
        errs.append(float(np.max(np.abs(E.values - exact))))
    elapsed = time.perf_counter() - started
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(r >= 3.5 for r in ratios) and elapsed < 60
    acceptance_log(1, ok, f"manufactured solution: Linf errors {errs[0]:.2e} {errs[1]:.2e} {errs[2]:.2e}, "
                          f"ratios {ratios[0]:.2f} {ratios[1]:.2f} (need >= 3.5), {elapsed:.1f}s")
    assert ok


def test_criterion_2_conservation(acceptance_log):
    ref = trajectory(0.1, 2.0)
    recs = ref.records
    mass_drift = max(abs(r.mass / recs[0].mass - 1) for r in recs)

    def energy_drift(result):
        rs = records_until(result, 1.0)
        return max(abs(r.energy / rs[0].energy - 1) for r in rs)

    drift_ref = energy_drift(ref)
    coarse = trajectory(0.1, 1.0, n=512, dt=1e-4)
    fine = trajectory(0.1, 1.0, n=1024, dt=5e-5)
    d_coarse, d_fine = energy_drift(coarse), energy_drift(fine)
    slowest = max(ref.wall_time, coarse.wall_time, fine.wall_time)
    ok = (mass_drift < 1e-10 and drift_ref < 1e-2 and d_coarse / d_fine >= 2.0 and slowest < 300
          and ref.completed and coarse.completed and fine.completed)
    acceptance_log(2, ok, f"conservation: mass drift {mass_drift:.1e}, energy drift on [0,1] at N=1024 "
                          f"{drift_ref:.2e}, refinement (N,dt)->(2N,dt/2) {d_coarse:.2e} -> {d_fine:.2e} "
                          f"(x{d_coarse / d_fine:.2f}), slowest run {slowest:.0f}s")
    assert ok


def test_criterion_3_h_theorem(acceptance_log):
    worst_s = -math.inf
    worst_f = -math.inf
    for delta, t_end in ((0.1, 2.0), (0.05, 1.0)):
        recs = trajectory(delta, t_end).records
        S = np.array([r.entropy for r in recs])
        fi = np.array([r.fisher for r in recs])
        worst_s = max(worst_s, float(np.max(np.diff(S))))
        worst_f = max(worst_f, float(np.max(np.diff(fi) / fi[:-1])))
    ok = worst_s <= 1e-8 and worst_f <= 1e-6
    acceptance_log(3, ok, f"H-theorem: largest entropy increment {worst_s:.2e} (slack 1e-8), "
                          f"largest relative Fisher increment {worst_f:.2e} (slack 1e-6)")
    assert ok


def test_criterion_4_equilibrium(acceptance_log):
    ns, res = [256, 512, 1024], []
    meq_p = equilibrium(0.1, ALPHA)
    for n in ns:
        g = make_grid(8.0, n)
        F = RadialField(g, meq_p(g.nodes))
        res.append(float(np.max(np.abs(collision_rhs(F).values))))
    order = -lemma_lab.fit_loglog_slope(ns, res)
    cfg = SolverConfig(delta=0.1, alpha=ALPHA, n=1024, dt=1e-4, t_end=1.0, snapshot_every=0.1)
    g = cfg.make_grid()
    meq = meq_p(g.nodes)
    out = run(cfg, SolverState(0.0, RadialField(g, meq)))
    drift = max(float(np.max(np.abs(s.F.values - meq))) / meq.max() for s, _ in out.snapshots)
    ok = order >= 1.8 and drift < 1e-4 and out.completed
    acceptance_log(4, ok, f"equilibrium: residual order {order:.2f} (need >= 1.8), "
                          f"M_eq relative Linf drift over [0,1] {drift:.1e} (need < 1e-4)")
    assert ok


def test_criterion_5_blowdown_scaling(tmp_path, acceptance_log):
    started = time.perf_counter()
    cfg = SolverConfig(delta=0.1, alpha=ALPHA, n=1024, dt=1e-4, t_end=0.5, snapshot_every=0.05)
    spec = ExperimentSpec("sweep", cfg, [0.1, 0.05, 0.025], output_dir=str(tmp_path))
    result = sweep(spec)
    elapsed = time.perf_counter() - started
    ok = result.slope >= 0.10 and result.monotone and elapsed < 1800
    vals = " ".join(f"{d:g}:{m:.4f}" for d, m in zip(result.deltas, result.dist_to_M))
    acceptance_log(5, ok, f"blow-down scaling: ||F(1/2)-M||_L2M {vals}; slope {result.slope:.3f} "
                          f"(need >= 0.10), nonincreasing as delta shrinks: {result.monotone}, {elapsed:.0f}s")
    assert ok


def test_criterion_6_decay(acceptance_log):
    recs = [r for r in trajectory(0.1, 2.0).records if r.time >= 0.5 - 1e-9]
    dist = np.array([r.dist_to_Meq for r in recs])
    ratio = dist[-1] / dist[0]
    strictly = bool(np.all(np.diff(np.log(dist)) < 0))
    ok = ratio < 0.1 and strictly
    acceptance_log(6, ok, f"decay: ||F-M_eq||_L2M {dist[0]:.4f} at t=1/2 -> {dist[-1]:.4f} at t=2 "
                          f"(ratio {ratio:.3f}, need < 0.1), log strictly decreasing: {strictly}")
    assert ok


def test_criterion_7_kernel_oracle(acceptance_log):
    oracle = lemma_lab.check_kernel_oracle(n=1024, radii=(0.0, 0.5, 1.0, 2.0), tol=1e-4)
    trace = lemma_lab.check_trace_identity(n=1024)
    ok = oracle.passed and trace.passed
    acceptance_log(7, ok, f"kernel oracle: max relative error {oracle.values['max_rel_error']:.1e} "
                          f"(need < 1e-4), trace identity residual {trace.values['max_residual']:.1e} (need < 1e-10)")
    assert ok


def test_criterion_8_lemma_suite(acceptance_log):
    started = time.perf_counter()
    reports = lemma_lab.run_suite(seed=lemma_lab.DEFAULT_SEED)
    elapsed = time.perf_counter() - started
    failed = [r.lemma_id for r in reports if not r.passed]
    ok = not failed and len(reports) >= 8 and elapsed < 600
    detail = ", ".join(failed) if failed else "none"
    se = next(r for r in reports if r.lemma_id == "SE_scaling").scalings[0]["measured_exponent"]
    acceptance_log(8, ok, f"lemma suite: {len(reports)} checks in {elapsed:.1f}s, failed: {detail} "
                          f"(SE fitted T-slope {se:.3f}, need >= -0.55)")
    assert ok


def test_criterion_9_fisher_divergence(acceptance_log):
    deltas = [0.1, 0.05, 0.025]
    vals = [fisher_information(initial_condition(SolverConfig(delta=d, alpha=ALPHA, n=1024)).F) for d in deltas]
    slope = lemma_lab.fit_loglog_slope(deltas, vals)
    increasing = vals[0] < vals[1] < vals[2]
    ok = increasing and abs(slope - (ALPHA - 1)) <= 0.15
    acceptance_log(9, ok, f"Fisher divergence: I(F_in) {vals[0]:.2f} {vals[1]:.2f} {vals[2]:.2f}, "
                          f"slope {slope:.3f} (need within 0.15 of -0.6)")
    assert ok
