"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure,
3 a verification criterion failed (lemma checks or the sweep rule).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import lemma_lab
from .functionals import norm_L2M, records_to_csv
from .gaussian_profiles import UNIT_MAXWELLIAN, equilibrium, gaussian_lp_norm, profile_E
from .landau_solver import ConfigurationError, SolverConfig, run
from .radial_grid import RadialField, integrate_3d

log = logging.getLogger("landau_blowdown")

MODES = ("simulate", "sweep", "verify-lemmas", "profile-tables")
T_STAR = 0.5
DEFAULT_SWEEP = (0.1, 0.05, 0.025)
LP_EXPONENTS = (1.0, 1.2, 1.5, 2.0, 3.0, math.inf)
SLOPE_SLACK = 0.05

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class ExperimentSpec:
    mode: str
    solver: SolverConfig
    sweep: list = field(default_factory=lambda: list(DEFAULT_SWEEP))
    output_dir: str = "out"
    seed: int = lemma_lab.DEFAULT_SEED
    checks: list | None = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if self.mode == "sweep":
            if len(self.sweep) < 3:
                raise ConfigurationError("a sweep needs at least 3 delta values for a slope fit")
            for d in self.sweep:
                replace(self.solver, delta=float(d))  # validates resolvability too
        if int(self.workers) < 1:
            raise ConfigurationError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["solver"] = self.solver.to_dict()
        return d

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")  # parallelism must not change results
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


@dataclass
class SweepResult:
    alpha: float
    deltas: list
    dist_to_M: list
    dist_to_Meq: list
    slope: float
    expected_lower_bound: float
    monotone: bool
    passed: bool
    statuses: list

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# artifacts


def _header(spec: ExperimentSpec, extra: str = "") -> str:
    lines = [f"spec_sha256={spec.digest()}"]
    if extra:
        lines.append(extra)
    return "\n".join(lines)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def snapshots_csv(snapshots, header: str) -> str:
    buf = io.StringIO()
    for line in header.splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "r", "F"])
    for state, _ in snapshots:
        t = repr(float(state.t))
        for r, v in zip(state.F.r, state.F.values):
            w.writerow([t, repr(float(r)), repr(float(v))])
    return buf.getvalue()


def _distances(state, cfg: SolverConfig):
    F = state.F
    M = UNIT_MAXWELLIAN(F.r)
    meq = equilibrium(cfg.delta, cfg.alpha, unchecked=True)(F.r)
    return norm_L2M(F - M), norm_L2M(F - meq)


def _simulate_one(spec: ExperimentSpec, cfg: SolverConfig, outdir: Path) -> dict:
    """Run one trajectory and write its artifacts; returns a summary dict."""
    result = run(cfg)
    header = _header(spec, f"solver_sha256={cfg.digest()}")
    _write(outdir / "diagnostics.csv", records_to_csv(result.records, header))
    _write(outdir / "snapshots.csv", snapshots_csv(result.snapshots, header))
    recs = result.records
    entropies = [r.entropy for r in recs]
    summary = {
        "completed": result.completed,
        "error": result.error,
        "final_time": recs[-1].time,
        "mass_drift": abs(recs[-1].mass - recs[0].mass) / recs[0].mass,
        "entropy_nonincreasing": bool(all(b <= a + 1e-8 for a, b in zip(entropies, entropies[1:]))),
        "clipped_mass": result.final.clipped_mass,
    }
    try:
        state = result.state_at(T_STAR)
        summary["dist_to_M_at_tstar"], summary["dist_to_Meq_at_tstar"] = _distances(state, cfg)
    except KeyError:
        summary["dist_to_M_at_tstar"] = summary["dist_to_Meq_at_tstar"] = None
    meta = {
        "spec": spec.to_dict(),
        "solver": cfg.to_dict(),
        "spec_sha256": spec.digest(),
        "grid": cfg.make_grid().metadata(),
        "summary": summary,
        "wall_time": result.wall_time,
    }
    _write(outdir / "metadata.json", json.dumps(meta, indent=2, default=float))
    return summary


def cmd_simulate(spec: ExperimentSpec) -> int:
    out = Path(spec.output_dir)
    summary = _simulate_one(spec, spec.solver, out)
    print(f"mass drift (relative): {summary['mass_drift']:.3e}")
    print(f"H-theorem: {'PASS' if summary['entropy_nonincreasing'] else 'FAIL'}")
    if summary["dist_to_M_at_tstar"] is not None:
        print(f"||F(t*) - M||_L2M at t*={T_STAR}: {summary['dist_to_M_at_tstar']:.6g}")
    if not summary["completed"]:
        print(f"solver failure: {summary['error']}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _sweep_worker(args):
    spec, delta, outdir = args
    cfg = replace(spec.solver, delta=delta, t_end=max(spec.solver.t_end, T_STAR))
    try:
        return delta, _simulate_one(spec, cfg, Path(outdir))
    except Exception as exc:  # per-run isolation
        return delta, {"completed": False, "error": repr(exc), "dist_to_M_at_tstar": None}


def sweep(spec: ExperimentSpec) -> SweepResult:
    out = Path(spec.output_dir)
    jobs = [(spec, float(d), str(out / f"delta_{d:g}")) for d in spec.sweep]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    results.sort(key=lambda x: -x[0])  # decreasing delta
    deltas = [d for d, _ in results]
    statuses = [{"delta": d, "completed": s["completed"], "error": s.get("error")} for d, s in results]
    dm = [s.get("dist_to_M_at_tstar") for _, s in results]
    deq = [s.get("dist_to_Meq_at_tstar") for _, s in results]
    alpha = spec.solver.alpha
    bound = alpha - 0.25
    if any(v is None or not v > 0 for v in dm):
        return SweepResult(alpha, deltas, dm, deq, math.nan, bound, False, False, statuses)
    slope = lemma_lab.fit_loglog_slope(deltas, dm)
    monotone = all(b <= a for a, b in zip(dm, dm[1:]))
    passed = slope >= bound - SLOPE_SLACK and monotone
    return SweepResult(alpha, deltas, dm, deq, slope, bound, monotone, passed, statuses)


def cmd_sweep(spec: ExperimentSpec) -> int:
    res = sweep(spec)
    out = Path(spec.output_dir)
    _write(out / "sweep.json", json.dumps(res.to_dict(), indent=2, default=float))
    buf = io.StringIO()
    buf.write(f"# {_header(spec)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "dist_to_M", "dist_to_Meq"])
    for row in zip(res.deltas, res.dist_to_M, res.dist_to_Meq):
        w.writerow([repr(x) if x is not None else "" for x in row])
    _write(out / "sweep.csv", buf.getvalue())
    for d, m, e in zip(res.deltas, res.dist_to_M, res.dist_to_Meq):
        print(f"delta={d:<8g} ||F-M||={m if m is None else f'{m:.6g}'}  ||F-Meq||={e if e is None else f'{e:.6g}'}")
    print(f"fitted slope {res.slope:.4f} (rule: >= {res.expected_lower_bound - SLOPE_SLACK:.2f}); "
          f"nonincreasing as delta shrinks: {res.monotone}")
    print(f"sweep: {'PASS' if res.passed else 'FAIL'}")
    if any(not s["completed"] for s in res.statuses):
        for s in res.statuses:
            if not s["completed"]:
                print(f"run delta={s['delta']} failed: {s['error']}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK if res.passed else EXIT_CHECK


def cmd_verify_lemmas(spec: ExperimentSpec) -> int:
    reports = lemma_lab.run_suite(spec.checks, seed=spec.seed, workers=spec.workers)
    out = Path(spec.output_dir)
    _write(out / "lemma_reports.json", json.dumps([r.to_dict() for r in reports], indent=2))
    if reports:
        print(lemma_lab.summary_table(reports))
    failed = [r.lemma_id for r in reports if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def profile_table(spec: ExperimentSpec, n_times: int = 11) -> list[dict]:
    cfg = spec.solver
    grid = cfg.make_grid()
    rows = []
    for t in np.linspace(0.0, cfg.t_end, n_times):
        E = profile_E(cfg.profile, float(t))
        vals = E(grid.nodes)
        for p in LP_EXPONENTS:
            closed = gaussian_lp_norm(E, p)
            if math.isinf(p):
                quad = float(vals.max())
            else:
                quad = integrate_3d(RadialField(grid, vals**p)) ** (1.0 / p)
            rows.append({"t": float(t), "p": p, "closed_form": closed, "quadrature": quad,
                         "rel_error": abs(quad - closed) / closed})
    return rows


def cmd_profile_tables(spec: ExperimentSpec) -> int:
    rows = profile_table(spec)
    buf = io.StringIO()
    buf.write(f"# {_header(spec)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "p", "closed_form", "quadrature", "rel_error"])
    for row in rows:
        w.writerow([repr(row["t"]), "inf" if math.isinf(row["p"]) else repr(row["p"]),
                    repr(row["closed_form"]), repr(row["quadrature"]), repr(row["rel_error"])])
    _write(Path(spec.output_dir) / "lp_table.csv", buf.getvalue())
    worst = max(r["rel_error"] for r in rows)
    print(f"wrote {len(rows)} rows; worst quadrature/closed-form mismatch {worst:.2e}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify-lemmas": cmd_verify_lemmas,
    "profile-tables": cmd_profile_tables,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    d = SolverConfig()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON document with 'solver', 'sweep', 'seed', ... keys")
    common.add_argument("--output", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help=f"seed for randomized checks (default: {lemma_lab.DEFAULT_SEED})")
    common.add_argument("--delta", type=float, help=f"bump temperature delta in (0, 1/2) (default: {d.delta})")
    common.add_argument("--alpha", type=float, help=f"bump exponent alpha in (1/4, 1/2) (default: {d.alpha})")
    common.add_argument("--t-end", type=float, help=f"final time (default: {d.t_end})")
    common.add_argument("--grid-n", type=int, help=f"number of cells (default: {d.n})")
    common.add_argument("--grid-rmax", type=float, help=f"outer radius (default: {d.r_max})")
    common.add_argument("--dt", type=float, help=f"time step (default: {d.dt})")
    common.add_argument("--snapshot-every", type=float, help=f"snapshot cadence (default: {d.snapshot_every})")
    common.add_argument("--unchecked", action="store_true", help="allow delta, alpha outside the admissible ranges")
    common.add_argument("--workers", type=int, help="parallel processes for sweeps and lemma checks (default: 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="landau-blowdown", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="mode", required=True)
    sub.add_parser("simulate", parents=[common], help="run one trajectory")
    sw = sub.add_parser("sweep", parents=[common], help="delta sweep at fixed alpha with slope fit")
    sw.add_argument("--deltas", type=lambda s: [float(x) for x in s.split(",") if x],
                    help="comma-separated delta values (default: 0.1,0.05,0.025)")
    vl = sub.add_parser("verify-lemmas", parents=[common], help="run the lemma verification suite")
    vl.add_argument("--checks", type=lambda s: [x for x in s.split(",") if x],
                    help=f"comma-separated subset of: {','.join(lemma_lab.CHECKS)}")
    sub.add_parser("profile-tables", parents=[common], help="closed-form L^p tables of the blow-down profile")
    return p


_FLAG_TO_FIELD = {
    "delta": "delta",
    "alpha": "alpha",
    "t_end": "t_end",
    "grid_n": "n",
    "grid_rmax": "r_max",
    "dt": "dt",
    "snapshot_every": "snapshot_every",
}


def spec_from_args(args) -> ExperimentSpec:
    doc = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
    solver = dict(doc.get("solver", {}))
    for flag, name in _FLAG_TO_FIELD.items():
        val = getattr(args, flag, None)
        if val is not None:
            solver[name] = val
    if args.unchecked:
        solver["unchecked"] = True
    try:
        cfg = SolverConfig.from_dict(solver)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    sweep_vals = getattr(args, "deltas", None) or doc.get("sweep", list(DEFAULT_SWEEP))
    checks = getattr(args, "checks", None)
    if checks is None:
        checks = doc.get("checks")
    return ExperimentSpec(
        mode=args.mode,
        solver=cfg,
        sweep=[float(x) for x in sweep_vals],
        output_dir=args.output or doc.get("output_dir", "out"),
        seed=args.seed if args.seed is not None else int(doc.get("seed", lemma_lab.DEFAULT_SEED)),
        checks=checks,
        workers=args.workers or int(doc.get("workers", 1)),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = spec_from_args(args)
        out = Path(spec.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigurationError(f"output directory {out} is not writable")
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[spec.mode](spec)


if __name__ == "__main__":
    sys.exit(main())
