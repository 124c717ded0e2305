"""Benchmark harness: penalty-grid sweeps over synthetic datasets with
CSV reports.

A plan enumerates (model, seed, rho, solver, init) cells; each cell is
one independent solve.  Records are deterministic given the seeds
except for wall time.  Reports are a flat runs CSV plus two long-format
CSVs ready for plotting: solve time against the number of off-diagonal
nonzeros found by coordinate descent, and each solver's objective
relative to ECM's against the same axis.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cd import solve_cd
from .core import SolverConfig, offdiag_nonzero_fraction, sample_covariance
from .ecm import solve_ecm
from .synthetic import MODEL_KINDS, ModelSpec, generate_dataset

SOLVERS = ("cd", "ecm")
INITS = ("full", "diag")

RUNS_HEADER = "model,p,n,seed,rho,solver,init,wall_time_s,outer_iters,pct_nonzero,objective"
TIME_FIG_HEADER = "model,p,n,seed,init,rho,solver,nonzeros_cd,wall_time_s"
RELOBJ_FIG_HEADER = "model,p,n,seed,init,rho,solver,nonzeros_cd,relative_objective"


@dataclass
class ExperimentPlan:
    """A sweep: datasets x penalty grid x solvers x initializations.

    ``rho_grid`` is either an explicit strictly increasing list of
    nonnegative values, or a dict generator: ``{"count": 20, "min": a,
    "max": b}`` for a log-spaced grid, or ``{"count": 20, "span": s}``
    to derive the top of the grid per dataset by doubling search (the
    smallest value is then max/span).  ``replicate_seeds`` overrides
    each model's seed, one dataset per seed.
    """

    models: list
    rho_grid: object = None
    solvers: tuple = SOLVERS
    inits: tuple = INITS
    replicate_seeds: tuple = ()
    config_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.models:
            raise ValueError("plan needs at least one model")
        if not self.solvers:
            raise ValueError("plan needs at least one solver")
        if not self.inits:
            raise ValueError("plan needs at least one init")
        for solver in self.solvers:
            if solver not in SOLVERS:
                raise ValueError(f"unknown solver {solver!r}")
        for init in self.inits:
            if init not in INITS:
                raise ValueError(f"unknown init {init!r}")
        if isinstance(self.rho_grid, (list, tuple, np.ndarray)):
            validate_rho_grid(self.rho_grid)


def validate_rho_grid(grid):
    grid = [float(r) for r in grid]
    if not grid:
        raise ValueError("rho grid is empty")
    if any(r < 0 for r in grid):
        raise ValueError("rho values must be >= 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("rho grid must be strictly increasing")
    return grid


def diagonal_forcing_rho(s, config=None):
    """Smallest power-of-two multiple of the largest off-diagonal of
    ``S`` at which coordinate descent returns an exactly diagonal
    estimate, found by doubling search."""
    config = config or SolverConfig()
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    off = np.abs(s[~np.eye(p, dtype=bool)])
    if off.size == 0 or off.max() == 0.0:
        return 1.0
    rho = float(off.max())
    for _ in range(60):
        result = solve_cd(s, rho, config)
        if offdiag_nonzero_fraction(result.sigma_hat, 0.0) == 0.0:
            return rho
        rho *= 2.0
    raise RuntimeError("doubling search did not reach a diagonal solution")


def resolve_rho_grid(plan, s, config=None):
    """Materialize the plan's penalty grid for one dataset."""
    spec = plan.rho_grid
    if isinstance(spec, (list, tuple, np.ndarray)):
        return validate_rho_grid(spec)
    if spec is None:
        spec = {}
    if not isinstance(spec, dict):
        raise ValueError(f"cannot interpret rho_grid {spec!r}")
    count = int(spec.get("count", 20))
    if count < 1:
        raise ValueError("rho grid count must be >= 1")
    if "min" in spec and "max" in spec:
        lo, hi = float(spec["min"]), float(spec["max"])
    else:
        hi = diagonal_forcing_rho(s, config)
        lo = hi / float(spec.get("span", 1000.0))
    if count == 1:
        return [hi]
    return validate_rho_grid(np.geomspace(lo, hi, count))


@dataclass
class RunRecord:
    """One benchmark cell.  ``pct_nonzero`` is the off-diagonal nonzero
    fraction (exact zeros for cd; magnitude threshold for ecm);
    failures carry nan measurements and an error tag."""

    model: str
    p: int
    n: int
    seed: int
    rho: float
    solver: str
    init: str
    wall_time_s: float
    outer_iters: int
    pct_nonzero: float
    objective: float
    converged: bool = True
    error: str = ""


def _sort_key(rec):
    return (rec.model, rec.p, rec.n, rec.seed, rec.rho, rec.solver, rec.init)


def _cell_key(rec):
    return (rec.model, rec.p, rec.n, rec.seed, rec.rho, rec.init)


def _solve_cell(s, rho, solver, init, config):
    cfg = dataclasses.replace(config, init="sample" if init == "full" else "diag")
    if solver == "cd":
        return solve_cd(s, rho, cfg)
    # solve_ecm promotes the diag init to diag_eps itself
    return solve_ecm(s, rho, cfg)


def run_experiment(plan, config=None):
    """Execute every cell of the plan; returns records sorted by
    (model, p, n, seed, rho, solver, init).

    A failing cell is recorded as a non-converged row tagged with the
    error and never aborts the sweep.
    """
    base = config or SolverConfig()
    if plan.config_overrides:
        base = dataclasses.replace(base, **plan.config_overrides)
    records = []
    for model in plan.models:
        seeds = tuple(plan.replicate_seeds) or (model.seed,)
        for seed in seeds:
            spec = ModelSpec(model.kind, model.p, model.n, int(seed))
            y, _ = generate_dataset(spec)
            s = sample_covariance(y)
            rhos = resolve_rho_grid(plan, s, base)
            for rho in rhos:
                for solver in plan.solvers:
                    for init in plan.inits:
                        records.append(
                            _run_cell(spec, s, float(rho), solver, init, base)
                        )
    records.sort(key=_sort_key)
    return records


def _run_cell(spec, s, rho, solver, init, config):
    common = dict(model=spec.kind, p=spec.p, n=spec.n, seed=spec.seed,
                  rho=rho, solver=solver, init=init)
    try:
        result = _solve_cell(s, rho, solver, init, config)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return RunRecord(**common, wall_time_s=math.nan, outer_iters=0,
                         pct_nonzero=math.nan, objective=math.nan,
                         converged=False, error=f"{type(exc).__name__}: {exc}")
    if solver == "cd":
        pct = offdiag_nonzero_fraction(result.sigma_hat, 0.0)
    else:
        pct = result.nonzero_fraction
    return RunRecord(**common, wall_time_s=result.wall_time,
                     outer_iters=result.outer_iters, pct_nonzero=pct,
                     objective=float(result.objective_trace[-1]),
                     converged=result.converged)


def relative_objective(records):
    """Objective of each non-ECM solver minus ECM's, per cell.

    Returns one dict per (cell, solver) pair; negative values mean the
    solver found a lower objective than ECM.  Cells missing the ECM
    counterpart are skipped with a warning.
    """
    by_cell = {}
    for rec in records:
        by_cell.setdefault(_cell_key(rec), {})[rec.solver] = rec
    rows = []
    for key in sorted(by_cell):
        group = by_cell[key]
        ecm = group.get("ecm")
        for solver in sorted(group):
            if solver == "ecm":
                continue
            if ecm is None:
                warnings.warn(f"cell {key}: no ecm record, skipping relative objective")
                continue
            rec = group[solver]
            rows.append(dict(model=rec.model, p=rec.p, n=rec.n, seed=rec.seed,
                             rho=rec.rho, init=rec.init, solver=solver,
                             value=rec.objective - ecm.objective))
    return rows


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _cd_nonzero_counts(records):
    counts = {}
    for rec in records:
        if rec.solver == "cd" and math.isfinite(rec.pct_nonzero):
            counts[_cell_key(rec)] = round(rec.pct_nonzero * rec.p * (rec.p - 1))
    return counts


def emit_report(records, out_dir, fmt="csv"):
    """Write the report files for a sweep; returns {name: path}.

    ``runs.csv`` has one row per cell under the fixed header; the two
    ``fig_*.csv`` files are long-format plot data keyed to the number
    of off-diagonal nonzeros found by coordinate descent.
    """
    if not records:
        raise ValueError("no records to report")
    if fmt != "csv":
        raise ValueError(f"unsupported report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=_sort_key)

    runs_path = out / "runs.csv"
    with open(runs_path, "w") as fh:
        fh.write("# covariance-lasso benchmark runs; one row per (dataset, rho, solver, init) cell\n")
        fh.write("# pct_nonzero is the off-diagonal nonzero fraction: cd counts exact zeros,\n")
        fh.write("# ecm counts entries above the zero-report threshold; nan marks a failed cell\n")
        fh.write(RUNS_HEADER + "\n")
        for rec in records:
            fh.write(",".join([
                rec.model, str(rec.p), str(rec.n), str(rec.seed), _fmt(rec.rho),
                rec.solver, rec.init, _fmt(rec.wall_time_s), str(rec.outer_iters),
                _fmt(rec.pct_nonzero), _fmt(rec.objective),
            ]) + "\n")

    counts = _cd_nonzero_counts(records)
    time_path = out / "fig_time_vs_nonzeros.csv"
    with open(time_path, "w") as fh:
        fh.write("# solve time against the off-diagonal nonzero count of the cd estimate\n")
        fh.write(TIME_FIG_HEADER + "\n")
        for rec in records:
            key = _cell_key(rec)
            if key not in counts or not math.isfinite(rec.wall_time_s):
                continue
            fh.write(",".join([
                rec.model, str(rec.p), str(rec.n), str(rec.seed), rec.init,
                _fmt(rec.rho), rec.solver, str(counts[key]), _fmt(rec.wall_time_s),
            ]) + "\n")

    relobj_path = out / "fig_relobj_vs_nonzeros.csv"
    with open(relobj_path, "w") as fh:
        fh.write("# objective relative to ecm (negative: better than ecm) against the\n")
        fh.write("# off-diagonal nonzero count of the cd estimate\n")
        fh.write(RELOBJ_FIG_HEADER + "\n")
        for row in relative_objective(records):
            key = (row["model"], row["p"], row["n"], row["seed"], row["rho"], row["init"])
            if key not in counts:
                continue
            fh.write(",".join([
                row["model"], str(row["p"]), str(row["n"]), str(row["seed"]), row["init"],
                _fmt(row["rho"]), row["solver"], str(counts[key]), _fmt(row["value"]),
            ]) + "\n")

    return {"runs": runs_path, "time_fig": time_path, "relobj_fig": relobj_path}


def parse_report(path):
    """Read a runs CSV back into RunRecords.  ``converged`` is inferred
    from the objective being finite (failed cells store nan)."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line == RUNS_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 11:
                raise ValueError(f"malformed report row: {line!r}")
            objective = float(parts[10])
            records.append(RunRecord(
                model=parts[0], p=int(parts[1]), n=int(parts[2]), seed=int(parts[3]),
                rho=float(parts[4]), solver=parts[5], init=parts[6],
                wall_time_s=float(parts[7]), outer_iters=int(parts[8]),
                pct_nonzero=float(parts[9]), objective=objective,
                converged=math.isfinite(objective),
            ))
    return records


def plan_from_dict(data):
    """Build an ExperimentPlan from parsed JSON."""
    if "models" not in data:
        raise ValueError("plan is missing 'models'")
    models = []
    for m in data["models"]:
        kind = m.get("kind")
        if kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
        models.append(ModelSpec(kind=kind, p=int(m["p"]), n=int(m["n"]),
                                seed=int(m.get("seed", 0))))
    return ExperimentPlan(
        models=models,
        rho_grid=data.get("rho_grid"),
        solvers=tuple(data.get("solvers", SOLVERS)),
        inits=tuple(data.get("inits", INITS)),
        replicate_seeds=tuple(int(s) for s in data.get("replicate_seeds", ())),
        config_overrides=dict(data.get("config", {})),
    )


def load_plan(path):
    """Load a JSON plan file."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"could not parse plan file {path}: {exc}") from exc
    return plan_from_dict(data)
