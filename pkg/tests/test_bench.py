import math

import numpy as np
import pytest

from covlasso.bench import (
    RUNS_HEADER,
    ExperimentPlan,
    RunRecord,
    diagonal_forcing_rho,
    emit_report,
    load_plan,
    parse_report,
    plan_from_dict,
    relative_objective,
    resolve_rho_grid,
    run_experiment,
    validate_rho_grid,
)
from covlasso.cd import solve_cd
from covlasso.core import objective, offdiag_nonzero_fraction, sample_covariance
from covlasso.synthetic import ModelSpec, generate_dataset


def tiny_plan(**overrides):
    base = dict(
        models=[ModelSpec("sparse", 6, 18, seed=0)],
        rho_grid=[0.05, 0.3],
        solvers=("cd", "ecm"),
        inits=("full", "diag"),
        replicate_seeds=(0, 1),
    )
    base.update(overrides)
    return ExperimentPlan(**base)


class TestRhoGrid:
    def test_validate_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            validate_rho_grid([])
        with pytest.raises(ValueError):
            validate_rho_grid([-0.1, 0.2])
        with pytest.raises(ValueError):
            validate_rho_grid([0.1, 0.1])
        with pytest.raises(ValueError):
            validate_rho_grid([0.2, 0.1])

    def test_explicit_grid_passthrough(self):
        plan = tiny_plan()
        assert resolve_rho_grid(plan, np.eye(6)) == [0.05, 0.3]

    def test_min_max_generator(self):
        plan = tiny_plan(rho_grid={"count": 4, "min": 0.01, "max": 10.0})
        grid = resolve_rho_grid(plan, np.eye(6))
        np.testing.assert_allclose(grid, np.geomspace(0.01, 10.0, 4))

    def test_doubling_search_forces_diagonal(self):
        y, _ = generate_dataset(ModelSpec("sparse", 6, 18, seed=2))
        s = sample_covariance(y)
        rho_max = diagonal_forcing_rho(s)
        result = solve_cd(s, rho_max)
        assert offdiag_nonzero_fraction(result.sigma_hat, 0.0) == 0.0

    def test_auto_grid_spans_and_ends_diagonal(self):
        y, _ = generate_dataset(ModelSpec("sparse", 6, 18, seed=2))
        s = sample_covariance(y)
        plan = tiny_plan(rho_grid={"count": 5, "span": 100.0})
        grid = resolve_rho_grid(plan, s)
        assert len(grid) == 5
        assert grid[-1] / grid[0] == pytest.approx(100.0)

    def test_single_point_grid(self):
        plan = tiny_plan(rho_grid={"count": 1, "min": 0.1, "max": 2.0})
        assert resolve_rho_grid(plan, np.eye(6)) == [2.0]


class TestPlanValidation:
    def test_requires_models(self):
        with pytest.raises(ValueError):
            ExperimentPlan(models=[])

    def test_unknown_solver(self):
        with pytest.raises(ValueError):
            tiny_plan(solvers=("newton",))

    def test_unknown_init(self):
        with pytest.raises(ValueError):
            tiny_plan(inits=("zeros",))

    def test_plan_from_dict(self):
        plan = plan_from_dict({
            "models": [{"kind": "dense", "p": 4, "n": 8, "seed": 3}],
            "rho_grid": [0.1, 0.2],
            "solvers": ["cd"],
            "inits": ["full"],
            "config": {"outer_tol": 1e-4},
        })
        assert plan.models[0] == ModelSpec("dense", 4, 8, 3)
        assert plan.config_overrides == {"outer_tol": 1e-4}

    def test_plan_from_dict_bad_kind(self):
        with pytest.raises(ValueError):
            plan_from_dict({"models": [{"kind": "x", "p": 4, "n": 8}]})

    def test_load_plan_bad_json(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text("{not json")
        with pytest.raises(ValueError):
            load_plan(path)


class TestRunExperiment:
    def test_cell_count_and_order(self):
        records = run_experiment(tiny_plan())
        # 2 seeds x 2 rho x 2 solvers x 2 inits
        assert len(records) == 16
        keys = [(r.model, r.p, r.n, r.seed, r.rho, r.solver, r.init) for r in records]
        assert keys == sorted(keys)
        assert all(r.error == "" for r in records)

    def test_zero_penalty_cell_is_fixed_point(self):
        plan = tiny_plan(rho_grid=[0.0], solvers=("cd",), inits=("full",),
                         replicate_seeds=(0,))
        records = run_experiment(plan)
        assert len(records) == 1
        rec = records[0]
        y, _ = generate_dataset(ModelSpec("sparse", 6, 18, seed=0))
        s = sample_covariance(y)
        assert rec.objective == pytest.approx(objective(s, s, 0.0), abs=1e-6)
        assert rec.pct_nonzero == pytest.approx(offdiag_nonzero_fraction(s, 0.0))

    def test_determinism_except_timing(self):
        plan = tiny_plan()
        r1 = run_experiment(plan)
        r2 = run_experiment(plan)
        for a, b in zip(r1, r2):
            assert a.objective == b.objective
            assert a.pct_nonzero == b.pct_nonzero
            assert a.outer_iters == b.outer_iters
            assert a.converged == b.converged

    def test_cell_failure_isolated(self):
        # n < p makes S singular, so every cell of the first model fails
        # (degenerate column subproblems); the second model's cells must
        # be unaffected
        plan = ExperimentPlan(
            models=[ModelSpec("sparse", 6, 3, seed=0), ModelSpec("sparse", 6, 18, seed=0)],
            rho_grid=[0.0, 0.3],
            solvers=("cd",),
            inits=("diag",),
        )
        records = run_experiment(plan)
        assert len(records) == 4
        failed = [r for r in records if r.error]
        good = [r for r in records if not r.error]
        assert len(failed) == 2 and all(r.n == 3 for r in failed)
        assert all(not r.converged and math.isnan(r.objective) for r in failed)
        assert len(good) == 2 and all(r.converged and r.n == 18 for r in good)

    def test_config_overrides_applied(self):
        plan = tiny_plan(rho_grid=[0.3], solvers=("cd",), inits=("full",),
                         replicate_seeds=(0,), config_overrides={"max_outer_iters": 1})
        rec = run_experiment(plan)[0]
        assert rec.outer_iters == 1


class TestRelativeObjective:
    def _rec(self, solver, objective_value, rho=0.1, init="full"):
        return RunRecord(model="sparse", p=6, n=18, seed=0, rho=rho, solver=solver,
                         init=init, wall_time_s=0.1, outer_iters=3, pct_nonzero=0.5,
                         objective=objective_value)

    def test_identical_minima_give_zero(self):
        rows = relative_objective([self._rec("cd", 5.0), self._rec("ecm", 5.0)])
        assert len(rows) == 1
        assert rows[0]["value"] == 0.0

    def test_lower_cd_is_negative(self):
        rows = relative_objective([self._rec("cd", 4.9), self._rec("ecm", 5.0)])
        assert rows[0]["value"] == pytest.approx(-0.1)

    def test_missing_counterpart_skipped_with_warning(self):
        with pytest.warns(UserWarning, match="no ecm record"):
            rows = relative_objective([self._rec("cd", 5.0)])
        assert rows == []

    def test_real_sweep_produces_row_per_cell(self):
        records = run_experiment(tiny_plan())
        rows = relative_objective(records)
        # one cd-vs-ecm row per (seed, rho, init) cell
        assert len(rows) == 8

    def test_cd_at_or_below_ecm_across_fifty_cells(self):
        # 2 models x 5 seeds x 5 rhos, solved tightly: coordinate descent
        # should sit at or below the ecm objective in >= 90% of cells
        plan = ExperimentPlan(
            models=[ModelSpec("sparse", 15, 30, 0), ModelSpec("dense", 15, 30, 0)],
            rho_grid={"count": 5, "span": 200.0},
            solvers=("cd", "ecm"),
            inits=("full",),
            replicate_seeds=(0, 1, 2, 3, 4),
            config_overrides={"outer_tol": 1e-8},
        )
        rows = relative_objective(run_experiment(plan))
        assert len(rows) == 50
        good = sum(1 for r in rows if r["value"] <= 1e-6)
        assert good >= 0.9 * len(rows)


class TestReports:
    def test_emit_and_parse_roundtrip(self, tmp_path):
        records = run_experiment(tiny_plan())
        paths = emit_report(records, tmp_path / "rep")
        parsed = parse_report(paths["runs"])
        assert len(parsed) == len(records)
        for a, b in zip(records, parsed):
            assert (a.model, a.p, a.n, a.seed) == (b.model, b.p, b.n, b.seed)
            assert a.rho == b.rho
            assert a.solver == b.solver and a.init == b.init
            assert a.outer_iters == b.outer_iters
            assert a.pct_nonzero == b.pct_nonzero
            assert a.objective == b.objective
            assert a.wall_time_s == b.wall_time_s  # stored values round-trip exactly

    def test_exact_header(self, tmp_path):
        records = run_experiment(tiny_plan(rho_grid=[0.1], solvers=("cd",),
                                           inits=("full",), replicate_seeds=(0,)))
        with pytest.warns(UserWarning, match="no ecm record"):
            paths = emit_report(records, tmp_path / "rep")
        lines = paths["runs"].read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0] == RUNS_HEADER
        assert data[0] == "model,p,n,seed,rho,solver,init,wall_time_s,outer_iters,pct_nonzero,objective"
        assert len(data) == 2  # header + one row
        meta = [ln for ln in lines if ln.startswith("#")]
        assert any("pct_nonzero" in ln for ln in meta)

    def test_figure_files(self, tmp_path):
        records = run_experiment(tiny_plan())
        paths = emit_report(records, tmp_path / "rep")
        time_lines = [ln for ln in paths["time_fig"].read_text().splitlines()
                      if ln and not ln.startswith("#")]
        # header + one row per record (every cell has a cd run)
        assert len(time_lines) == 1 + len(records)
        relobj_lines = [ln for ln in paths["relobj_fig"].read_text().splitlines()
                        if ln and not ln.startswith("#")]
        assert len(relobj_lines) == 1 + 8

    def test_unsupported_format(self, tmp_path):
        records = run_experiment(tiny_plan(rho_grid=[0.1], solvers=("cd",),
                                           inits=("full",), replicate_seeds=(0,)))
        with pytest.raises(ValueError, match="format"):
            emit_report(records, tmp_path / "rep", fmt="parquet")

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], tmp_path / "rep")

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        records = run_experiment(tiny_plan(rho_grid=[0.1], solvers=("cd",),
                                           inits=("full",), replicate_seeds=(0,)))
        with pytest.raises(OSError):
            emit_report(records, blocker / "sub")

    def test_parse_rejects_malformed_row(self, tmp_path):
        path = tmp_path / "runs.csv"
        path.write_text(RUNS_HEADER + "\nsparse,6,18\n")
        with pytest.raises(ValueError, match="malformed"):
            parse_report(path)
