import io
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpihf import bench
from fpihf.bench import (
    BOX,
    ExperimentGrid,
    TableRow,
    emit_norm_data,
    emit_table,
    parse_table,
    run_cell,
    run_experiment,
)


def _one_cell(**kw):
    kw.setdefault("replications", 2)
    return ExperimentGrid(kappas=(1 / 5,), Ns=(600,), k_rules=("N/2",), **kw)


def test_grid_defaults_and_cells():
    grid = ExperimentGrid()
    cells = list(grid.cells())
    assert len(cells) == 4 * 3 * 3
    assert {c[1] for c in cells} == {60, 120, 240}
    assert (1 / 5, 60, "N/3", 20) in cells
    assert (1 / 5, 60, "2N/3", 40) in cells
    assert grid.seeds == [0, 1, 2, 3, 4]


def test_full_scale_grid():
    grid = ExperimentGrid.full_scale()
    assert grid.replications == 20 and grid.scale == 1
    assert {c[1] for c in grid.cells()} == {600, 1200, 2400}
    with pytest.warns(RuntimeWarning):
        bench.warn_full_scale(grid)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bench.warn_full_scale(ExperimentGrid())


def test_grid_validation():
    with pytest.raises(ValueError):
        ExperimentGrid(kappas=())
    with pytest.raises(ValueError):
        ExperimentGrid(k_rules=("N/4",))
    with pytest.raises(ValueError):
        ExperimentGrid(scale=Fraction(0))


def test_single_cell_fpihf():
    rows = run_experiment(_one_cell(), ["fpihf"])
    assert len(rows) == 1
    row = rows[0]
    assert (row.N, row.K_rule, row.algorithm, row.timeouts) == (60, "N/2", "fpihf", 0)
    assert row.avg_iters > 0 and row.avg_time_s > 0 and not row.timeout_flag


def test_replay_is_deterministic():
    a = run_experiment(_one_cell(), ["fpihf", "fpif"])
    b = run_experiment(_one_cell(), ["fpihf", "fpif"])
    assert [r.avg_iters for r in a] == [r.avg_iters for r in b]


def test_parallel_matches_serial():
    grid = ExperimentGrid(kappas=(1 / 5, 1 / 30), Ns=(300,), k_rules=("N/2",), replications=1)
    serial = run_experiment(grid, ["fpihf"])
    parallel = run_experiment(grid, ["fpihf"], n_jobs=2)
    assert [r.avg_iters for r in serial] == [r.avg_iters for r in parallel]


def test_cap_gives_timeout_flag():
    rows = run_experiment(_one_cell(), ["condat-vu"], cap=10)
    assert rows[0].timeout_flag and rows[0].avg_iters is None and rows[0].timeouts == 2


def test_configuration_errors_are_recorded():
    recs = run_cell(1 / 5, 20, 10, "N/2", "fpihf", [0, 1], gamma=0.5)
    assert all("ConfigurationError" in r.error and not r.converged for r in recs)
    row = bench.aggregate(recs, 2)
    assert row.avg_iters is None and row.timeouts == 0


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        run_experiment(_one_cell(), ["admm"])


def test_csv_single_row():
    row = TableRow(0.2, 60, "N/2", "fpihf", 0.01, 300.0, 0, 5)
    buf = io.StringIO()
    emit_table([row], buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",")[:7] == ["kappa", "N", "K_rule", "algorithm", "avg_time_s",
                                       "avg_iters", "timeouts"]


def test_box_row_rendering():
    row = TableRow(0.2, 60, "N/2", "condat-vu", None, None, 20, 20)
    buf = io.StringIO()
    emit_table([row], buf)
    assert buf.getvalue().splitlines()[1].split(",")[4:7] == ["", "", "20"]
    buf = io.StringIO()
    emit_table([row], buf, "aligned-text")
    assert buf.getvalue().count(BOX) == 2


def test_text_layout_groups_rules():
    rows = [TableRow(0.2, 60, r, a, 0.5, 100.0, 0, 5)
            for r in ("N/3", "N/2") for a in ("fpihf", "fpif")]
    buf = io.StringIO()
    emit_table(rows, buf, "text")
    text = buf.getvalue()
    assert "kappa = 1/5" in text and "K=N/3" in text and "K=N/2" in text
    assert sum(1 for ln in text.splitlines() if ln.strip().startswith("60")) == 2


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_table([], io.StringIO())
    row = TableRow(0.2, 60, "N/2", "fpihf", 0.01, 300.0, 0, 5)
    bad = tmp_path / "nope" / "t.csv"
    with pytest.raises(OSError, match="nope"):
        emit_table([row], bad)


optional = st.one_of(st.none(), st.floats(0, 1e6, allow_nan=False))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.builds(
    TableRow,
    st.floats(1e-3, 1.0), st.integers(2, 10**4), st.sampled_from(list(bench.K_RULES)),
    st.sampled_from(list(bench.ALGORITHMS)), optional, optional, st.integers(0, 20),
    st.integers(1, 20)), min_size=1, max_size=6))
def test_csv_round_trip(rows):
    buf = io.StringIO()
    emit_table(rows, buf)
    buf.seek(0)
    assert parse_table(buf) == rows


def test_norm_data(tmp_path):
    grid = ExperimentGrid(kappas=(1 / 10,), Ns=(600,), k_rules=("N/2",), replications=20)
    path = emit_norm_data(grid, tmp_path / "norms.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "kappa,N,K,seed,norm_A"
    assert len(lines) == 21
    assert all(float(ln.split(",")[-1]) > 0 for ln in lines[1:])


def test_norm_medians_scale_with_kappa():
    grid = ExperimentGrid(kappas=(1 / 10, 1 / 20), Ns=(600,), k_rules=("N/2",), replications=20)
    buf = io.StringIO()
    emit_norm_data(grid, buf)
    data = np.array([[float(v) for v in ln.split(",")]
                     for ln in buf.getvalue().splitlines()[1:]])
    med = {k: np.median(data[data[:, 0] == k, 4]) for k in (0.1, 0.05)}
    assert med[0.1] == pytest.approx(2 * med[0.05], rel=1e-9)


def test_runs_file(tmp_path):
    path = tmp_path / "runs.csv"
    run_experiment(_one_cell(), ["fpihf"], runs_path=path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("kappa,N,K,K_rule,algorithm,seed")


def test_thread_env(monkeypatch):
    monkeypatch.setenv(bench.THREADS_ENV, "1")
    rows = run_experiment(_one_cell(replications=1), ["fpihf"])
    assert rows[0].avg_iters > 0
