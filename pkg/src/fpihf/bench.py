"""Benchmark grid over random TV least-squares instances.

Each grid cell ``(kappa, N, K rule)`` is solved by every requested algorithm
on ``replications`` instances with seeds ``base_seed, base_seed + 1, ...``.
Per cell and algorithm we report the mean wall time and mean iteration
count over the runs that reached the tolerance, and how many runs hit the
iteration cap.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .baselines import condat_vu_solve, fpif_solve
from .exceptions import ConfigurationError, DivergenceError
from .opcore import operator_norm
from .problems import generate_instance
from .solvers import DEFAULT_MAX_ITER, DEFAULT_TOL, lstv_solve

__all__ = [
    "ALGORITHMS",
    "K_RULES",
    "ExperimentGrid",
    "RunRecord",
    "TableRow",
    "emit_norm_data",
    "emit_table",
    "parse_table",
    "run_cell",
    "run_experiment",
]

log = logging.getLogger(__name__)

ALGORITHMS = {
    "condat-vu": condat_vu_solve,
    "fpif": fpif_solve,
    "fpihf": lstv_solve,
}
DISPLAY_NAMES = {"condat-vu": "Condat-Vu", "fpif": "FPIF", "fpihf": "FPIHF"}
K_RULES = {"N/3": Fraction(1, 3), "N/2": Fraction(1, 2), "2N/3": Fraction(2, 3)}
THREADS_ENV = "FPIHF_NUM_THREADS"
TABLE_COLUMNS = ["kappa", "N", "K_rule", "algorithm", "avg_time_s", "avg_iters",
                 "timeouts", "replications"]
BOX = "BOX"


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian grid of experiment cells.

    `Ns` are full-scale sizes; the sizes actually run are
    ``round(N * scale)``. The default is the desk-scale grid
    (``scale = 1/10``, 5 replications).
    """

    kappas: tuple = (1 / 5, 1 / 10, 1 / 20, 1 / 30)
    Ns: tuple = (600, 1200, 2400)
    k_rules: tuple = ("N/3", "N/2", "2N/3")
    replications: int = 5
    scale: Fraction = Fraction(1, 10)
    base_seed: int = 0
    alpha1: float = 5.0
    alpha2: float = 0.5

    def __post_init__(self):
        if not (self.kappas and self.Ns and self.k_rules) or self.replications < 1:
            raise ValueError("experiment grid is empty")
        unknown = set(self.k_rules) - set(K_RULES)
        if unknown:
            raise ValueError(f"unknown K rules {sorted(unknown)}; choose from {list(K_RULES)}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def full_scale(cls, **kwargs):
        """The grid at its original size: 20 replications, ``scale = 1``."""
        kwargs.setdefault("replications", 20)
        kwargs.setdefault("scale", Fraction(1))
        return cls(**kwargs)

    @property
    def seeds(self):
        return list(range(self.base_seed, self.base_seed + self.replications))

    def cells(self):
        """Yield ``(kappa, N, k_rule, K)`` for every cell, in grid order."""
        for kappa in self.kappas:
            for N_full in self.Ns:
                N = max(2, round(Fraction(N_full) * Fraction(self.scale)))
                for rule in self.k_rules:
                    K = max(1, round(N * K_RULES[rule]))
                    yield kappa, N, rule, K


@dataclass(frozen=True)
class RunRecord:
    kappa: float
    N: int
    K: int
    K_rule: str
    algorithm: str
    seed: int
    iterations: int
    time_s: float
    converged: bool
    objective: float
    error: str = ""


@dataclass(frozen=True)
class TableRow:
    """Aggregated statistics; averages are ``None`` when no run converged."""

    kappa: float
    N: int
    K_rule: str
    algorithm: str
    avg_time_s: float | None
    avg_iters: float | None
    timeouts: int
    replications: int

    @property
    def timeout_flag(self):
        return self.timeouts == self.replications


def run_cell(kappa, N, K, k_rule, algorithm, seeds, tol=DEFAULT_TOL, cap=DEFAULT_MAX_ITER,
             alpha1=5.0, alpha2=0.5, gamma=None, override_stepsize=False):
    """Run one algorithm on the instances of one cell; returns RunRecords.

    Instance generation is excluded from the timing; solver setup (norm
    estimates, factorizations) is included. Configuration errors and
    divergence are recorded in ``RunRecord.error`` instead of raised.
    """
    solve = ALGORITHMS[algorithm]
    records = []
    for seed in seeds:
        inst = generate_instance(N, K, kappa, alpha1, alpha2, seed)
        kwargs = {"tol": tol, "max_iter": cap, "override_stepsize": override_stepsize}
        if gamma is not None and algorithm != "condat-vu":
            kwargs["gamma"] = gamma
        t0 = time.perf_counter()
        try:
            rep = solve(inst, **kwargs)
        except (ConfigurationError, DivergenceError) as exc:
            log.warning("%s failed on kappa=%g N=%d K=%d seed=%d: %s",
                        algorithm, kappa, N, K, seed, exc)
            records.append(RunRecord(kappa, N, K, k_rule, algorithm, seed, 0,
                                     time.perf_counter() - t0, False, float("nan"),
                                     f"{type(exc).__name__}: {exc}"))
            continue
        elapsed = time.perf_counter() - t0
        records.append(RunRecord(kappa, N, K, k_rule, algorithm, seed, rep.iterations,
                                 elapsed, rep.converged, rep.objective))
    return records


def aggregate(records, replications):
    """Collapse the RunRecords of one (cell, algorithm) into a TableRow."""
    r0 = records[0]
    ok = [r for r in records if r.converged]
    timeouts = sum(1 for r in records if not r.converged and not r.error)
    if ok:
        avg_t = float(np.mean([r.time_s for r in ok]))
        avg_it = float(np.mean([r.iterations for r in ok]))
    else:
        avg_t = avg_it = None
    return TableRow(r0.kappa, r0.N, r0.K_rule, r0.algorithm, avg_t, avg_it, timeouts,
                    replications)


def _thread_limit():
    threads = os.environ.get(THREADS_ENV)
    return threadpool_limits(limits=int(threads) if threads else None)


def _run_task(args):
    cell, algorithm, kwargs = args
    kappa, N, rule, K = cell
    with _thread_limit():
        return run_cell(kappa, N, K, rule, algorithm, **kwargs)


def run_experiment(grid, algorithms=tuple(ALGORITHMS), tol=DEFAULT_TOL, cap=DEFAULT_MAX_ITER,
                   out_path=None, fmt="csv", gamma=None, override_stepsize=False, n_jobs=1,
                   runs_path=None):
    """Run every algorithm on every cell of `grid`.

    Returns the TableRows in grid order (cell, then algorithm) and, if
    `out_path` is given, writes them with :func:`emit_table`. `runs_path`
    receives the per-instance RunRecords as CSV. Cells run in `n_jobs`
    processes; replications within a cell run sequentially. Set the
    ``FPIHF_NUM_THREADS`` environment variable to pin BLAS threads.
    """
    algorithms = list(algorithms)
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
    kwargs = dict(seeds=grid.seeds, tol=tol, cap=cap, alpha1=grid.alpha1, alpha2=grid.alpha2,
                  gamma=gamma, override_stepsize=override_stepsize)
    tasks = [(cell, algo, kwargs) for cell in grid.cells() for algo in algorithms]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = [aggregate(recs, grid.replications) for recs in results]
    if out_path is not None:
        emit_table(rows, out_path, fmt)
    if runs_path is not None:
        _write_runs([r for recs in results for r in recs], runs_path)
    return rows


def _write_runs(records, path):
    fields = list(RunRecord.__dataclass_fields__)
    with _open_out(path) as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: repr(v) if isinstance(v, float) else v
                             for k, v in asdict(rec).items()})


class _open_out:
    """Open `path` for writing, or wrap a text stream; OSErrors name the path."""

    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        if hasattr(self.path, "write"):
            return self.path
        try:
            self.fh = open(self.path, "w", newline="")
        except OSError as exc:
            raise OSError(f"cannot write {self.path}: {exc.strerror}") from exc
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def _num(v):
    return "" if v is None else repr(float(v))


def emit_table(rows, out, fmt="csv"):
    """Write TableRows as CSV or as grouped aligned text.

    CSV leaves the averages empty for cells where every run timed out; the
    text layout prints ``BOX`` there instead.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        text = _table_csv(rows)
    elif fmt in ("text", "aligned-text"):
        text = _table_text(rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with _open_out(out) as fh:
        fh.write(text)
    return out


def _table_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for r in rows:
        writer.writerow([repr(float(r.kappa)), r.N, r.K_rule, r.algorithm, _num(r.avg_time_s),
                         _num(r.avg_iters), r.timeouts, r.replications])
    return buf.getvalue()


def _table_text(rows):
    rules = list(dict.fromkeys(r.K_rule for r in rows))
    lines = []
    for kappa in dict.fromkeys(r.kappa for r in rows):
        block = [r for r in rows if r.kappa == kappa]
        head = f"{'N':>6}  {'Algorithm':<10}" + "".join(
            f"  {('K=' + rule):>23}" for rule in rules)
        sub = f"{'':>6}  {'':<10}" + "".join(
            f"  {'Av. time (s)':>12} {'Av. iter':>10}" for _ in rules)
        lines += [f"kappa = {Fraction(kappa).limit_denominator(1000)}", head, sub,
                  "-" * len(sub)]
        for N in dict.fromkeys(r.N for r in block):
            for algo in dict.fromkeys(r.algorithm for r in block if r.N == N):
                cells = []
                for rule in rules:
                    match = [r for r in block
                             if r.N == N and r.algorithm == algo and r.K_rule == rule]
                    if not match:
                        cells.append(f"  {'':>12} {'':>10}")
                    elif match[0].avg_iters is None:
                        cells.append(f"  {BOX:>12} {BOX:>10}")
                    else:
                        m = match[0]
                        cells.append(f"  {m.avg_time_s:>12.2f} {m.avg_iters:>10.0f}")
                name = DISPLAY_NAMES.get(algo, algo)
                lines.append(f"{N:>6}  {name:<10}" + "".join(cells))
        lines.append("")
    return "\n".join(lines)


def parse_table(source):
    """Read a CSV written by :func:`emit_table` back into TableRows."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        rows.append(TableRow(
            float(rec["kappa"]), int(rec["N"]), rec["K_rule"], rec["algorithm"],
            float(rec["avg_time_s"]) if rec["avg_time_s"] else None,
            float(rec["avg_iters"]) if rec["avg_iters"] else None,
            int(rec["timeouts"]), int(rec["replications"]),
        ))
    return rows


def emit_norm_data(grid, out_path):
    """Write ``(kappa, N, K, seed, norm_A)`` for every instance of the grid."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kappa", "N", "K", "seed", "norm_A"])
    for kappa, N, _rule, K in grid.cells():
        for seed in grid.seeds:
            inst = generate_instance(N, K, kappa, grid.alpha1, grid.alpha2, seed)
            writer.writerow([repr(float(kappa)), N, K, seed,
                             repr(operator_norm(inst.A, tol=1e-12))])
    with _open_out(out_path) as fh:
        fh.write(buf.getvalue())
    return out_path


def warn_full_scale(grid):
    if grid.scale >= 1:
        warnings.warn(
            "running the full-scale grid; expect hours of compute", RuntimeWarning, stacklevel=2
        )
