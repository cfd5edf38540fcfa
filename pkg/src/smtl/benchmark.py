"""Timing sweeps over synthetic problems of varying size.

The interesting scaling fact is that after the Gram matrix is built, the
per-iteration cost of the solver does not depend on the input dimension.
``run_grid`` produces one CSV row per (task count, dimension, repeat) cell
with phase timings split out so that claim is directly inspectable.

Cells are seeded independently of execution order, so results are
reproducible whether the grid runs on one thread or several (set
``SMTL_THREADS``).
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .kernels import KernelSpec
from .penalties import PenaltySpec
from .solver import SolverConfig, fit
from .synth import SyntheticSpec, synth_generate

FIELDS = (
    "n_tasks", "dim", "repeat", "n",
    "gram_seconds", "fit_seconds", "supervised_seconds",
    "unsupervised_seconds", "iters", "objective", "termination",
)


def _default_config():
    return SolverConfig(mode="altmin", epsilon=1e-6, max_iter=200,
                        delta=1e-3, delta_schedule="fixed")


@dataclass
class BenchmarkGrid:
    """Cartesian grid of problem sizes plus shared fit settings."""

    task_counts: tuple = (5, 10, 20)
    dims: tuple = (5, 50, 150)
    repeats: int = 3
    n_per_task: int = 30
    noise_sd: float = 0.1
    relatedness: float = 0.5
    lam: float = 0.1
    seed: int = 0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    penalty: PenaltySpec = field(
        default_factory=lambda: PenaltySpec.schatten(p=1.0, mu=1.0))
    config: SolverConfig = field(default_factory=_default_config)

    def cells(self):
        for n_tasks in self.task_counts:
            for dim in self.dims:
                for repeat in range(self.repeats):
                    yield n_tasks, dim, repeat


def run_cell(grid, n_tasks, dim, repeat):
    """Generate, fit, and time one cell; returns a CSV-ready dict."""
    spec = SyntheticSpec(d=dim, n_tasks=n_tasks, n_per_task=grid.n_per_task,
                         noise_sd=grid.noise_sd,
                         relatedness=grid.relatedness)
    ds, _ = synth_generate(spec, seed=(grid.seed, n_tasks, dim, repeat))
    model, report = fit(ds, grid.kernel, grid.penalty, grid.lam,
                        config=grid.config)
    del model
    wt = report.wall_times
    return {
        "n_tasks": n_tasks,
        "dim": dim,
        "repeat": repeat,
        "n": ds.n,
        "gram_seconds": "%.6f" % wt["gram"],
        "fit_seconds": "%.6f" % wt["fit"],
        "supervised_seconds": "%.6f" % wt["supervised"],
        "unsupervised_seconds": "%.6f" % wt["unsupervised"],
        "iters": report.iters,
        "objective": "%.17g" % report.objective_trajectory[-1],
        "termination": report.termination,
    }


def thread_count():
    raw = os.environ.get("SMTL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_grid(grid, out_path=None):
    """Run every cell (optionally in parallel) in declaration order.

    Returns the list of row dicts; writes them to ``out_path`` when given.
    """
    cells = list(grid.cells())
    workers = thread_count()
    if workers == 1:
        rows = [run_cell(grid, *cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: run_cell(grid, *c), cells))
    if out_path is not None:
        write_rows(rows, out_path)
    return rows


def write_rows(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
