"""Block-coordinate solvers for the barrier objective.

Two modes share one outer loop:

* ``altmin`` alternates exact minimization in ``C`` (a linear solve) with the
  closed-form structure update from :func:`smtl.penalties.unsupervised_min`;
* ``bcd`` takes single gradient steps in each block, projecting the structure
  back onto the feasible set for indicator penalties. Step sizes are
  user-supplied constants guarded by backtracking halving, so a step that
  would increase the objective is shrunk and, failing that, rejected.

The supervised (C) step picks the cheapest exact route available:

* uniform weights: the spectral two-sided solve of
  :func:`smtl.linalg.sylvester_ls_solve`;
* one observed entry per row (the long-format layout): an equivalent n x n
  system built on the task-expanded kernel ``K * Atilde[t_i, t_j]``;
* anything else: conjugate gradient on the normal equations of the vec
  system, warm-started at the previous iterate.

With a geometric delta schedule the loop converges at each barrier size,
shrinks delta by a constant factor, and warm-starts the next phase.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CgStall,
    DimensionMismatch,
    EmptyTask,
    NonFiniteObjective,
    NotStrictlyPd,
)
from .kernels import GramMatrix
from .linalg import PsdMatrix, sylvester_ls_solve
from .objectives import ProblemInstance, eval_S, grad_S_A, grad_S_C
from .penalties import project_structure, unsupervised_min

MODES = ("altmin", "bcd")
SCHEDULES = ("fixed", "geometric")
MAX_HALVINGS = 60


@dataclass
class SolverConfig:
    """Outer-loop settings.

    epsilon is the stopping tolerance on successive objective values
    (absolute unless ``relative_stop``); delta is the initial barrier size.
    With the geometric schedule, delta is multiplied by ``delta_factor``
    after each converged phase until it would drop below ``delta_floor``.
    ``a0`` overrides the identity initialization of the structure matrix.
    """

    mode: str = "altmin"
    epsilon: float = 1e-8
    max_iter: int = 500
    delta: float = 1e-3
    delta_schedule: str = "fixed"
    delta_factor: float = 0.1
    delta_floor: float = 1e-6
    step_c: float = 1e-3
    step_a: float = 1e-3
    a0: object = None
    relative_stop: bool = False
    track_substeps: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError("mode must be one of %r" % (MODES,))
        if self.delta_schedule not in SCHEDULES:
            raise ValueError("delta_schedule must be one of %r" % (SCHEDULES,))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not (0.0 < self.delta_factor < 1.0):
            raise ValueError("delta_factor must lie in (0, 1)")
        if not self.delta_floor > 0:
            raise ValueError("delta_floor must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.step_c > 0 and self.step_a > 0):
            raise ValueError("bcd step sizes must be positive")

    def delta_values(self):
        """The ladder of barrier sizes the fit will run through."""
        if self.delta_schedule == "fixed":
            return [self.delta]
        out = []
        d = self.delta
        while d >= self.delta_floor * (1.0 - 1e-12):
            out.append(d)
            d *= self.delta_factor
        return out or [self.delta]


@dataclass
class FitReport:
    """What happened during a fit."""

    objective_trajectory: list
    iters: int
    termination: str
    wall_times: dict
    final_delta: float
    epsilon: float
    phase_starts: list = field(default_factory=list)
    substep_values: list = field(default_factory=list)


@dataclass
class ModelState:
    """A fitted model: coefficients, structure, kernel context, instance."""

    C: np.ndarray
    A: PsdMatrix
    gram: GramMatrix
    inst: ProblemInstance = None


def _weights_uniform(w):
    w0 = w.flat[0] if w.size else 0.0
    if w0 > 0 and np.all(w == w0):
        return float(w0)
    return None


def _weights_one_hot(w):
    """Column index of the single positive entry per row, or None."""
    pos = w > 0
    if np.all(np.sum(pos, axis=1) == 1):
        return np.argmax(pos, axis=1)
    return None


def _cg_normal_equations(k, w, lam_mat, y, c0, rtol=1e-8, maxiter=None,
                         stall_tol=1e-6):
    """CG on ``K(W*(KC)) + K C Lam = K(W*Y)`` over matrices.

    The operator is symmetric PSD in the Frobenius inner product. Singular
    but consistent systems (rank-deficient K) are fine: iterates stay in the
    relevant Krylov space.
    """
    b = k @ (w * y)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(y)
    if maxiter is None:
        maxiter = 10 * y.size

    def op(c):
        kc = k @ c
        return k @ (w * kc) + kc @ lam_mat

    x = np.array(c0, dtype=float)
    r = b - op(x)
    p = r.copy()
    rs = float(np.sum(r * r))
    tol = rtol * bnorm
    for _ in range(maxiter):
        if np.sqrt(rs) <= tol:
            break
        ap = op(p)
        denom = float(np.sum(p * ap))
        if denom <= 0:
            break  # ran out of curvature (null-space direction)
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.sum(r * r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    rel = np.linalg.norm(b - op(x)) / bnorm
    if rel > stall_tol:
        raise CgStall(
            "conjugate gradient stalled at relative residual %.3e" % rel
        )
    return x


def _structure_inverse_weights(a, lam, ridge):
    """Eigenvalues/vectors of ``Atilde = (lam A^{-1} + ridge I)^{-1}``."""
    w = a.eigenvalues
    if w[-1] <= a.rank_cut():
        raise NotStrictlyPd("supervised step needs a strictly PD structure")
    return 1.0 / (lam / w + ridge), a.eigenvectors


def _supervised_exact(inst, a, c_prev):
    """Exact minimizer of the C-block, routed by the weight pattern."""
    k = inst.K
    w_uniform = _weights_uniform(inst.W)
    if w_uniform is not None:
        return sylvester_ls_solve(
            inst.gram.K, a, inst.lam / w_uniform, inst.Y,
            ridge=inst.ridge / w_uniform,
        )
    tids = _weights_one_hot(inst.W)
    if tids is not None:
        dt, v = _structure_inverse_weights(a, inst.lam, inst.ridge)
        a_tilde = (v * dt) @ v.T
        h = k * a_tilde[np.ix_(tids, tids)]
        rows = np.arange(inst.n)
        wvec = inst.W[rows, tids]
        yvec = inst.Y[rows, tids]
        alpha = np.linalg.solve(h + np.diag(1.0 / wvec), yvec)
        return alpha[:, None] * a_tilde[tids, :]
    # general masked case: CG on the vec normal equations
    dt, v = _structure_inverse_weights(a, inst.lam, inst.ridge)
    lam_mat = (v / dt) @ v.T  # lam * A^{-1} + ridge * I
    return _cg_normal_equations(k, inst.W, lam_mat, inst.Y, c_prev)


def _safe_S(inst, c, a):
    try:
        return eval_S(inst, c, a)
    except NotStrictlyPd:
        return float("inf")


def _backtrack(inst, value_prev, candidate, fallback, step_fn):
    """Halve the step until the objective stops increasing."""
    cand = candidate
    step_scale = 1.0
    for _ in range(MAX_HALVINGS):
        val = _safe_S(inst, *cand)
        if val <= value_prev or not np.isfinite(value_prev):
            return cand
        step_scale *= 0.5
        cand = step_fn(step_scale)
    return fallback


def supervised_step(inst, a, c_prev, mode="altmin", step=None):
    """One update of the coefficient block.

    altmin returns the exact minimizer; bcd takes a single gradient step of
    size ``step`` with a halving guard against objective increase.
    """
    if mode == "altmin":
        return _supervised_exact(inst, a, c_prev)
    g = grad_S_C(inst, c_prev, a)
    s_prev = _safe_S(inst, c_prev, a)

    def make(scale):
        return (c_prev - scale * step * g, a)

    c_new, _ = _backtrack(inst, s_prev, make(1.0), (c_prev, a), make)
    return c_new


def unsupervised_step(inst, c, a_prev, mode="altmin", step=None):
    """One update of the structure block.

    altmin applies the closed-form minimizer of the penalized trace problem;
    bcd takes a projected (for indicator penalties) or eigenvalue-floored
    (for smooth penalties) gradient step, guarded by halving.
    """
    n_tasks = inst.n_tasks
    if mode == "altmin":
        b = c.T @ inst.K @ c + (inst.delta ** 2) * np.eye(n_tasks)
        return unsupervised_min(inst.penalty, PsdMatrix(b), inst.lam)
    g = grad_S_A(inst, c, a_prev)
    s_prev = _safe_S(inst, c, a_prev)
    smooth = inst.penalty.smooth

    def make(scale):
        raw = a_prev.data - scale * step * g
        if smooth:
            from .linalg import sym_eig

            e = sym_eig(raw)
            return (c, PsdMatrix.from_eig(np.maximum(e.eigenvalues, 1e-12),
                                          e.eigenvectors))
        return (c, project_structure(inst.penalty, raw))

    _, a_new = _backtrack(inst, s_prev, make(1.0), (c, a_prev), make)
    return a_new


def _initial_structure(config, n_tasks):
    a0 = config.a0
    if a0 is None:
        return PsdMatrix(np.eye(n_tasks))
    a0 = a0 if isinstance(a0, PsdMatrix) else PsdMatrix(a0)
    if a0.dim != n_tasks:
        raise DimensionMismatch(
            "a0 is %d x %d but the dataset has %d tasks"
            % (a0.dim, a0.dim, n_tasks)
        )
    if not a0.is_pd():
        raise NotStrictlyPd("a0 must be strictly positive definite")
    return a0


def fit_gram(gram, y, w, penalty, lam, ridge=0.0, config=None, callback=None):
    """Run the solver against a prebuilt Gram matrix.

    Returns ``(ModelState, FitReport)``. ``callback``, if given, is invoked
    as ``callback(iteration, C, A, value)`` after each outer iteration.
    """
    config = config or SolverConfig()
    deltas = config.delta_values()
    n_tasks = np.asarray(y).shape[1]
    c = np.zeros((gram.n, n_tasks))
    a = _initial_structure(config, n_tasks)

    trajectory = []
    phase_starts = []
    substeps = []
    times = {"gram": 0.0, "supervised": 0.0, "unsupervised": 0.0, "fit": 0.0}
    total_iters = 0
    converged = False
    inst = None
    t_fit = time.perf_counter()
    for delta in deltas:
        inst = ProblemInstance(
            gram=gram, Y=y, W=w, lam=lam, penalty=penalty,
            ridge=ridge, delta=delta,
        )
        phase_starts.append(len(trajectory))
        s_prev = _safe_S(inst, c, a)
        trajectory.append(s_prev)
        converged = False
        for _ in range(config.max_iter):
            t0 = time.perf_counter()
            c = supervised_step(inst, a, c, mode=config.mode, step=config.step_c)
            t1 = time.perf_counter()
            if config.track_substeps:
                substeps.append(_safe_S(inst, c, a))
            a = unsupervised_step(inst, c, a, mode=config.mode, step=config.step_a)
            t2 = time.perf_counter()
            times["supervised"] += t1 - t0
            times["unsupervised"] += t2 - t1
            s_new = _safe_S(inst, c, a)
            if np.isnan(s_new):
                raise NonFiniteObjective("objective became NaN")
            trajectory.append(s_new)
            total_iters += 1
            if callback is not None:
                callback(total_iters, c, a, s_new)
            gap = abs(s_new - s_prev)
            if config.relative_stop:
                gap = gap / max(1.0, abs(s_prev))
            if np.isfinite(gap) and gap < config.epsilon:
                converged = True
                s_prev = s_new
                break
            s_prev = s_new
    times["fit"] = time.perf_counter() - t_fit
    report = FitReport(
        objective_trajectory=trajectory,
        iters=total_iters,
        termination="converged" if converged else "max_iter",
        wall_times=times,
        final_delta=deltas[-1],
        epsilon=config.epsilon,
        phase_starts=phase_starts,
        substep_values=substeps,
    )
    return ModelState(C=c, A=a, gram=gram, inst=inst), report


def fit(dataset, kernel_spec, penalty, lam, ridge=0.0, config=None,
        callback=None):
    """Fit predictors and structure to a dataset.

    Builds the Gram matrix (timed separately in the report), then runs
    :func:`fit_gram`.
    """
    if dataset.n < 1:
        raise EmptyTask(0)
    for t in range(dataset.n_tasks):
        if dataset.task_sizes[t] == 0:
            raise EmptyTask(t)
    t0 = time.perf_counter()
    gram = GramMatrix(kernel_spec, dataset.X)
    t_gram = time.perf_counter() - t0
    state, report = fit_gram(
        gram, dataset.Y, dataset.W, penalty, lam,
        ridge=ridge, config=config, callback=callback,
    )
    report.wall_times["gram"] = t_gram
    return state, report


def refit_supervised(model, new_lambda):
    """Re-solve the coefficient block at a new lambda, structure frozen."""
    if model.inst is None:
        raise ValueError("model carries no problem instance to refit")
    inst = replace(model.inst, lam=new_lambda)
    c = _supervised_exact(inst, model.A, model.C)
    return ModelState(C=c, A=model.A, gram=model.gram, inst=inst)
