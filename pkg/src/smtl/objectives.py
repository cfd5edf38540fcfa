"""The coupled objectives and the maps between their solution sets.

Three functionals of a coefficient matrix ``C`` (n x T) and a coupling
matrix ``A`` (T x T) are exposed:

* ``eval_Q`` : ``V(Y, K C A) + lam tr(A C'KC) + F(A) [+ ridge tr(C'KC)]``,
  the original nonconvex form in which predictions are ``K C A``;
* ``eval_R`` : ``V(Y, K C) + lam tr(A^+ C'KC) + F(A) [+ ridge tr(C'KC)]``
  restricted to pairs with ``Ran(C'KC)`` inside ``Ran(A)`` (``+inf``
  otherwise), the jointly convex reformulation;
* ``eval_S`` : the barrier version of R with ``A^{-1}(C'KC + delta^2 I)``
  in place of the pseudoinverse trace, finite only on strictly PD ``A``.

The value-preserving maps between Q- and R-minimizers are ``map_Q_to_R``
(``C -> C A``) and ``map_R_to_Q`` (``C -> C A^+``).
"""

from dataclasses import dataclass, replace

import numpy as np

from .data import loss_value_grad
from .errors import DimensionMismatch, InfeasiblePair, NotStrictlyPd
from .linalg import PsdMatrix, pinv_psd, psd_power, range_contained
from .penalties import PenaltySpec, penalty_value

RANGE_TOL = 1e-8


@dataclass
class ProblemInstance:
    """Everything that defines one training problem.

    gram : GramMatrix of the training inputs
    Y, W : (n, T) targets and nonnegative loss weights
    lam : weight of the coupled quadratic term, > 0
    penalty : PenaltySpec
    ridge : optional weight of an uncoupled ``tr(C'KC)`` term, >= 0
    delta : barrier size used by ``eval_S``, >= 0
    """

    gram: object
    Y: np.ndarray
    W: np.ndarray
    lam: float
    penalty: PenaltySpec
    ridge: float = 0.0
    delta: float = 0.0
    loss: str = "squared"

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        if self.Y.shape != self.W.shape:
            raise DimensionMismatch("Y and W must share a shape")
        if self.Y.shape[0] != self.gram.n:
            raise DimensionMismatch("Y row count does not match the Gram matrix")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.ridge < 0 or self.delta < 0:
            raise ValueError("ridge and delta must be nonnegative")
        if np.any(self.W < 0):
            raise ValueError("loss weights must be nonnegative")

    @property
    def K(self):
        return self.gram.K.data

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def n_tasks(self):
        return self.Y.shape[1]

    def with_delta(self, delta):
        return replace(self, delta=delta)


def _as_structure(a):
    return a if isinstance(a, PsdMatrix) else PsdMatrix(a)


def _check_c(inst, c):
    c = np.asarray(c, dtype=float)
    if c.shape != (inst.n, inst.n_tasks):
        raise DimensionMismatch(
            "C has shape %r, expected (%d, %d)" % (c.shape, inst.n, inst.n_tasks)
        )
    return c


def eval_Q(inst, c, a):
    """Original objective; predictions are ``K C A``."""
    c = _check_c(inst, c)
    a = _as_structure(a)
    kc = inst.K @ c
    m = c.T @ kc
    v, _ = loss_value_grad(inst.loss, inst.Y, kc @ a.data, inst.W)
    value = v + inst.lam * float(np.sum(a.data * m))
    if inst.ridge:
        value += inst.ridge * float(np.trace(m))
    return value + penalty_value(inst.penalty, a)


def _trace_pinv_quad(a, m):
    """``tr(A^+ M)`` computed in A's eigenbasis."""
    w = a.eigenvalues
    cut = a.rank_cut()
    keep = w > cut
    vm = a.eigenvectors[:, keep]
    quads = np.einsum("ij,jk,ki->i", vm.T, m, vm)
    return float(np.sum(quads / w[keep]))


def eval_R(inst, c, a):
    """Convex reformulation; ``+inf`` off the feasible range set."""
    c = _check_c(inst, c)
    a = _as_structure(a)
    kc = inst.K @ c
    m = c.T @ kc
    if not range_contained(m, a, tol=RANGE_TOL):
        return float("inf")
    v, _ = loss_value_grad(inst.loss, inst.Y, kc, inst.W)
    value = v + inst.lam * _trace_pinv_quad(a, m)
    if inst.ridge:
        value += inst.ridge * float(np.trace(m))
    return value + penalty_value(inst.penalty, a)


def _pd_inverse_trace(a, b):
    """``tr(A^{-1} B)`` for strictly PD A, else NotStrictlyPd."""
    w = a.eigenvalues
    if w[-1] <= a.rank_cut():
        raise NotStrictlyPd("eval_S needs a strictly PD structure matrix")
    v = a.eigenvectors
    quads = np.einsum("ij,jk,ki->i", v.T, b, v)
    return float(np.sum(quads / w))


def eval_S(inst, c, a):
    """Barrier objective at the instance's ``delta``; needs ``delta > 0``."""
    if not inst.delta > 0:
        raise ValueError("eval_S needs delta > 0 on the instance")
    c = _check_c(inst, c)
    a = _as_structure(a)
    kc = inst.K @ c
    m = c.T @ kc
    b = m + (inst.delta ** 2) * np.eye(inst.n_tasks)
    v, _ = loss_value_grad(inst.loss, inst.Y, kc, inst.W)
    value = v + inst.lam * _pd_inverse_trace(a, b)
    if inst.ridge:
        value += inst.ridge * float(np.trace(m))
    return value + penalty_value(inst.penalty, a)


def grad_S_C(inst, c, a):
    """Gradient of the barrier objective in ``C`` (penalty plays no part)."""
    c = _check_c(inst, c)
    a = _as_structure(a)
    if not a.is_pd():
        raise NotStrictlyPd("gradient needs a strictly PD structure matrix")
    kc = inst.K @ c
    _, gz = loss_value_grad(inst.loss, inst.Y, kc, inst.W)
    w = a.eigenvalues
    v = a.eigenvectors
    a_inv = (v / w) @ v.T
    g = inst.K @ gz + 2.0 * inst.lam * (kc @ a_inv)
    if inst.ridge:
        g = g + 2.0 * inst.ridge * kc
    return g


def grad_S_A(inst, c, a):
    """Gradient of the barrier objective in ``A``.

    For indicator penalties this is the gradient of the smooth part only
    (the indicator contributes via projection, not differentiation).
    """
    c = _check_c(inst, c)
    a = _as_structure(a)
    if not a.is_pd():
        raise NotStrictlyPd("gradient needs a strictly PD structure matrix")
    kc = inst.K @ c
    m = c.T @ kc
    b = m + (inst.delta ** 2) * np.eye(inst.n_tasks)
    w = a.eigenvalues
    v = a.eigenvectors
    a_inv = (v / w) @ v.T
    g = -inst.lam * (a_inv @ b @ a_inv)
    g = 0.5 * (g + g.T)
    if inst.penalty.smooth:
        p, mu = inst.penalty.p, inst.penalty.mu
        g = g + mu * p * psd_power(a, p - 1.0).data
    return g


def map_Q_to_R(inst, c_q, a_q):
    """Carry a Q-point to the R-parameterization: ``(C A, A)``."""
    c_q = _check_c(inst, c_q)
    a_q = _as_structure(a_q)
    return c_q @ a_q.data, a_q


def map_R_to_Q(inst, c_r, a_r):
    """Carry an R-feasible point to the Q-parameterization: ``(C A^+, A)``.

    Raises
    ------
    InfeasiblePair
        If ``Ran(C'KC)`` is not contained in ``Ran(A)``.
    """
    c_r = _check_c(inst, c_r)
    a_r = _as_structure(a_r)
    m = c_r.T @ inst.K @ c_r
    if not range_contained(m, a_r, tol=RANGE_TOL):
        raise InfeasiblePair("Ran(C'KC) is not contained in Ran(A)")
    return c_r @ pinv_psd(a_r).data, a_r
