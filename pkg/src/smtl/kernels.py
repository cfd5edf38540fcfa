"""Scalar kernels and training Gram matrices."""

from dataclasses import dataclass

import numpy as np

from .errors import BadKernelParam, DimensionMismatch
from .kernels_util import pairwise_sq_dists
from .linalg import PsdMatrix, psd_clip

KERNEL_KINDS = ("linear", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and its parameters.

    kind : "linear" or "gaussian"
    gamma : width of the gaussian kernel ``exp(-gamma * ||x - x'||^2)``;
        ignored by the linear kernel.
    """

    kind: str = "linear"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise BadKernelParam("unknown kernel kind %r" % (self.kind,))
        if self.kind == "gaussian" and not self.gamma > 0:
            raise BadKernelParam("gaussian kernel needs gamma > 0, got %r" % (self.gamma,))


def gram(spec, x1, x2=None):
    """Kernel matrix between two sets of row vectors.

    With ``x2=None`` the self-Gram of ``x1`` is computed, symmetrized and
    clipped onto the PSD cone (gaussian kernels can go slightly indefinite
    in floating point). Cross-Gram matrices are returned as-is.

    Returns a plain ``(m, r)`` ndarray.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    self_gram = x2 is None
    x2 = x1 if self_gram else np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[1] != x2.shape[1]:
        raise DimensionMismatch(
            "feature dimensions differ: %d vs %d" % (x1.shape[1], x2.shape[1])
        )
    if spec.kind == "linear":
        k = x1 @ x2.T
    else:
        k = np.exp(-spec.gamma * pairwise_sq_dists(x1, x2))
    if self_gram:
        return psd_clip(0.5 * (k + k.T), tol=1e-8).data.copy()
    return k


class GramMatrix:
    """Training Gram matrix bundled with its kernel spec and inputs.

    The decomposed PSD kernel matrix lives in ``.K`` (a
    :class:`~smtl.linalg.PsdMatrix`); the training inputs are retained so a
    fitted model can later evaluate cross-kernels against new points.
    Instances are immutable after construction.
    """

    __slots__ = ("spec", "X_train", "K")

    def __init__(self, spec, x):
        x = np.atleast_2d(np.array(x, dtype=float))
        x.setflags(write=False)
        self.spec = spec
        self.X_train = x
        self.K = PsdMatrix(gram(spec, x))

    @property
    def n(self):
        return self.X_train.shape[0]

    @property
    def d(self):
        return self.X_train.shape[1]
