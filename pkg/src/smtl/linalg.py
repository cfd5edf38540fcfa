"""Dense symmetric / positive-semidefinite linear algebra primitives.

All routines work on plain ``numpy`` arrays or on :class:`PsdMatrix`, a thin
wrapper caching the eigendecomposition computed at construction. Functions are
pure and results depend only on their inputs, so everything here is safe to
share across threads.

Conventions used throughout the package:

* eigenvalues are returned in non-increasing order;
* each eigenvector's entry of largest magnitude is made positive, which pins
  an otherwise arbitrary sign and keeps repeated runs bit-identical;
* matrices are symmetrized as ``(A + A.T) / 2`` before any decomposition to
  absorb roundoff;
* eigenvalues at or below ``rank_tol * max(eigenvalue)`` count as zero for
  rank decisions (pseudoinverses, range projectors, fractional powers).
"""

import numpy as np

from .errors import (
    BadExponent,
    DimensionMismatch,
    NonFinite,
    NotPsd,
    SingularA,
    SingularMatrix,
)

DEFAULT_RANK_TOL = 1e-10


class SymEig:
    """Eigendecomposition of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : (m,) ndarray
        Sorted in non-increasing order.
    eigenvectors : (m, m) ndarray
        Column ``i`` pairs with ``eigenvalues[i]``; signs are normalized so
        the entry of largest magnitude in each column is positive.
    """

    __slots__ = ("eigenvalues", "eigenvectors")

    def __init__(self, eigenvalues, eigenvectors):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def reconstruct(self):
        """Return ``V diag(w) V.T`` as a dense array."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _fix_signs(v):
    # Flip each column so its largest-magnitude entry is positive.
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix with deterministic signs.

    Parameters
    ----------
    a : (m, m) array_like
        Symmetric up to roundoff; it is symmetrized before decomposing.

    Returns
    -------
    SymEig

    Raises
    ------
    DimensionMismatch
        If ``a`` is not a square 2-d array.
    NonFinite
        If ``a`` contains NaN or Inf.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("expected a square matrix, got shape %r" % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix contains non-finite entries")
    s = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(s)
    w = w[::-1].copy()
    v = np.ascontiguousarray(v[:, ::-1])
    return SymEig(w, _fix_signs(v))


def _frozen(a):
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


class PsdMatrix:
    """Symmetric positive semidefinite matrix with a cached spectral form.

    The decomposition is computed once in the constructor and never mutated,
    so instances can be shared freely. ``rank_tol`` is relative to the
    largest eigenvalue and controls which eigenvalues are treated as zero.

    Raises
    ------
    NotPsd
        If the smallest eigenvalue is below ``-rank_tol * max(1, w_max)``.
    """

    __slots__ = ("data", "rank_tol", "eig")

    def __init__(self, data, rank_tol=DEFAULT_RANK_TOL):
        eig = sym_eig(data)
        w = eig.eigenvalues
        wmax = max(w[0], 0.0) if w.size else 0.0
        if w.size and w[-1] < -rank_tol * max(1.0, wmax):
            raise NotPsd(
                "smallest eigenvalue %.3e is below the PSD tolerance" % w[-1]
            )
        a = np.asarray(data, dtype=float)
        self.data = _frozen(0.5 * (a + a.T))
        self.rank_tol = float(rank_tol)
        self.eig = eig

    @classmethod
    def from_eig(cls, eigenvalues, eigenvectors, rank_tol=DEFAULT_RANK_TOL):
        """Build from a known spectral form without re-decomposing.

        Eigenvalues may arrive in any order; they are sorted non-increasing
        (with eigenvectors permuted to match) so invariants hold.
        """
        w = np.asarray(eigenvalues, dtype=float)
        v = np.asarray(eigenvectors, dtype=float)
        order = np.argsort(-w, kind="stable")
        w = w[order]
        v = _fix_signs(v[:, order])
        obj = cls.__new__(cls)
        obj.data = _frozen(0.5 * ((v * w) @ v.T + ((v * w) @ v.T).T))
        obj.rank_tol = float(rank_tol)
        obj.eig = SymEig(w.copy(), v)
        return obj

    @property
    def dim(self):
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape

    @property
    def eigenvalues(self):
        return self.eig.eigenvalues

    @property
    def eigenvectors(self):
        return self.eig.eigenvectors

    def rank_cut(self):
        """Absolute threshold below which eigenvalues count as zero."""
        return self.rank_tol * max(self.eigenvalues[0], 0.0)

    def rank(self):
        return int(np.sum(self.eigenvalues > self.rank_cut()))

    def is_pd(self):
        """True when every eigenvalue clears the rank threshold."""
        return bool(self.eigenvalues[-1] > self.rank_cut())


StructureMatrix = PsdMatrix
"""A task-coupling matrix is just a PSD matrix with its cached spectral form."""


def _as_psd(a, rank_tol=DEFAULT_RANK_TOL):
    return a if isinstance(a, PsdMatrix) else PsdMatrix(a, rank_tol=rank_tol)


def psd_clip(a, tol=DEFAULT_RANK_TOL):
    """Project a nearly-PSD symmetric matrix onto the PSD cone.

    Negative eigenvalues no smaller than ``-tol * max(1, w_max)`` are clipped
    to zero; anything more negative raises :class:`NotPsd` since that points
    at a bug rather than roundoff.
    """
    eig = sym_eig(a)
    w = eig.eigenvalues
    wmax = max(w[0], 0.0) if w.size else 0.0
    if w.size and w[-1] < -tol * max(1.0, wmax):
        raise NotPsd(
            "eigenvalue %.3e too negative to be roundoff (tol %.1e)" % (w[-1], tol)
        )
    return PsdMatrix.from_eig(np.maximum(w, 0.0), eig.eigenvectors)


def pinv_psd(a):
    """Moore-Penrose pseudoinverse of a PSD matrix via its spectral form."""
    a = _as_psd(a)
    w = a.eigenvalues
    cut = a.rank_cut()
    inv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    return PsdMatrix.from_eig(inv, a.eigenvectors, rank_tol=a.rank_tol)


def psd_power(a, q):
    """Fractional (or negative) matrix power of a PSD matrix.

    ``q > 0`` maps zero eigenvalues to zero; ``q < 0`` requires full rank and
    raises :class:`SingularMatrix` otherwise; ``q == 0`` gives the projector
    onto the range.
    """
    a = _as_psd(a)
    w = a.eigenvalues
    cut = a.rank_cut()
    nonzero = w > cut
    if q < 0 and not np.all(nonzero):
        raise SingularMatrix("negative power of a rank-deficient matrix")
    safe = np.where(nonzero, w, 1.0)
    if q == 0:
        powered = np.where(nonzero, 1.0, 0.0)
    else:
        powered = np.where(nonzero, safe ** float(q), 0.0)
    return PsdMatrix.from_eig(powered, a.eigenvectors, rank_tol=a.rank_tol)


def schatten(a, p):
    """Schatten p-norm of a PSD matrix, ``(sum_i w_i^p)**(1/p)``.

    Raises
    ------
    BadExponent
        If ``p < 1``.
    """
    if p < 1:
        raise BadExponent("Schatten norm requires p >= 1, got %r" % (p,))
    a = _as_psd(a)
    w = np.maximum(a.eigenvalues, 0.0)
    if p == 1:
        return float(np.sum(w))
    if np.isinf(p):
        return float(w[0])
    return float(np.sum(w ** float(p)) ** (1.0 / float(p)))


def range_contained(b, a, tol=1e-8):
    """Whether ``Ran(B)`` lies inside ``Ran(A)`` up to tolerance.

    Checks ``||(I - P_A) B||_F <= tol * (1 + ||B||_F)`` where ``P_A`` is the
    orthogonal projector onto the range of ``A``.
    """
    a = _as_psd(a)
    b_arr = b.data if isinstance(b, PsdMatrix) else np.asarray(b, dtype=float)
    if b_arr.shape[0] != a.dim:
        raise DimensionMismatch(
            "B has %d rows but A is %d x %d" % (b_arr.shape[0], a.dim, a.dim)
        )
    keep = a.eigenvalues > a.rank_cut()
    vr = a.eigenvectors[:, keep]
    resid = b_arr - vr @ (vr.T @ b_arr)
    return bool(
        np.linalg.norm(resid) <= tol * (1.0 + np.linalg.norm(b_arr))
    )


def _pd_eigenvalues(a):
    """Eigenvalues of a strictly PD structure matrix, or raise SingularA."""
    w = a.eigenvalues
    if w[-1] <= a.rank_cut():
        raise SingularA(
            "structure matrix is singular (smallest eigenvalue %.3e)" % w[-1]
        )
    return w


def sylvester_ls_solve(k, a, lam, y, ridge=0.0):
    """Solve ``K C + C (lam * A^-1 + ridge * I) = Y`` spectrally.

    This is the stationarity system of the uniform-weight squared loss plus
    the coupled quadratic penalty. With ``K = U diag(s) U.T`` and
    ``A = V diag(d) V.T`` the solution is ``C = U Ct V.T`` where
    ``Ct[i, j] = Yt[i, j] / (s[i] + lam / d[j] + ridge)`` and ``Yt = U.T Y V``.

    Parameters
    ----------
    k : PsdMatrix or (n, n) array_like
        Kernel Gram matrix.
    a : PsdMatrix or (t, t) array_like
        Strictly positive definite structure matrix.
    lam : float
        Coupling weight, must be positive.
    y : (n, t) array_like
        Targets.
    ridge : float, optional
        Additional uncoupled quadratic weight (defaults to 0).

    Raises
    ------
    SingularA
        If ``a`` has a zero eigenvalue at ``rank_tol`` resolution.
    """
    k = _as_psd(k)
    a = _as_psd(a)
    y = np.asarray(y, dtype=float)
    if lam <= 0:
        raise ValueError("lam must be positive")
    if y.shape != (k.dim, a.dim):
        raise DimensionMismatch(
            "Y has shape %r, expected (%d, %d)" % (y.shape, k.dim, a.dim)
        )
    d = _pd_eigenvalues(a)
    s = np.maximum(k.eigenvalues, 0.0)
    u, v = k.eigenvectors, a.eigenvectors
    yt = u.T @ y @ v
    denom = s[:, None] + lam / d[None, :] + ridge
    ct = yt / denom
    return u @ ct @ v.T


def kron_ls_solve(k, a, lam, y, ridge=0.0):
    """Dense Kronecker reference solve of the same system as
    :func:`sylvester_ls_solve`.

    Builds ``I_T (x) K + (lam * A^-1 + ridge * I_T) (x) I_n`` explicitly and
    solves for ``vec(C)`` (column-major vec). Only meant as an oracle on
    small problems; cost grows as ``(n T)^3``.
    """
    k = _as_psd(k)
    a = _as_psd(a)
    y = np.asarray(y, dtype=float)
    n, t = k.dim, a.dim
    if y.shape != (n, t):
        raise DimensionMismatch(
            "Y has shape %r, expected (%d, %d)" % (y.shape, n, t)
        )
    d = _pd_eigenvalues(a)
    v = a.eigenvectors
    a_inv = (v / d) @ v.T
    lam_mat = lam * a_inv + ridge * np.eye(t)
    big = np.kron(np.eye(t), k.data) + np.kron(lam_mat, np.eye(n))
    c_vec = np.linalg.solve(big, y.reshape(-1, order="F"))
    return c_vec.reshape((n, t), order="F")
