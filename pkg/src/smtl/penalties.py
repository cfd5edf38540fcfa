"""Structure penalties and their closed-form minimizers.

A penalty ``F(A)`` on the task-coupling matrix selects the flavour of
structure learning. Four kinds are supported:

* ``schatten(p, mu)`` : ``mu * ||A||_p^p``, the smooth family covering
  Frobenius-style output kernel learning (p=2) and trace-style feature
  learning (p=1);
* ``trace_one`` : indicator of ``{A PSD, tr(A) = 1}``;
* ``cluster(r, eps)`` : indicator of the set of matrices whose inverse is the
  affine image ``eps_m * U + eps_b * (M - U) + eps_w * (I - M)`` of a relaxed
  cluster assignment ``M`` in ``S_c = {0 <= M <= I, tr(M) = r}`` with
  ``U = 11'/T``;
* ``fixed(A0)`` : indicator of a single prescribed matrix.

For each penalty, :func:`unsupervised_min` returns the exact minimizer of
``lam * tr(A^-1 B) + F(A)`` over strictly PD matrices, which is the
structure update of the alternating algorithm. Because the trace term and
every penalty here are spectral, the minimizer shares eigenvectors with
``B``; only eigenvalues get remapped.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricAdjacency,
    BadPenaltyParam,
    BadRank,
    NotPd,
    NotStrictlyPd,
    UnsupportedPenalty,
)
from .linalg import PsdMatrix, pinv_psd, sym_eig

PENALTY_KINDS = ("schatten", "trace_one", "cluster", "fixed")


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    """Penalty kind plus its parameters. Build via the classmethods."""

    kind: str
    p: float = 1.0
    mu: float = 1.0
    r: int = 1
    eps_m: float = 1.0
    eps_b: float = 1.0
    eps_w: float = 1.0
    a0: object = None

    @classmethod
    def schatten(cls, p=1.0, mu=1.0):
        if p < 1:
            raise BadPenaltyParam("schatten exponent must satisfy p >= 1")
        if not mu > 0:
            raise BadPenaltyParam("schatten weight mu must be positive")
        return cls(kind="schatten", p=float(p), mu=float(mu))

    @classmethod
    def trace_one(cls):
        return cls(kind="trace_one")

    @classmethod
    def cluster(cls, r, eps_m=1.0, eps_b=1.0, eps_w=1.0):
        if int(r) != r or r < 1:
            raise BadRank("cluster count r must be a positive integer")
        if not (eps_m > 0 and eps_b > 0 and eps_w > 0):
            raise BadPenaltyParam("cluster epsilon weights must be positive")
        return cls(
            kind="cluster", r=int(r),
            eps_m=float(eps_m), eps_b=float(eps_b), eps_w=float(eps_w),
        )

    @classmethod
    def fixed(cls, a0):
        a0 = a0 if isinstance(a0, PsdMatrix) else PsdMatrix(a0)
        return cls(kind="fixed", a0=a0)

    @property
    def smooth(self):
        """True for penalties with a gradient (only the Schatten family)."""
        return self.kind == "schatten"


def _ones_projector(n_tasks):
    return np.full((n_tasks, n_tasks), 1.0 / n_tasks)


def _cluster_inverse_map(spec, m, n_tasks):
    """The affine map ``M -> A^{-1}(M)`` of the cluster penalty."""
    u = _ones_projector(n_tasks)
    eye = np.eye(n_tasks)
    return spec.eps_m * u + spec.eps_b * (m - u) + spec.eps_w * (eye - m)


def _cluster_recover_m(spec, a_inv, n_tasks):
    """Invert the affine map; returns None when eps_b == eps_w (M drops out)."""
    if spec.eps_b == spec.eps_w:
        return None
    u = _ones_projector(n_tasks)
    eye = np.eye(n_tasks)
    return (a_inv - (spec.eps_m - spec.eps_b) * u - spec.eps_w * eye) / (
        spec.eps_b - spec.eps_w
    )


def penalty_value(spec, a):
    """Evaluate ``F(A)``; indicator penalties return 0 or ``inf``."""
    a = a if isinstance(a, PsdMatrix) else PsdMatrix(a)
    w = np.maximum(a.eigenvalues, 0.0)
    if spec.kind == "schatten":
        return float(spec.mu * np.sum(w ** spec.p))
    if spec.kind == "trace_one":
        return 0.0 if abs(float(np.sum(w)) - 1.0) <= 1e-8 else float("inf")
    if spec.kind == "fixed":
        return (
            0.0
            if np.linalg.norm(a.data - spec.a0.data) <= 1e-8
            else float("inf")
        )
    # cluster: membership is checked by inverting the affine map
    n_tasks = a.dim
    if spec.r > n_tasks:
        raise BadRank("cluster count r=%d exceeds T=%d" % (spec.r, n_tasks))
    if not a.is_pd():
        return float("inf")
    a_inv = pinv_psd(a).data
    m = _cluster_recover_m(spec, a_inv, n_tasks)
    if m is None:
        fixed_inv = _cluster_inverse_map(spec, np.zeros((n_tasks, n_tasks)), n_tasks)
        ok = np.linalg.norm(a_inv - fixed_inv) <= 1e-6 * (1.0 + np.linalg.norm(a_inv))
        return 0.0 if ok else float("inf")
    em = sym_eig(m)
    ok = (
        em.eigenvalues[-1] >= -1e-6
        and em.eigenvalues[0] <= 1.0 + 1e-6
        and abs(float(np.sum(em.eigenvalues)) - spec.r) <= 1e-6
    )
    return 0.0 if ok else float("inf")


def _require_pd(b):
    # Strict positivity, not the relative rank test: barrier iterates have
    # eigenvalues near delta^2, far below rank_tol * ||B|| yet legitimately
    # positive.
    if not b.eigenvalues[-1] > 0.0:
        raise NotStrictlyPd("B must be strictly positive definite")


def unsupervised_min(spec, b, lam):
    """Exact minimizer of ``lam * tr(A^-1 B) + F(A)`` over PD matrices.

    Parameters
    ----------
    spec : PenaltySpec
    b : PsdMatrix or array, strictly PD
    lam : float, positive weight on the trace term

    Returns
    -------
    PsdMatrix
        The minimizing structure matrix; it commutes with ``b``.

    Notes
    -----
    Per penalty kind the eigenvalue maps are

    * schatten: ``gamma_i = (lam * sigma_i / (mu * p)) ** (1 / (p + 1))``,
      i.e. ``A = (lam / (mu p) * B) ** (1/(p+1))`` as a matrix power;
    * trace_one: ``A = B^{1/2} / tr(B^{1/2})``;
    * cluster: the trace term is affine in the assignment ``M``, so the
      minimum over the spectahedron sits at an extreme point spanned by
      eigenvectors of ``B`` (the r smallest when eps_b > eps_w, the r
      largest when eps_b < eps_w; ties broken by eigenvector index);
    * fixed: ``A0`` independent of ``B``.
    """
    b = b if isinstance(b, PsdMatrix) else PsdMatrix(b)
    if not lam > 0:
        raise BadPenaltyParam("lam must be positive")
    _require_pd(b)
    sigma = b.eigenvalues
    v = b.eigenvectors
    n_tasks = b.dim

    if spec.kind == "schatten":
        gamma = (lam * sigma / (spec.mu * spec.p)) ** (1.0 / (spec.p + 1.0))
        return PsdMatrix.from_eig(gamma, v)

    if spec.kind == "trace_one":
        root = np.sqrt(sigma)
        return PsdMatrix.from_eig(root / np.sum(root), v)

    if spec.kind == "fixed":
        if spec.a0.dim != n_tasks:
            raise BadPenaltyParam("fixed structure has wrong dimension")
        return spec.a0

    # cluster
    if spec.r > n_tasks:
        raise BadRank("cluster count r=%d exceeds T=%d" % (spec.r, n_tasks))
    if spec.eps_b > spec.eps_w:
        sel = np.arange(n_tasks - spec.r, n_tasks)  # r smallest eigenvalues
    elif spec.eps_b < spec.eps_w:
        sel = np.arange(spec.r)  # r largest eigenvalues
    else:
        sel = None
    if sel is None:
        m = (spec.r / n_tasks) * np.eye(n_tasks)
    else:
        vs = v[:, sel]
        m = vs @ vs.T
    return structure_from_inverse(_cluster_inverse_map(spec, m, n_tasks))


def structure_from_inverse(a_inv):
    """Invert a symmetric matrix meant to be ``A^{-1}``; must be strictly PD."""
    e = sym_eig(a_inv)
    if e.eigenvalues[-1] <= 1e-12 * max(1.0, abs(e.eigenvalues[0])):
        raise BadPenaltyParam(
            "structure inverse is not positive definite "
            "(eigenvalue %.3e); check the epsilon weights" % e.eigenvalues[-1]
        )
    return PsdMatrix.from_eig(1.0 / e.eigenvalues, e.eigenvectors)


def project_capped_simplex(v, r):
    """Euclidean projection onto ``{x in [0,1]^T : sum(x) = r}``.

    Bisects on the shift ``tau`` in ``x_i = clip(v_i - tau, 0, 1)`` until the
    sum constraint holds to ``1e-12``.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if r > n or r <= 0:
        raise BadRank("need 0 < r <= %d, got %r" % (n, r))
    if r == n:
        return np.ones(n)
    lo = float(np.min(v)) - 1.0
    hi = float(np.max(v))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = float(np.sum(np.clip(v - mid, 0.0, 1.0)))
        if abs(s - r) <= 1e-12:
            break
        if s > r:
            lo = mid
        else:
            hi = mid
    else:
        mid = 0.5 * (lo + hi)
    return np.clip(v - mid, 0.0, 1.0)


def project_structure(spec, a):
    """Project a symmetric matrix onto the feasible set of an indicator penalty.

    trace_one projects the spectrum onto the unit simplex; cluster projects in
    assignment space (recover ``M``, project its eigenvalues onto the capped
    simplex, map back through the affine inverse); fixed returns ``A0``.
    Schatten penalties have no feasible set to project onto.
    """
    if spec.kind == "schatten":
        raise UnsupportedPenalty("schatten penalties are smooth; nothing to project")
    a_arr = a.data if isinstance(a, PsdMatrix) else np.asarray(a, dtype=float)
    n_tasks = a_arr.shape[0]

    if spec.kind == "fixed":
        if spec.a0.dim != n_tasks:
            raise BadPenaltyParam("fixed structure has wrong dimension")
        return spec.a0

    if spec.kind == "trace_one":
        e = sym_eig(a_arr)
        w = project_capped_simplex(e.eigenvalues, 1.0)
        return PsdMatrix.from_eig(w, e.eigenvectors)

    # cluster
    if spec.r > n_tasks:
        raise BadRank("cluster count r=%d exceeds T=%d" % (spec.r, n_tasks))
    if spec.eps_b == spec.eps_w:
        return structure_from_inverse(
            _cluster_inverse_map(spec, np.zeros((n_tasks, n_tasks)), n_tasks)
        )
    e = sym_eig(a_arr)
    cut = 1e-12 * max(abs(e.eigenvalues[0]), 1.0)
    inv_w = np.where(np.abs(e.eigenvalues) > cut, 1.0 / e.eigenvalues, 0.0)
    a_inv = (e.eigenvectors * inv_w) @ e.eigenvectors.T
    m_raw = _cluster_recover_m(spec, a_inv, n_tasks)
    em = sym_eig(m_raw)
    w = project_capped_simplex(em.eigenvalues, float(spec.r))
    m = (em.eigenvectors * w) @ em.eigenvectors.T
    return structure_from_inverse(_cluster_inverse_map(spec, m, n_tasks))


# --- fixed structures from side information ---------------------------------

@dataclass(frozen=True)
class FixedStructure:
    """A prescribed coupling matrix plus a note on where it came from."""

    a: PsdMatrix
    provenance: str


def structure_mean_variance(n_tasks, gamma):
    """Coupling whose inverse is ``I + gamma * 11'/T``.

    ``gamma = 0`` decouples the tasks (identity); larger gamma shrinks all
    tasks toward their mean.
    """
    if gamma < 0:
        raise BadPenaltyParam("mean-variance gamma must be >= 0")
    a_inv = np.eye(n_tasks) + gamma * _ones_projector(n_tasks)
    return FixedStructure(
        a=pinv_psd(PsdMatrix(a_inv)),
        provenance="mean_variance(gamma=%g)" % gamma,
    )


def structure_graph(adjacency, gamma):
    """Coupling whose inverse is the graph Laplacian plus ``gamma * I``."""
    w = np.asarray(adjacency, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise AsymmetricAdjacency("adjacency must be a square matrix")
    if not np.allclose(w, w.T, rtol=0.0, atol=1e-12):
        raise AsymmetricAdjacency("adjacency matrix is not symmetric")
    if np.any(w < 0):
        raise BadPenaltyParam("adjacency weights must be nonnegative")
    if not gamma > 0:
        raise BadPenaltyParam("graph gamma must be > 0 (the Laplacian is singular)")
    lap = np.diag(np.sum(w, axis=1)) - w
    return FixedStructure(
        a=pinv_psd(PsdMatrix(lap + gamma * np.eye(w.shape[0]))),
        provenance="graph(gamma=%g)" % gamma,
    )


def structure_metric(theta):
    """Use a prescribed strictly PD output metric directly as the coupling."""
    a = PsdMatrix(theta)
    if not a.is_pd():
        raise NotPd("metric must be strictly positive definite")
    return FixedStructure(a=a, provenance="metric")


def structure_coding(l_embed):
    """Coupling induced by a linear output code: ``A = L' L``."""
    l_embed = np.atleast_2d(np.asarray(l_embed, dtype=float))
    from .linalg import psd_clip

    return FixedStructure(
        a=psd_clip(l_embed.T @ l_embed, tol=1e-8),
        provenance="coding(l=%d)" % l_embed.shape[0],
    )
