"""Prediction and evaluation metrics."""

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    LengthMismatch,
    NonPositiveNmse,
    ZeroVariance,
)
from .kernels import gram


def predict(model, x_new):
    """Predictions of a fitted model at new inputs, one column per task."""
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    if x_new.shape[1] != model.gram.d:
        raise DimensionMismatch(
            "inputs have %d features, the model was trained with %d"
            % (x_new.shape[1], model.gram.d)
        )
    kx = gram(model.gram.spec, x_new, model.gram.X_train)
    return kx @ model.C


def nmse(y_true, z, mask=None):
    """Normalized mean squared error, averaged over tasks.

    Each task's MSE is divided by the population variance of that task's
    true targets, so predicting the per-task mean scores exactly 1. With
    ``mask`` (a nonnegative matrix, zero marking unobserved entries) both
    the MSE and the variance are computed over observed entries only.
    """
    y_true = np.asarray(y_true, dtype=float)
    z = np.asarray(z, dtype=float)
    if y_true.shape != z.shape:
        raise DimensionMismatch("y_true and z must share a shape")
    n_tasks = y_true.shape[1]
    ratios = []
    for t in range(n_tasks):
        if mask is None:
            yt, zt = y_true[:, t], z[:, t]
        else:
            keep = np.asarray(mask)[:, t] > 0
            if not np.any(keep):
                continue
            yt, zt = y_true[keep, t], z[keep, t]
        var = float(np.var(yt))
        if var <= 0:
            raise ZeroVariance(t)
        ratios.append(float(np.mean((yt - zt) ** 2)) / var)
    return float(np.mean(ratios))


def accuracy(labels, z):
    """Fraction of rows whose argmax prediction matches the label.

    Ties pick the smallest column index. Labels must lie in [0, T).
    """
    labels = np.asarray(labels, dtype=int)
    z = np.asarray(z, dtype=float)
    if labels.shape[0] != z.shape[0]:
        raise DimensionMismatch("labels and predictions disagree on row count")
    n_tasks = z.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= n_tasks):
        bad = labels[(labels < 0) | (labels >= n_tasks)][0]
        raise BadLabel("label %d outside [0, %d)" % (bad, n_tasks))
    return float(np.mean(np.argmax(z, axis=1) == labels))


def normalized_improvement(stl, mtl):
    """Mean geometric-scale improvement of multi-task over single-task nMSE.

    ``mean((s - m) / sqrt(s * m))`` over paired experiments; positive values
    favor the multi-task fit.
    """
    stl = np.asarray(stl, dtype=float)
    mtl = np.asarray(mtl, dtype=float)
    if stl.shape != mtl.shape:
        raise LengthMismatch("paired nMSE sequences differ in length")
    if np.any(stl <= 0) or np.any(mtl <= 0):
        raise NonPositiveNmse("nMSE values must be strictly positive")
    return float(np.mean((stl - mtl) / np.sqrt(stl * mtl)))
