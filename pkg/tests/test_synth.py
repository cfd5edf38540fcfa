"""Synthetic problem generator: determinism and the relatedness knob."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from smtl.synth import SyntheticSpec, synth_from_weights, synth_generate


def test_seed_pins_everything():
    spec = SyntheticSpec(d=5, n_tasks=4, n_per_task=7, relatedness=0.3)
    a, wa = synth_generate(spec, seed=(0, 1, 2))
    b, wb = synth_generate(spec, seed=(0, 1, 2))
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.Y, b.Y)
    assert np.array_equal(wa, wb)
    c, _ = synth_generate(spec, seed=(0, 1, 3))
    assert not np.array_equal(a.X, c.X)


def test_shapes_and_grouping():
    spec = SyntheticSpec(d=3, n_tasks=5, n_per_task=4)
    ds, w_true = synth_generate(spec, seed=0)
    assert ds.X.shape == (20, 3)
    assert ds.Y.shape == (20, 5)
    assert w_true.shape == (3, 5)
    assert np.array_equal(ds.task_ids, np.repeat(np.arange(5), 4))
    assert np.array_equal(ds.task_sizes, np.full(5, 4))


def test_relatedness_extremes():
    spec1 = SyntheticSpec(d=6, n_tasks=4, relatedness=1.0)
    _, w1 = synth_generate(spec1, seed=2)
    # rho = 1: every task is the shared vector
    assert np.ptp(w1, axis=1).max() == 0.0

    spec0 = SyntheticSpec(d=6, n_tasks=4, relatedness=0.0)
    _, w0 = synth_generate(spec0, seed=2)
    cols_differ = [np.any(w0[:, i] != w0[:, j])
                   for i in range(4) for j in range(i + 1, 4)]
    assert all(cols_differ)


def test_relatedness_raises_cross_task_correlation():
    # average |cosine| between task weights should grow with rho
    def mean_abs_cos(rho, seeds=40):
        out = []
        for s in range(seeds):
            _, w = synth_generate(
                SyntheticSpec(d=20, n_tasks=2, relatedness=rho), seed=(9, s))
            u, v = w[:, 0], w[:, 1]
            out.append(abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v)))
        return np.mean(out)

    assert mean_abs_cos(0.9) > mean_abs_cos(0.1) + 0.3


def test_targets_follow_weights():
    rng = np.random.default_rng(5)
    w_true = rng.standard_normal((4, 3))
    ds = synth_from_weights(w_true, 10, 0.0, rng)
    for t in range(3):
        rows = ds.task_ids == t
        assert_allclose(ds.Y[rows, t], ds.X[rows] @ w_true[:, t], atol=1e-12)


def test_noise_scale():
    rng = np.random.default_rng(6)
    w_true = np.zeros((2, 2))
    ds = synth_from_weights(w_true, 4000, 0.5, rng)
    resid = ds.Y[ds.W > 0]
    assert abs(np.std(resid) - 0.5) < 0.02


def test_weighting_options():
    spec = SyntheticSpec(d=2, n_tasks=3, n_per_task=5)
    per_task, _ = synth_generate(spec, seed=7, weighting="per_task")
    uniform, _ = synth_generate(spec, seed=7, weighting="uniform")
    # per-task: observed entries weigh 1/n_t; uniform: 1/n
    assert_allclose(per_task.W[per_task.W > 0], 1.0 / 5.0)
    assert_allclose(uniform.W[uniform.W > 0], 1.0 / 15.0)
    assert np.array_equal(per_task.W > 0, uniform.W > 0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(d=0, n_tasks=2)
    with pytest.raises(ValueError):
        SyntheticSpec(d=2, n_tasks=2, relatedness=1.5)
    with pytest.raises(ValueError):
        SyntheticSpec(d=2, n_tasks=2, noise_sd=-0.1)
