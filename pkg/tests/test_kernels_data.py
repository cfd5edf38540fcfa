"""Kernels, the long-format loader, and the loss evaluator."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from smtl.data import (
    TaskDataset,
    dataset_from_rows,
    load_dataset,
    loss_value_grad,
    save_dataset,
)
from smtl.errors import (
    BadKernelParam,
    DimensionMismatch,
    EmptyTask,
    InconsistentDimension,
    ParseError,
    UnsupportedLoss,
)
from smtl.kernels import GramMatrix, KernelSpec, gram


def test_linear_gram_is_xxt():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 3))
    k = gram(KernelSpec("linear"), x)
    assert_allclose(k, x @ x.T, atol=1e-12)


def test_gaussian_gram_matches_loop():
    rng = np.random.default_rng(1)
    x1 = rng.standard_normal((5, 2))
    x2 = rng.standard_normal((4, 2))
    spec = KernelSpec("gaussian", gamma=0.8)
    k = gram(spec, x1, x2)
    for i in range(5):
        for j in range(4):
            expected = np.exp(-0.8 * np.sum((x1[i] - x2[j]) ** 2))
            assert abs(k[i, j] - expected) < 1e-12


def test_gaussian_self_gram_diagonal_ones():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((6, 4))
    k = gram(KernelSpec("gaussian", gamma=2.0), x)
    assert_allclose(np.diag(k), np.ones(6), atol=1e-12)
    assert np.all(k > 0) and np.all(k <= 1 + 1e-12)
    assert_allclose(k, k.T, atol=0)


def test_kernel_param_validation():
    with pytest.raises(BadKernelParam):
        KernelSpec("gaussian", gamma=0.0)
    with pytest.raises(BadKernelParam):
        KernelSpec("cubic")


def test_cross_gram_feature_mismatch():
    with pytest.raises(DimensionMismatch):
        gram(KernelSpec("linear"), np.ones((3, 2)), np.ones((3, 5)))


def test_gram_matrix_holds_frozen_training_inputs():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((5, 2))
    gm = GramMatrix(KernelSpec("linear"), x)
    assert gm.n == 5 and gm.d == 2
    with pytest.raises(ValueError):
        gm.X_train[0, 0] = 9.0


class TestDatasetFromRows:
    def test_one_hot_layout_and_per_task_weights(self):
        task_ids = np.array([0, 0, 1, 1, 1])
        y = np.arange(5.0)
        x = np.ones((5, 2))
        ds = dataset_from_rows(task_ids, y, x, weighting="per_task")
        assert ds.n_tasks == 2
        assert_allclose(ds.Y[:, 0], [0, 1, 0, 0, 0])
        assert_allclose(ds.Y[:, 1], [0, 0, 2, 3, 4])
        # canonical weights: 1/n_t on a row's own task, zero elsewhere
        assert_allclose(ds.W[0], [0.5, 0.0])
        assert_allclose(ds.W[4], [0.0, 1 / 3])

    def test_uniform_weights(self):
        ds = dataset_from_rows(np.array([0, 1]), np.zeros(2), np.ones((2, 1)),
                               weighting="uniform")
        assert_allclose(ds.W[ds.W > 0], [0.5, 0.5])

    def test_missing_task_id_rejected(self):
        with pytest.raises(EmptyTask):
            dataset_from_rows(np.array([0, 2]), np.zeros(2), np.ones((2, 1)))


class TestLoader:
    def test_round_trip_is_bitwise(self, tmp_path):
        rng = np.random.default_rng(4)
        tids = rng.integers(0, 3, size=20)
        tids[:3] = [0, 1, 2]
        ds = dataset_from_rows(tids, rng.standard_normal(20),
                               rng.standard_normal((20, 4)))
        path = tmp_path / "data.csv"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert np.array_equal(back.X, ds.X)
        assert np.array_equal(back.Y, ds.Y)
        assert np.array_equal(back.task_ids, ds.task_ids)

    def test_header_must_match(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("task,target,x1\n0,1.0,2.0\n")
        with pytest.raises(ParseError) as err:
            load_dataset(p)
        assert err.value.line == 1

    def test_bad_float_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("task,y,x1\n0,1.0,2.0\n0,oops,2.0\n1,0.5,0.1\n")
        with pytest.raises(ParseError) as err:
            load_dataset(p)
        assert err.value.line == 3

    def test_field_count_mismatch(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("task,y,x1,x2\n0,1.0,2.0,3.0\n1,1.0,2.0\n")
        with pytest.raises(InconsistentDimension):
            load_dataset(p)

    def test_crlf_accepted(self, tmp_path):
        p = tmp_path / "dos.csv"
        p.write_bytes(b"task,y,x1\r\n0,1.0,2.0\r\n1,2.5,0.5\r\n")
        ds = load_dataset(p)
        assert ds.n == 2
        assert_allclose(ds.X[:, 0], [2.0, 0.5])

    def test_empty_body_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("task,y,x1\n")
        with pytest.raises(ParseError):
            load_dataset(p)


def test_loss_value_and_gradient():
    rng = np.random.default_rng(5)
    y = rng.standard_normal((4, 2))
    z = rng.standard_normal((4, 2))
    w = rng.random((4, 2))
    v, g = loss_value_grad("squared", y, z, w)
    assert_allclose(v, np.sum(w * (y - z) ** 2))
    # central differences on a few entries
    h = 1e-6
    for idx in [(0, 0), (2, 1), (3, 0)]:
        zp = z.copy(); zp[idx] += h
        zm = z.copy(); zm[idx] -= h
        vp, _ = loss_value_grad("squared", y, zp, w)
        vm, _ = loss_value_grad("squared", y, zm, w)
        assert abs((vp - vm) / (2 * h) - g[idx]) < 1e-6


def test_loss_is_permutation_invariant():
    rng = np.random.default_rng(6)
    y = rng.standard_normal((6, 3))
    z = rng.standard_normal((6, 3))
    w = rng.random((6, 3))
    perm = rng.permutation(6)
    v1, _ = loss_value_grad("squared", y, z, w)
    v2, _ = loss_value_grad("squared", y[perm], z[perm], w[perm])
    assert_allclose(v1, v2, rtol=1e-12)


def test_unknown_loss():
    with pytest.raises(UnsupportedLoss):
        loss_value_grad("hinge", np.zeros((1, 1)), np.zeros((1, 1)),
                        np.ones((1, 1)))


def test_task_dataset_validation():
    with pytest.raises(DimensionMismatch):
        TaskDataset(X=np.ones((3, 2)), Y=np.ones((2, 2)),
                    W=np.ones((3, 2)), task_ids=np.zeros(3, dtype=int))
