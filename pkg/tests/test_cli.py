"""Command-line interface: exit codes and the fit/predict/verify flows."""

import numpy as np
import pytest

from smtl.cli import main


def write_csv(path, seed=0, n_tasks=3, n_per_task=8, d=2):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((d, n_tasks))
    lines = ["task,y," + ",".join("x%d" % (j + 1) for j in range(d))]
    for t in range(n_tasks):
        for _ in range(n_per_task):
            x = rng.standard_normal(d)
            y = x @ w[:, t] + 0.05 * rng.standard_normal()
            lines.append("%d,%.17g," % (t, y)
                         + ",".join("%.17g" % v for v in x))
    path.write_text("\n".join(lines) + "\n")


def test_fit_then_predict(tmp_path, capsys):
    data = tmp_path / "train.csv"
    write_csv(data)
    model = tmp_path / "model.txt"
    assert main(["fit", "--data", str(data), "--out", str(model)]) == 0
    assert model.exists()

    out = tmp_path / "pred.csv"
    code = main(["predict", "--model", str(model), "--data", str(data),
                 "--out", str(out), "--nmse"])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "task,pred"
    assert len(lines) == 1 + 24
    captured = capsys.readouterr()
    assert "nmse" in captured.out
    val = float(captured.out.strip().rsplit(" ", 1)[-1])
    assert 0.0 <= val < 1.0  # signal clearly beats the mean baseline


def test_fit_with_config(tmp_path):
    data = tmp_path / "train.csv"
    write_csv(data, seed=1)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "kernel.type = gaussian\nkernel.gamma = 0.5\n"
        "penalty.type = trace_one\nlambda = 0.05\nmax_iter = 30\n"
    )
    model = tmp_path / "model.txt"
    assert main(["fit", "--data", str(data), "--out", str(model),
                 "--config", str(cfg)]) == 0
    assert "kind gaussian" in model.read_text()


def test_missing_data_file_is_data_error(tmp_path):
    assert main(["fit", "--data", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "m.txt")]) == 2


def test_malformed_csv_is_data_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("task,y,x1\n0,1.0,spam\n1,0.5,0.2\n")
    assert main(["fit", "--data", str(bad),
                 "--out", str(tmp_path / "m.txt")]) == 2


def test_model_data_dimension_mismatch(tmp_path):
    data = tmp_path / "train.csv"
    write_csv(data, d=2)
    model = tmp_path / "model.txt"
    assert main(["fit", "--data", str(data), "--out", str(model)]) == 0
    wide = tmp_path / "wide.csv"
    write_csv(wide, d=3)
    assert main(["predict", "--model", str(model), "--data", str(wide),
                 "--out", str(tmp_path / "p.csv")]) == 2


def test_rejected_config_value_is_config_error(tmp_path):
    # parses fine, but the solver refuses delta = 0
    data = tmp_path / "train.csv"
    write_csv(data, seed=2)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("delta = 0.0\n")
    assert main(["fit", "--data", str(data), "--out", str(tmp_path / "m.txt"),
                 "--config", str(cfg)]) == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    # targets near the double overflow threshold blow up the squared loss
    data = tmp_path / "huge.csv"
    data.write_text(
        "task,y,x1\n"
        "0,1e200,0.1\n0,-1e200,0.4\n1,1e200,-0.3\n1,-1e200,0.2\n"
    )
    assert main(["fit", "--data", str(data),
                 "--out", str(tmp_path / "m.txt")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main(["--bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["fit"])  # missing required arguments
    assert exc.value.code == 1


def test_bad_int_list_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["benchmark", "--out", "x.csv", "--tasks", "5,banana"])
    assert exc.value.code == 1


def test_verify_filter(capsys):
    assert main(["verify", "--filter", "nuclear"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "nuclear" in out


def test_verify_no_match_fails(capsys):
    assert main(["verify", "--filter", "zzz_not_a_check"]) == 1
    assert "no checks match" in capsys.readouterr().err


def test_benchmark_deterministic_columns(tmp_path, capsys):
    import csv

    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        code = main(["benchmark", "--out", str(out), "--tasks", "2",
                     "--dims", "3,4", "--repeats", "1", "--seed", "5"])
        assert code == 0
    header = a.read_text().split("\n")[0]
    assert header.startswith("n_tasks,dim,repeat")
    # wall-clock columns vary; everything else must reproduce exactly
    stable = ("n_tasks", "dim", "repeat", "n", "iters", "objective",
              "termination")
    with open(a) as fa, open(b) as fb:
        rows_a, rows_b = list(csv.DictReader(fa)), list(csv.DictReader(fb))
    assert len(rows_a) == len(rows_b) == 2
    for ra, rb in zip(rows_a, rows_b):
        for key in stable:
            assert ra[key] == rb[key], key


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
