import io
import re
import subprocess
import sys

import numpy as np
import pytest

from slamrank import cli
from slamrank.batch import auto_lambda
from slamrank.data import load_model, load_sidecar, parse_ranking_file, save_model


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def value(pattern, text):
    return float(re.search(pattern, text).group(1))


@pytest.fixture
def separable(tmp_path):
    path = tmp_path / "sep.txt"
    code, _, _ = run("gen-data", "--n", 300, "--m", 5, "--d", 4, "--gamma", 1, "--seed", 3, "--out", path)
    assert code == 0
    return path


class TestGenData:
    def test_sidecar_margin_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for p in (a, b):
            code, out, _ = run("gen-data", "--n", 20, "--m", 4, "--d", 3, "--gamma", 1, "--seed", 7, "--out", p)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.txt.sidecar").read_bytes() == (tmp_path / "b.txt.sidecar").read_bytes()
        u, gamma = load_sidecar(tmp_path / "a.txt.sidecar")
        assert gamma >= 1.0 and u.shape == (3,)
        assert "seed=7" in out
        assert len(parse_ranking_file(a)) == 20

    def test_single_grade_is_usage_error(self, tmp_path):
        code, _, err = run("gen-data", "--n", 5, "--m", 4, "--d", 3, "--gamma", 1, "--grades", "1",
                           "--out", tmp_path / "x")
        assert code == 1 and "error" in err
        assert not (tmp_path / "x").exists()


class TestTrainOnline:
    def test_separable_map_bound_holds(self, separable, tmp_path):
        code, out, _ = run("train-online", "--data", separable, "--measure", "map",
                           "--out", tmp_path / "m", "--log", tmp_path / "log.csv",
                           "--bound-comparator", f"{separable}.sidecar")
        assert code == 0
        loss = value(r"cumulative loss\s+(\S+)", out)
        bound = value(r"\nbound\s+(\S+)", out)
        assert loss <= bound
        assert re.search(r"holds\s+yes", out)
        log = (tmp_path / "log.csv").read_text().splitlines()
        assert log[0] == "t,rml_loss,surrogate,updated,w_norm" and len(log) == 301
        assert load_model(tmp_path / "m").measure == "map"

    def test_auto_comparator(self, separable, tmp_path):
        code, out, _ = run("train-online", "--data", separable, "--out", tmp_path / "m",
                           "--log", tmp_path / "l")
        assert code == 0 and "final w" in out

    def test_ndcg_at_k_clamp_note(self, tmp_path):
        data = tmp_path / "d.txt"
        data.write_text("1 qid:1 1:1\n0 qid:1 1:0\n2 qid:2 1:1\n1 qid:2 1:0.5\n0 qid:2 1:0\n"
                        "0 qid:3 1:1\n1 qid:3 1:0\n0 qid:3 1:1\n1 qid:3 1:2\n0 qid:3 1:3\n1 qid:3 1:4\n")
        code, out, _ = run("train-online", "--data", data, "--measure", "ndcg@5",
                           "--out", tmp_path / "m", "--log", tmp_path / "l")
        assert code == 0
        assert "k=5 clamped to m on 2 queries" in out

    def test_empty_data(self, tmp_path):
        data = tmp_path / "empty.txt"
        data.write_text("# nothing here\n")
        code, _, err = run("train-online", "--data", data, "--out", tmp_path / "m", "--log", tmp_path / "l")
        assert code == 3 and err.strip()

    def test_missing_file(self, tmp_path):
        code, _, _ = run("train-online", "--data", tmp_path / "nope", "--out", tmp_path / "m",
                         "--log", tmp_path / "l")
        assert code == 3


class TestTrainBatch:
    def test_auto_lambda_printed(self, separable, tmp_path):
        code, out, _ = run("train-batch", "--data", separable, "--B", 10, "--epochs", 3,
                           "--out", tmp_path / "m")
        assert code == 0
        lam = value(r"lambda = (\S+) \(auto\)", out)
        ds = parse_ranking_file(separable)
        assert lam == auto_lambda(len(ds), 10.0, 2 * ds.stats.R_X)

    def test_given_lambda(self, separable, tmp_path):
        code, out, _ = run("train-batch", "--data", separable, "--lambda", "0.01", "--epochs", 2,
                           "--out", tmp_path / "m")
        assert code == 0 and "lambda = 0.01 (given)" in out

    @pytest.mark.parametrize("flags", [["--epochs", "0"], ["--lambda", "much"], ["--B", "-1"],
                                       ["--measure", "mrr"]])
    def test_usage_errors(self, separable, tmp_path, flags):
        code, _, _ = run("train-batch", "--data", separable, "--out", tmp_path / "m", *flags)
        assert code == 1

    def test_same_seed_same_trace(self, separable, tmp_path):
        traces = []
        for name in ("a", "b"):
            code, out, _ = run("train-batch", "--data", separable, "--epochs", 4, "--seed", 5,
                               "--out", tmp_path / name, "--trace", tmp_path / f"{name}.csv")
            assert code == 0
            traces.append((tmp_path / f"{name}.csv").read_text())
        assert traces[0] == traces[1]
        assert traces[0].startswith("epoch,objective\n") and len(traces[0].splitlines()) == 5
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    def test_held_out_metric(self, separable, tmp_path):
        code, out, _ = run("train-batch", "--data", separable, "--epochs", 2, "--test", separable,
                           "--out", tmp_path / "m")
        assert code == 0 and "test ndcg" in out


class TestEval:
    def test_perfect_model(self, separable, tmp_path):
        u, gamma = load_sidecar(f"{separable}.sidecar")
        save_model(u / gamma, tmp_path / "m")
        code, out, _ = run("eval", "--data", separable, "--model", tmp_path / "m", "--per-query")
        assert code == 0
        assert value(r"# mean ndcg = (\S+)", out) == 1.0
        rows = out.splitlines()
        start = rows.index("qid,metric,surrogate")
        assert len(rows) - start - 1 == 300

    def test_zero_model_matches_tie_break(self, tmp_path):
        from slamrank.metrics import ndcg

        data = tmp_path / "d.txt"
        data.write_text("0 qid:1 1:1\n1 qid:1 1:2\n2 qid:2 1:1\n0 qid:2 1:1\n")
        save_model([0.0], tmp_path / "m")
        code, out, _ = run("eval", "--data", data, "--model", tmp_path / "m", "--per-query")
        assert code == 0
        rows = out.splitlines()[2:]
        assert float(rows[0].split(",")[1]) == ndcg([0, 0], [0, 1])
        assert float(rows[1].split(",")[1]) == 1.0
        assert run("eval", "--data", data, "--model", tmp_path / "m", "--per-query")[1] == out

    def test_dimension_mismatch(self, separable, tmp_path):
        save_model([1.0, 2.0], tmp_path / "m")
        code, _, err = run("eval", "--data", separable, "--model", tmp_path / "m")
        assert code == 3 and "d=" in err

    def test_bad_model_file(self, separable, tmp_path):
        (tmp_path / "m").write_text("not a model\n")
        assert run("eval", "--data", separable, "--model", tmp_path / "m")[0] == 3


class TestVerify:
    def test_passes(self):
        code, out, _ = run("verify", "--suite", "all", "--trials", 300, "--seed", 1)
        assert code == 0 and "total violations: 0" in out

    def test_negative_control(self):
        code, out, _ = run("verify", "--suite", "bounds", "--trials", 300, "--seed", 1,
                           "--corrupt-weights", 0.5)
        assert code == 2 and "FAIL" in out

    def test_seed_reproduces_margins(self):
        a = run("verify", "--suite", "norms", "--trials", 200, "--seed", 4)[1]
        b = run("verify", "--suite", "norms", "--trials", 200, "--seed", 4)[1]
        assert a == b

    def test_bad_suite(self):
        assert run("verify", "--suite", "everything")[0] == 1
        assert run("verify", "--trials", 0)[0] == 1


class TestAnalyze:
    def test_csv_and_slope(self, tmp_path):
        code, out, _ = run("analyze", "--surrogate", "structmargin", "--m-grid", "2,4,6,8",
                           "--trials", 5, "--out", tmp_path / "p.csv")
        assert code == 0
        lines = (tmp_path / "p.csv").read_text().splitlines()
        assert lines[0] == "kind,m,sup_l1,trials"
        assert [int(r.split(",")[1]) for r in lines[1:]] == [2, 4, 6, 8]
        assert 1.6 <= value(r"slope = (\S+)", out) <= 2.4

    def test_structmargin_too_long(self, tmp_path):
        code, _, _ = run("analyze", "--surrogate", "structmargin", "--m-grid", "4,9",
                         "--out", tmp_path / "p.csv")
        assert code == 1

    def test_bad_grid(self, tmp_path):
        assert run("analyze", "--surrogate", "listnet", "--m-grid", "a,b", "--out", tmp_path / "p")[0] == 1


def test_no_subcommand():
    assert run()[0] == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "slamrank", "eval", "--data", str(tmp_path / "none"),
         "--model", str(tmp_path / "none")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 3
    proc = subprocess.run([sys.executable, "-m", "slamrank", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "train-online" in proc.stdout
