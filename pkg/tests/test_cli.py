from __future__ import annotations

import csv
import io
import json
import random
import subprocess
import sys

import numpy as np
import pytest

from hypercross import bench, cli
from hypercross.errors import ConvergenceError, PreconditionError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nodes_tg_indexed(capsys):
    code, out, _ = run(capsys, "nodes", "--method", "tg", "--n", "32")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "node", "weight"]
    k, x, w = bench.indexed_rule_1d("tg", 32)
    assert [int(r[0]) for r in rows[1:]] == k.tolist()
    # %.17g round-trips every double exactly
    assert [float(r[1]) for r in rows[1:]] == x.tolist()
    assert [float(r[2]) for r in rows[1:]] == w.tolist()


def test_nodes_gauss_by_degree(capsys):
    code, out, _ = run(capsys, "nodes", "--method", "gauss-full", "--m", "5", "--weight", "freud:lambda=2,a=1")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == 0 and len(rows) == 5
    assert sum(float(r[2]) for r in rows) == pytest.approx(np.sqrt(np.pi), rel=1e-14)


def test_nodes_hypercross(capsys):
    code, out, _ = run(capsys, "nodes", "--hypercross", "--xi", "3", "--weight", "gauss:d=2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["x1", "x2", "weight"]
    assert sum(r[2] for r in doc["rows"]) == pytest.approx(1.0, abs=0.05)


def test_nodes_needs_method(capsys):
    code, _, err = run(capsys, "nodes", "--n", "8")
    assert code == 2 and "--method" in err


def test_integrate_json(capsys):
    code, out, _ = run(capsys, "integrate", "--rule", "gauss-full", "--fn", "gpoly:d=1", "--m", "3")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"value", "abs_error", "n_nodes", "reference", "method", "fn"}
    assert doc["n_nodes"] == 3 and doc["abs_error"] <= 1e-14


def test_integrate_m_only_for_1d_gauss(capsys):
    code, _, err = run(capsys, "integrate", "--method", "fibonacci", "--fn", "sin:d=2", "--m", "3")
    assert code == 2 and "--m" in err


def test_converge_and_fit(capsys, tmp_path):
    table = tmp_path / "t.csv"
    code, _, _ = run(capsys, "converge", "--method", "tg", "--fn", "tail:r=1,d=1", "--n", "32..1024", "--out", str(table))
    assert code == 0
    header, rows = bench.parse_csv(table.read_text())
    assert header == ["n", "n_used", "abs_error"] and len(rows) == 6
    code, out, _ = run(capsys, "fit", "--input", str(table), "--format", "json")
    fit = json.loads(out)
    assert code == 0 and fit["kind"] == "fit" and fit["rows_used"] == 6


def test_converge_timing_column(capsys):
    _, out, _ = run(capsys, "converge", "--method", "tg", "--fn", "cos:d=1", "--n", "16,32", "--timing")
    assert out.splitlines()[0].endswith(",seconds")


def test_recover(capsys):
    code, out, _ = run(capsys, "recover", "--fn", "sin", "--d", "2", "--m", "2..4", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["method"] == "recover" and len(doc["rows"]) == 3


def test_recover_dimension_contradiction(capsys):
    code, _, err = run(capsys, "recover", "--fn", "sin:d=1", "--d", "2")
    assert code == 2 and "contradicts" in err


def test_fool(capsys):
    code, out, _ = run(capsys, "fool", "--n", "16,64")
    header, rows = bench.parse_csv(out)
    assert code == 0 and len(rows) == 2
    assert all(r[h] > 0 for r in rows for h in header if h == "certified")


def test_corpus_listing(capsys):
    code, out, _ = run(capsys, "corpus", "--r", "2", "--reference")
    records = json.loads(out)
    assert code == 0 and len(records) >= 5
    assert {"id", "dim", "r", "periodic", "integral", "integral_error_bound", "reference_method"} <= set(records[0])
    code, out, _ = run(capsys, "corpus", "--fn", "cos:d=1", "--format", "csv")
    assert out.splitlines()[0] == "id,dim,r,periodic,integral,integral_error_bound"


def test_precondition_exit_code(capsys):
    code, _, err = run(capsys, "converge", "--method", "fibonacci", "--fn", "sin:d=1", "--n", "8,13")
    assert code == 2 and err.startswith("hypercross: error:")


def test_nonconvergence_exit_code(capsys, monkeypatch):
    def stalled(*args, **kwargs):
        raise ConvergenceError("oracle stalled")

    monkeypatch.setattr(bench, "run_convergence", stalled)
    code, _, err = run(capsys, "converge", "--method", "tg", "--fn", "cos:d=1", "--n", "16")
    assert code == 3 and "numerical failure" in err


def test_seedless_guard():
    with cli.seedless_guard(True):
        with pytest.raises(cli.HypercrossError):
            np.random.default_rng(0)
        with pytest.raises(cli.HypercrossError):
            random.random()
    assert np.random.default_rng(0).random() >= 0.0


def test_seedless_flag_exit_code(capsys, monkeypatch):
    real = bench.run_convergence

    def noisy(*args, **kwargs):
        np.random.default_rng()
        return real(*args, **kwargs)

    monkeypatch.setattr(bench, "run_convergence", noisy)
    code, _, err = run(capsys, "converge", "--method", "tg", "--fn", "cos:d=1", "--n", "16", "--seedless")
    assert code == 2 and "--seedless" in err
    code, _, _ = run(capsys, "converge", "--method", "tg", "--fn", "cos:d=1", "--n", "16")
    assert code == 0


@pytest.mark.parametrize(("text", "level", "expected"), [("32..256", False, [32, 64, 128, 256]), ("3..5", True, [3, 4, 5]), ("8,4,8", False, [4, 8])])
def test_parse_budgets(text, level, expected):
    assert cli.parse_budgets(text, level) == expected


@pytest.mark.parametrize("text", ["", "a", "9..3", "0..4"])
def test_parse_budgets_rejects(text):
    with pytest.raises(PreconditionError):
        cli.parse_budgets(text)


def test_help_lists_methods():
    out = subprocess.run([sys.executable, "-m", "hypercross.cli", "--help"], capture_output=True, text=True, check=True).stdout
    for name in bench.METHODS:
        assert name in out


def test_figure_writes_png(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "conv.png"
    code, _, _ = run(capsys, "converge", "--method", "tg", "--fn", "cos:d=1", "--n", "16..128", "--figure", str(fig))
    assert code == 0
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
