import json

import numpy as np
import pytest

from blockdiag.cli import run_experiment
from blockdiag.fileio import matrix_to_dict, read_matrix, write_matrix
from blockdiag.harness import generate_random_hermitian


def run(tmp_path, *argv):
    return run_experiment([*argv, "--out", str(tmp_path)])


def test_sweep_writes_reports(tmp_path, capsys):
    code = run(tmp_path, "sweep", "--n", "8", "--blocks", "0,1,2;3,4,5;6,7", "--seed", "42")
    assert code == 0
    csv_text = (tmp_path / "sweep.csv").read_text()
    assert csv_text.startswith("lambda,residual,value\n")
    assert len(csv_text.splitlines()) == 1 + 12 * 6
    side = json.loads((tmp_path / "sweep.json").read_text())
    assert {s["residual"] for s in side["slopes"]} == {"r_T1", "r_T2", "r_T3", "r_H", "r_split", "r_BS"}
    assert side["metadata"]["config"]["seed"] == 42 and side["metadata"]["version"]
    assert json.loads(capsys.readouterr().out)[0]["residual"] == "r_T1"


def test_sweep_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "sweep", "--seed", "7") == 0
    assert run(b, "sweep", "--seed", "7", "--workers", "3") == 0
    for name in ("sweep.csv", "sweep.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert not list(a.glob("*.tmp"))


def test_sweep_degenerate_exits_numerical(tmp_path, capsys):
    code = run(tmp_path, "sweep", "--h0-diag", "0,0.3,0.7,0.7,2.4,2.9,5,5.6")
    assert code == 3
    err = capsys.readouterr().err
    assert "DegeneracyError" in err and "gap" in err
    assert not (tmp_path / "sweep.csv").exists()


def test_transform_from_file(tmp_path, capsys):
    h = generate_random_hermitian(4, 3, 1.0) + np.diag([0, 0.5, 3, 3.5])
    write_matrix(tmp_path / "H.json", h)
    code = run(tmp_path, "transform", "--input", str(tmp_path / "H.json"), "--blocks", "0,1;2,3", "--format", "csv")
    assert code == 0
    doc = json.loads((tmp_path / "transform.json").read_text())
    assert {"T", "H_block", "S", "diagnostics"} <= doc.keys()
    assert doc["diagnostics"]["off_block_residual"] < 1e-12
    assert capsys.readouterr().out.startswith("quantity,value\n")
    t = np.array(doc["T"]["re"]) + 1j * np.array(doc["T"]["im"])
    np.testing.assert_allclose(t.conj().T @ t, np.eye(4), atol=1e-12)


def test_transform_non_hermitian_input(tmp_path, capsys):
    write_matrix(tmp_path / "H.json", np.array([[0, 1], [0, 0]]))
    assert run(tmp_path, "transform", "--input", str(tmp_path / "H.json"), "--blocks", "0;1") == 2
    assert "NotHermitianError" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    (tmp_path / "H.json").write_text('{"n": 2,\n "re": [[1, 0], [0, 1]],\n "im": oops}')
    assert run(tmp_path, "transform", "--input", str(tmp_path / "H.json"), "--blocks", "0;1") == 2
    assert "line 3" in capsys.readouterr().err


def test_bad_partition_string(tmp_path, capsys):
    assert run(tmp_path, "sweep", "--blocks", "0,1;a") == 2
    assert "ParseError" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    assert run(tmp_path, "transform", "--input", str(tmp_path / "nope.json"), "--blocks", "0;1") == 2


def test_series_command(tmp_path):
    assert run(tmp_path, "series", "--order", "3") == 0
    doc = json.loads((tmp_path / "series.json").read_text())
    assert set(doc["series"]) == {"Z", "T", "S_LA", "S_SW", "H_block_LA", "H_block_SW"}
    assert len(doc["series"]["S_LA"]) == 4
    rows = (tmp_path / "series.csv").read_text().splitlines()
    table = {tuple(r.split(",")[:2]): float(r.split(",")[2]) for r in rows[1:]}
    assert table[("2", "s_LA-s_SW")] < 1e-12
    assert table[("3", "B(s_LA)")] > 1e-6


def test_series_from_pair_file(tmp_path):
    h0 = np.diag([0.0, 1.0, 4.0, 5.0])
    h1 = generate_random_hermitian(4, 1)
    (tmp_path / "pair.json").write_text(json.dumps({"h0": matrix_to_dict(h0), "h1": matrix_to_dict(h1)}))
    assert run(tmp_path, "series", "--input", str(tmp_path / "pair.json"), "--blocks", "0,1;2,3") == 0


def test_matrix_file_roundtrip(tmp_path):
    a = generate_random_hermitian(5, 9) * np.pi
    write_matrix(tmp_path / "m.json", a)
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.json"), a)


def test_wrong_matrix_shape(tmp_path, capsys):
    (tmp_path / "H.json").write_text(json.dumps({"n": 3, "re": [[1]], "im": [[0]]}))
    assert run(tmp_path, "transform", "--input", str(tmp_path / "H.json"), "--blocks", "0;1;2") == 2


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        run_experiment(["--help"])
    out = capsys.readouterr().out
    assert all(cmd in out for cmd in ("transform", "series", "sweep"))
