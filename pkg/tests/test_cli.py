import csv
import json

import numpy as np
import pytest

from hpcalc.cli import main, parse_space
from hpcalc.errors import InputError
from hpcalc.spaces import MatrixOperator, SpaceDescriptor, dump_matrix


@pytest.fixture
def diag12(tmp_path):
    path = tmp_path / "A.json"
    dump_matrix(MatrixOperator(np.diag([1.0, 2.0]), SpaceDescriptor.hilbert(2)), path)
    return path


def _load(path):
    return json.loads(path.read_text())


def test_spectral_bounds_diag(diag12, tmp_path):
    out = tmp_path / "bounds.json"
    assert main(["spectral-bounds", "--matrix", str(diag12), "--out", str(out), "--samples", "1000"]) == 0
    d = _load(out)
    for k in ("omega", "s0", "omegaGamma", "s0Gamma"):
        assert d["result"][k]["value"] == pytest.approx(1.0, abs=1e-12)
        assert d["result"][k]["method"]
    assert d["seed"] == 0 and d["config"]["samples"] == 1000


def test_reproduce_nogtype_csv_row(tmp_path):
    out = tmp_path / "nog.json"
    assert main(["reproduce", "nogtype", "--n", "16", "--p", "4", "--out", str(out), "--samples", "1000"]) == 0
    rows = list(csv.reader((tmp_path / "nog.csv").open()))
    assert rows[0] == ["n", "shifted", "unshifted"]
    n, a, b = rows[1]
    assert int(n) == 16 and float(a) == pytest.approx(1.0, abs=1e-12) and float(b) == pytest.approx(2.0, abs=1e-12)
    assert (tmp_path / "nog.png").exists()


def test_no_plot(tmp_path):
    out = tmp_path / "nog.json"
    assert main(["reproduce", "nogtype", "--n", "4", "--p", "4/3", "--out", str(out), "--no-plot",
                 "--samples", "1000"]) == 0
    assert (tmp_path / "nog.csv").exists() and not (tmp_path / "nog.png").exists()


def test_missing_file_is_input_error(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["gfs-check", "--matrix", str(tmp_path / "nope.json"), "--out", str(out)]) == 1
    assert _load(out)["error"]["code"] == "E_INPUT"
    assert "E_INPUT" in capsys.readouterr().err


def test_bad_arguments_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["gfs-check", "--bogus"])
    assert exc.value.code == 1


def test_violated_exit_2(diag12, tmp_path):
    out = tmp_path / "g.json"
    assert main(["gamma-bound", "--matrix", str(diag12), "--omega", "1.5", "--samples", "1000",
                 "--out", str(out)]) == 2
    assert _load(out)["result"]["verdict"] == "violatedWithWitness"


def test_gfs_check_with_store(diag12, tmp_path):
    out, store = tmp_path / "g.json", tmp_path / "w.jsonl"
    args = ["gfs-check", "--matrix", str(diag12), "--omega", "1", "--m", "1", "--budget", "10",
            "--out", str(out), "--witness-store", str(store)]
    assert main(args) == 0
    first = _load(out)["result"]["constantLowerBound"]
    assert first == pytest.approx(np.pi, rel=1e-6)
    assert len(store.read_text().splitlines()) == 1
    assert (tmp_path / "g.csv").exists()


def test_rerun_is_bit_identical(diag12, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["wgfs-check", "--matrix", str(diag12), "--budget", "4", "--samples", "1000", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    ra, rb = _load(a)["result"], _load(b)["result"]
    assert ra == rb


def test_funcalc_and_resolvent(diag12, tmp_path):
    out = tmp_path / "f.json"
    fn = '{"variant": "Rational", "numerator": [1], "denominator": [1, 1]}'
    assert main(["funcalc", "--matrix", str(diag12), "--function", fn, "--out", str(out)]) == 0
    res = np.array(_load(out)["result"]["result"])
    assert np.allclose(res[..., 0], np.diag([0.5, 1 / 3]), atol=1e-8)
    out = tmp_path / "r.json"
    assert main(["resolvent", "--matrix", str(diag12), "--z", "0", "--out", str(out)]) == 0
    assert _load(out)["result"]["norm"] == pytest.approx(1.0)


def test_other_conditions(diag12, tmp_path):
    for cmd in (["calc-constant", "--m", "1"], ["square-function", "--budget", "5"]):
        out = tmp_path / f"{cmd[0]}.json"
        assert main([cmd[0], "--matrix", str(diag12), *cmd[1:], "--out", str(out)]) == 0
        assert _load(out)["result"]["verdict"] == "consistent"


def test_reproduce_others(tmp_path):
    for case, extra in (("multiplier", ["--xi", "1,2,5", "--base", "hilbert:4", "--t", "0,1"]),
                        ("sectorial", ["--d", "1,2+1j", "--budget", "2"]),
                        ("laplace", ["--t", "0,1"])):
        out = tmp_path / f"{case}.json"
        assert main(["reproduce", case, *extra, "--samples", "1000", "--out", str(out)]) == 0
        assert (tmp_path / f"{case}.csv").exists()


def test_parse_space():
    assert parse_space("hilbert:3") == SpaceDescriptor.hilbert(3)
    assert parse_space("seq:4:3") == SpaceDescriptor.seq_lattice(4, 3.0)
    assert parse_space("func:0:0.5:4:2") == SpaceDescriptor.func_lattice(0.0, 0.5, 4, 2.0)
    with pytest.raises(InputError):
        parse_space("banach:3")
