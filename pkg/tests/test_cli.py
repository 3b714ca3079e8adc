import json
import math

import pytest

from qpwind import cli
from qpwind.model import GOLDEN_ALPHA


def run(tmp_path, *argv):
    out = tmp_path / "out.txt"
    rc = cli.main([*argv, "--out", str(out)])
    return rc, (out.read_text() if out.exists() else "")


def test_parse_alpha():
    assert cli.parse_alpha("golden") == GOLDEN_ALPHA
    assert cli.parse_alpha("1/3") == pytest.approx(2 * math.pi / 3)
    assert cli.parse_alpha("0.25") == 0.25
    with pytest.raises(cli.UsageError):
        cli.parse_alpha("inf")


def test_parse_complex():
    assert cli.parse_complex("2+2j") == 2 + 2j
    assert cli.parse_complex("2+2i") == 2 + 2j
    assert cli.parse_complex([1, -1]) == 1 - 1j
    with pytest.raises(cli.UsageError):
        cli.parse_complex("abc")


def test_le_free_csv(tmp_path):
    rc, text = run(tmp_path, "le", "--free", "--E", "3", "--ys", "0,0.5,1")
    assert rc == 0
    lines = text.splitlines()
    assert lines[0].startswith("# version=") and "alpha=" in lines[0] and "tol=" in lines[0]
    assert lines[1] == "y,L,est_error"
    vals = [float(ln.split(",")[1]) for ln in lines[2:]]
    assert len(vals) == 3
    assert all(abs(v - math.log((3 + math.sqrt(5)) / 2)) < 1e-3 for v in vals)


def test_csv_is_deterministic(tmp_path):
    a = run(tmp_path, "winding", "--E", "3.5", "--n", "50", "--ys", "0.5,2.3")[1]
    b = run(tmp_path, "winding", "--E", "3.5", "--n", "50", "--ys", "0.5,2.3")[1]
    assert a == b
    rows = a.splitlines()[2:]
    assert [r.split(",")[1] for r in rows] == ["0", "1"]


def test_seventeen_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(True) == "1" and cli.fmt(3) == "3"


def test_accel_free_json(tmp_path):
    rc, text = run(tmp_path, "accel", "--free", "--E", "3.5", "--workers", "1")
    assert rc == 0
    doc = json.loads(text)
    assert doc["slopes"] == [0] and doc["breakpoints"] == []


def test_accel_exit_code_on_bad_profile(tmp_path):
    prof = tmp_path / "p.csv"
    prof.write_text("# synthetic\ny,L\n" + "".join(f"{i / 10},{0.5 * i / 10}\n" for i in range(11)))
    rc, _ = run(tmp_path, "accel", "--profile", str(prof))
    assert rc == cli.EXIT_QUANT


def test_winding_contour_zero_exit(tmp_path, capsys):
    import numpy as np

    t = np.roots([1, -7.0, 1])
    y = -math.log(abs(t[0]))
    rc, _ = run(tmp_path, "winding", "--alpha", "0", "--n", "1", "--y", repr(y))
    assert rc == cli.EXIT_CONTOUR
    assert "y=" in capsys.readouterr().err


def test_le_nonconvergence_exit(tmp_path):
    rc, _ = run(tmp_path, "le", "--E", "0", "--tol", "1e-15", "--y", "0")
    assert rc == cli.EXIT_LE


def test_zeros_outputs(tmp_path):
    js = tmp_path / "z.json"
    rc, text = run(tmp_path, "zeros", "--n", "20", "--json-out", str(js), "--workers", "1")
    assert rc == 0
    assert text.splitlines()[1] == "re,im,neg_log_abs,assigned_gamma"
    assert len(text.splitlines()) == 2 + 40
    doc = json.loads(js.read_text())
    assert doc["converged"] and doc["symmetric"]


def test_dos_thouless_accden_ldt(tmp_path):
    assert run(tmp_path, "dos", "--n", "8", "--S", "2")[1].count("\n") == 2 + 16
    rc, text = run(tmp_path, "thouless", "--free", "--n", "50", "--S", "1")
    assert rc == 0 and "assumption=" in text.splitlines()[0]
    rc, text = run(tmp_path, "accden", "--y", "1.0", "--n", "32", "--S", "8")
    assert rc == 0 and json.loads(text)["residual"] < 0.2
    rc, text = run(tmp_path, "ldt", "--ns", "100,200", "--epsilon", "0.1", "--M", "64")
    assert rc == 0 and text.splitlines()[1] == "n,deviation_fraction"


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"potential": {"coeffs": []}, "E": 3, "y_grid": [0.0]}))
    rc, text = run(tmp_path, "le", "--config", str(cfg))
    assert rc == 0 and "potential=[]" in text
    rc, text = run(tmp_path, "le", "--config", str(cfg), "--amo", "0.5", "--E", "0")
    assert rc == 0 and "potential=[[-1" in text


@pytest.mark.parametrize("argv", [
    ["le", "--config", "/nonexistent/config.json"],
    ["verify", "--config", "/nonexistent/config.json"],
    ["le", "--y-range", "1", "0", "5"],
    ["le", "--n", "0"],
    ["le", "--E", "nope"],
    ["frobnicate"],
])
def test_usage_errors(tmp_path, argv):
    assert run(tmp_path, *argv)[0] == cli.EXIT_USAGE


def test_config_error_has_line(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n  "E": 3,\n  "n": -4\n}\n')
    assert run(tmp_path, "le", "--config", str(cfg))[0] == cli.EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_verify_broken_tolerance(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"free_le": 1e-12}}))
    rc, text = run(tmp_path, "verify", "--only", "1", "--config", str(cfg))
    assert rc == cli.EXIT_FAILED
    assert json.loads(text)["passed"] is False


def test_verify_subset_passes(tmp_path):
    rc, text = run(tmp_path, "verify", "--only", "1,7")
    assert rc == 0 and [c["number"] for c in json.loads(text)["criteria"]] == [1, 7]


def test_verify_unknown_tolerance(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerances": {"nope": 1}}))
    assert run(tmp_path, "verify", "--config", str(cfg))[0] == cli.EXIT_USAGE
