import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ence.cli import main
from ence.states import make_named_state, parse_state, random_pe_state, write_state

MEASURE_KEYS = {"state", "dims", "map", "x", "side", "measure", "value", "spectrum_in", "spectrum_out"}
DETECT_KEYS = {"state", "dims", "threshold", "oracle", "witnesses", "measures", "verdict"}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def black_box(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "ence", *map(str, argv)], capture_output=True, text=True, env=env)


def test_gen_ps_roundtrip(tmp_path, capsys):
    path = tmp_path / "ps.dm"
    code, _, _ = run(capsys, "gen", "--state", "ps", "--p", 0.5, "--out", path)
    assert code == 0
    text = path.read_text()
    assert text.splitlines()[0] == "dims: 2 2"
    np.testing.assert_allclose(parse_state(text).matrix, make_named_state("pseudo_entangled", p=0.5).matrix, atol=0)


def test_gen_reemit_is_bitwise_identical(tmp_path, capsys):
    for name in ("ps", "zero-plus", "tripartite-cex", "random"):
        path = tmp_path / f"{name}.dm"
        extra = ["--dims", "2", "3", "--seed", "5"] if name == "random" else []
        assert run(capsys, "gen", "--state", name, "--out", path, *extra)[0] == 0
        text = path.read_text()
        again = tmp_path / "again.dm"
        write_state(parse_state(text), again)
        assert again.read_text() == text


def test_gen_zero_plus_and_tripartite(tmp_path, capsys):
    z = tmp_path / "z.dm"
    run(capsys, "gen", "--state", "zero-plus", "--out", z)
    np.testing.assert_allclose(parse_state(z.read_text()).spectrum().values, [0.75, 0.25, 0, 0], atol=1e-15)
    t = tmp_path / "t.dm"
    run(capsys, "gen", "--state", "tripartite-cex", "--out", t)
    assert t.read_text().splitlines()[0] == "dims: 2 2 2"


def test_gen_to_stdout(capsys):
    code, out, _ = run(capsys, "gen", "--state", "bell")
    assert code == 0 and out.startswith("dims: 2 2\n")


def test_measure_bell_qtilde(capsys):
    rec = run_json(capsys, "measure", "--state", "bell", "--map", "transpose", "--measure", "qtilde")
    assert set(rec) == MEASURE_KEYS
    assert rec["value"] == pytest.approx(1.0, abs=1e-9)
    assert rec["side"] == "average" and rec["measure"] == "Q_tilde"


def test_measure_zero_plus_power_qtilde_value(capsys):
    rec = run_json(capsys, "measure", "--state", "zero-plus", "--map", "power", "--x", 2, "--measure", "qtilde")
    assert rec["x"] == 2.0
    assert rec["value"] == pytest.approx(3.50088910124e-3, abs=1e-12)


def test_measure_d_from_file(tmp_path, capsys):
    path = tmp_path / "ps.dm"
    run(capsys, "gen", "--state", "ps", "--p", 0.5, "--out", path)
    rec = run_json(capsys, "measure", "--in", path, "--map", "transpose", "--measure", "d", "--side", "right")
    assert rec["value"] == pytest.approx(1.0, abs=1e-9)
    assert rec["state"] == str(path)
    assert rec["spectrum_out"] == pytest.approx([0.375, 0.375, 0.375, -0.125], abs=1e-12)


def test_measure_is_deterministic(capsys):
    a = run(capsys, "measure", "--state", "random", "--dims", 2, 3, "--seed", 4, "--map", "power")[1]
    b = run(capsys, "measure", "--state", "random", "--dims", 2, 3, "--seed", 4, "--map", "power")[1]
    assert a == b


def test_measure_weighted_and_split(capsys):
    rec = run_json(capsys, "measure", "--state", "bell", "--measure", "weighted")
    assert set(rec) == MEASURE_KEYS
    assert rec["value"] == pytest.approx(1.0, abs=1e-9)
    rec = run_json(capsys, "measure", "--state", "zero-plus", "--measure", "weighted", "--weights", 1, 2, 1, "--xs", 2, 3)
    assert rec["value"] > 1e-7


def test_measure_multipartite_needs_split(tmp_path, capsys):
    code, _, err = run(capsys, "measure", "--state", "tripartite-cex")
    assert code == 1 and "--split" in err
    rec = run_json(capsys, "measure", "--state", "tripartite-cex", "--split", "0|1,2", "--measure", "qtilde")
    assert rec["value"] == pytest.approx(0, abs=1e-9)


def _csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_sweep_p(capsys):
    code, out, _ = run(capsys, "sweep", "--state", "ps", "--var", "p", "--start", 0.1, "--stop", 1.0, "--step", 0.1)
    assert code == 0
    rows = _csv(out)
    assert rows[0] == ["param", "value_D", "value_Q_R", "value_Q_L", "value_Qtilde"]
    assert len(rows) == 11
    for row in rows[1:]:
        p, d = float(row[0]), float(row[1])
        assert d == pytest.approx(2 * p, abs=1e-9)
    assert float(rows[-1][0]) == 1.0 and float(rows[-1][4]) == pytest.approx(1.0, abs=1e-9)
    # 17 significant digits
    assert rows[1][0] == f"{0.1:.17g}"


def test_sweep_x_on_pe_file(tmp_path, capsys):
    path = tmp_path / "pe.dm"
    write_state(random_pe_state(2, 3, 10), path)
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--in", path, "--map", "power", "--var", "x", "--start", 2, "--stop", 4, "--step", 1, "--out", out_path)
    assert code == 0
    rows = _csv(out_path.read_text())
    assert [float(r[0]) for r in rows[1:]] == [2.0, 3.0, 4.0]
    for r in rows[1:]:
        assert all(abs(float(v)) <= 1e-9 for v in r[1:])


def test_detect_zero_plus(capsys):
    rec = run_json(capsys, "detect", "--state", "zero-plus")
    assert set(rec) == DETECT_KEYS
    assert rec["oracle"] == "NoPE" and rec["verdict"] == "nonclassical"


def test_detect_random_pe_file(tmp_path, capsys):
    path = tmp_path / "pe.dm"
    write_state(random_pe_state(3, 2, 1, nondegenerate=True), path)
    rec = run_json(capsys, "detect", "--in", path)
    assert rec["oracle"] == "HasPE" and rec["verdict"] == "classical"
    for row in rec["measures"]:
        assert all(row[k] <= 1e-9 for k in ("D_R", "D_L", "Q_R", "Q_L", "Q_tilde"))


def test_detect_one_way_cc(capsys):
    rec = run_json(capsys, "detect", "--state", "one-way-cc")
    t = next(r for r in rec["measures"] if r["map"] == "transpose")
    assert t["D_R"] <= 1e-9 and t["D_L"] <= 1e-9
    p = next(r for r in rec["measures"] if r["map"] == "power")
    assert p["D_R"] > 1e-7
    assert rec["oracle"] == "NoPE" and rec["verdict"] == "nonclassical"


def test_detect_undetected_and_tolerance(capsys, monkeypatch):
    rec = run_json(capsys, "detect", "--state", "classical-cc")
    assert rec["oracle"] == "Indeterminate" and rec["verdict"] == "undetected"
    monkeypatch.setenv("ENCE_TOL", "0.5")
    assert run_json(capsys, "detect", "--state", "bell")["threshold"] == 0.5
    assert run_json(capsys, "detect", "--state", "bell", "--tol", 0.25)["threshold"] == 0.25


def test_splittings(capsys, tmp_path):
    rec = run_json(capsys, "splittings", "--state", "tripartite-cex")
    rows = {r["splitting"]: r["value"] for r in rec["rows"]}
    assert rows["A|BC"] == pytest.approx(0, abs=1e-9) and rows["AB|C"] == pytest.approx(0, abs=1e-9)
    assert {"min", "max", "avg"} <= set(rec)
    rec = run_json(capsys, "splittings", "--state", "random-fully-product", "--dims", 2, 2, 2)
    assert all(abs(r["value"]) <= 1e-9 for r in rec["rows"])
    rec = run_json(capsys, "splittings", "--state", "random", "--dims", 2, 2, 2, 2, "--map", "power")
    assert len(rec["rows"]) == 7


@pytest.mark.parametrize(
    "argv,code",
    [
        (["measure", "--state", "ps", "--map", "power", "--x", "1"], 1),
        (["measure", "--state", "bell", "--in", "x.dm"], 1),
        (["measure"], 1),
        (["measure", "--in", "/nonexistent/state.dm"], 4),
    ],
)
def test_exit_codes_black_box(argv, code):
    assert black_box(*argv).returncode == code


def test_malformed_file_exit_2(tmp_path):
    bad = tmp_path / "bad.dm"
    bad.write_text("dims: 2 2\n1 0 0 0\n")
    assert black_box("measure", "--in", bad).returncode == 2
    nonunit = tmp_path / "trace.dm"
    nonunit.write_text("dims: 2\n0.5 0 0 0\n0 0 0.2 0\n")
    r = black_box("measure", "--in", nonunit)
    assert r.returncode == 2 and "TraceNotOne" in r.stderr
