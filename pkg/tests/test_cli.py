import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from carnotcurv.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path: Path, data) -> Path:
    path.write_text(json.dumps(data))
    return path


def test_validate_heis(capsys):
    code, out, _ = run(["validate", SPECS / "heis_c1.json"], capsys)
    report = json.loads(out)
    assert code == 0 and report["step"] == 2 and report["ok"]


def test_validate_jacobi_violation(tmp_path, capsys):
    data = json.loads((SPECS / "heis_c1.json").read_text())
    data["constants"].append([1, 3, 1, 0.1])
    code, out, _ = run(["validate", write(tmp_path / "bad.json", data)], capsys)
    report = json.loads(out)
    assert code == 2 and not report["ok"]
    assert [v[:3] for v in report["jacobi_violations"]] == [[1, 2, 3]]


def test_validate_truncated(tmp_path, capsys):
    path = tmp_path / "t.json"
    path.write_text((SPECS / "heis_c1.json").read_text()[:40])
    assert run(["validate", path], capsys)[0] == 1


def test_validate_missing_file(tmp_path, capsys):
    assert run(["validate", tmp_path / "nope.json"], capsys)[0] == 1


def test_catalog_roundtrip(tmp_path, capsys):
    out = tmp_path / "qu.json"
    assert run(["catalog", "heis", "--field", "QU", "--n", "1", "--out", out], capsys)[0] == 0
    assert out.read_text() == (SPECS / "heis_qu1.json").read_text()
    assert run(["catalog", "heis", "--field", "O", "--n", "2"], capsys)[0] == 2


def test_hmetric_bound(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert run(["hmetric", SPECS / "heis_qu1.json", "--out", out], capsys)[0] == 0
    data = json.loads(out.read_text())
    assert data["report"]["gromov"]["certified_upper"] <= 1 / 40
    tight = tmp_path / "t.json"
    run(["hmetric", SPECS / "heis_qu1.json", "--eps", "0.001", "--out", tight], capsys)
    assert json.loads(tight.read_text())["report"]["gromov"]["certified_upper"] <= 0.001


def test_hmetric_abelian_identity(tmp_path, capsys):
    out = tmp_path / "m.json"
    run(["hmetric", SPECS / "abelian3.json", "--out", out], capsys)
    np.testing.assert_array_equal(json.loads(out.read_text())["gram"], np.eye(4))


def test_pinch_heis_c2(tmp_path, capsys):
    metric = tmp_path / "m.json"
    run(["hmetric", SPECS / "heis_c2.json", "--out", metric], capsys)
    args = ["pinch", SPECS / "heis_c2.json", metric, "--samples", "100000", "--seed", "42"]
    code, first, _ = run(args, capsys)
    report = json.loads(first)
    assert code == 0
    assert report["min_K"] >= -4 - 1e-6 and report["max_K"] <= -1 + 1e-6
    assert set(report) >= {"min_K", "max_K", "vertical", "census", "samples", "seed"}
    # byte-identical on repeat
    assert run(args, capsys)[1] == first


def test_pinch_sc3(tmp_path, capsys):
    metric = tmp_path / "m.json"
    run(["hmetric", SPECS / "sc3.json", "--out", metric], capsys)
    code, out, _ = run(["pinch", SPECS / "sc3.json", metric, "--samples", "20000"], capsys)
    report = json.loads(out)
    assert code == 0 and report["min_K"] >= -9 - 1e-6 and report["max_K"] <= -1 + 1e-6


def test_pinch_wolf_not_pinched(tmp_path, capsys):
    metric = write(tmp_path / "id.json", {"gram": np.eye(3).tolist()})
    code, out, _ = run(["pinch", SPECS / "heis_c1.json", metric], capsys)
    census = json.loads(out)["census"]
    assert code == 3 and census["pos"] > 0 and census["neg"] > 0 and census["zero"] > 0


def test_pinch_csv(tmp_path, capsys):
    metric = write(tmp_path / "id.json", {"gram": np.eye(4).tolist()})
    rows = tmp_path / "rows.csv"
    run(["pinch", SPECS / "heis_c1.json", metric, "--samples", "50", "--csv", rows], capsys)
    assert len(rows.read_text().strip().splitlines()) == 51


def test_pinch_bad_metric(tmp_path, capsys):
    metric = write(tmp_path / "neg.json", {"gram": np.diag([1.0, -1.0, 1.0]).tolist()})
    assert run(["pinch", SPECS / "heis_c1.json", metric], capsys)[0] == 2
    metric = write(tmp_path / "wrong.json", {"gram": np.eye(7).tolist()})
    assert run(["pinch", SPECS / "heis_c1.json", metric], capsys)[0] == 2


def test_curvature_plane(tmp_path, capsys):
    metric = write(tmp_path / "id.json", {"gram": np.eye(3).tolist()})
    code, out, _ = run(["curvature", SPECS / "heis_c1.json", metric, "--plane", "1,2"], capsys)
    assert code == 0 and json.loads(out)["K"] == pytest.approx(-0.75, abs=1e-15)
    code, _, _ = run(["curvature", SPECS / "heis_c1.json", metric, "--u", "1,0,0", "--v", "2,0,0"], capsys)
    assert code == 2
    assert run(["curvature", SPECS / "heis_c1.json", metric, "--plane", "1,9"], capsys)[0] == 2


def test_chart_bergman_printed_forms_report_mismatch(capsys):
    # the printed tensor and printed formulas disagree by a factor 4
    code, out, _ = run(["chart", "bergman", "--tol", "1e-5"], capsys)
    assert code == 3 and json.loads(out)["max_deviation"] > 1


def test_chart_bergman_normalized(capsys):
    code, out, _ = run(["chart", "bergman", "--scale", "0.25", "--forms", "corrected"], capsys)
    assert code == 0 and json.loads(out)["max_deviation"] <= 1e-5


def test_chart_bergman_boundary_point(tmp_path, capsys):
    pts = write(tmp_path / "p.json", [[0.0, 0.0, 0.0, 1.0]])
    assert run(["chart", "bergman", "--points", pts], capsys)[0] == 2


def test_chart_crosscheck(tmp_path, capsys):
    metric = tmp_path / "m.json"
    run(["hmetric", SPECS / "heis_c1.json", "--out", metric], capsys)
    code, out, _ = run(["chart", "crosscheck", SPECS / "heis_c1.json", metric], capsys)
    assert code == 0 and json.loads(out)["max_deviation"] < 1e-4


@pytest.mark.skipif(shutil.which("carnot") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["carnot", "validate", str(SPECS / "sc3.json")], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["step"] == 3
