import csv
import json
import subprocess
import sys

import pytest

from twinsfg.config import parse_config

SMALL_GRID = "[grid]\nn_q = 257\nn_omega = 513\n"


def run_cli(*args, cwd=None):
    cmd = [sys.executable, "-m", "twinsfg", *args]
    return subprocess.run(cmd, capture_output=True, text=True, cwd=cwd)


def write_config(path, text):
    path.write_text(text)
    return str(path)


def test_help():
    cp = run_cli("--help")
    assert cp.returncode == 0
    assert "--grid-check" in cp.stdout


def test_fig2_defaults(tmp_path):
    out = tmp_path / "out"
    cp = run_cli("--scenario", "fig2", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    with open(out / "profile.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["delay_fs", "intensity", "intensity_normalized"]
    assert len(rows) - 1 == 241
    assert float(rows[1][0]) == -60.0 and float(rows[-1][0]) == 60.0
    assert max(float(r[2]) for r in rows[1:]) == 1.0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fwhm_fs"] == pytest.approx(6.2, abs=0.3)
    assert summary["grid_converged"] is None
    assert summary["fit"]["width_rad_per_s"] == pytest.approx(0.9e15, rel=0.05)
    echoed = (out / "effective_config.ini").read_text()
    assert parse_config(echoed) == parse_config("[scenario]\nname = fig2\n")


def test_nine_significant_digits(tmp_path):
    cfg = write_config(tmp_path / "run.ini", SMALL_GRID)
    cp = run_cli("--config", cfg, "--out", str(tmp_path / "o"))
    assert cp.returncode == 0, cp.stderr
    for line in (tmp_path / "o" / "profile.csv").read_text().splitlines()[1:]:
        for field in line.split(","):
            mantissa = field.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(mantissa) <= 9


def test_fig4_writes_one_profile_per_displacement(tmp_path):
    cfg = write_config(tmp_path / "run.ini", "[scenario]\nname = fig4\n" + SMALL_GRID)
    cp = run_cli("--config", cfg, "--out", str(tmp_path / "o"))
    assert cp.returncode == 0, cp.stderr
    names = sorted(p.name for p in (tmp_path / "o").glob("profile_*.csv"))
    assert names == ["profile_dz0um.csv", "profile_dz100um.csv", "profile_dz200um.csv", "profile_dz400um.csv"]
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    fwhm = [p["fwhm_fs"] for p in summary["profiles"]]
    assert fwhm == sorted(fwhm)


def test_sweep_with_pinhole(tmp_path):
    text = "[scenario]\nname = sweep\n[transfer]\ndefocus = 0 um\n[pinhole]\napply = yes\n" + SMALL_GRID
    cp = run_cli("--config", write_config(tmp_path / "run.ini", text), "--out", str(tmp_path / "o"))
    assert cp.returncode == 0, cp.stderr
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["profiles"][0]["fwhm_fs"] > 20


def test_grid_check_report(tmp_path):
    cfg = write_config(tmp_path / "run.ini", SMALL_GRID)
    cp = run_cli("--config", cfg, "--out", str(tmp_path / "o"), "--grid-check")
    assert cp.returncode == 0, cp.stderr
    assert "fft vs direct" in cp.stdout
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["grid_converged"] is True


def test_missing_unit_error_record(tmp_path):
    cfg = write_config(tmp_path / "bad.ini", "[transfer]\ndelay_step = 0.5\n")
    cp = run_cli("--config", cfg, "--out", str(tmp_path / "o"))
    assert cp.returncode == 2
    record = json.loads(cp.stderr.strip().splitlines()[-1])
    assert record["error"] == "UnitError"
    assert record["field"] == "transfer.delay_step"
    assert not (tmp_path / "o").exists()


def test_unknown_key_error_record(tmp_path):
    cfg = write_config(tmp_path / "bad.ini", "[transfer]\npinhole_radius = 2 mm\n")
    cp = run_cli("--config", cfg, "--out", str(tmp_path / "o"))
    assert cp.returncode == 2
    record = json.loads(cp.stderr.strip().splitlines()[-1])
    assert record["error"] == "UnknownKeyError"
    assert "pinhole" in record["message"]


def test_unwritable_output_leaves_no_partial_csv(tmp_path):
    out = tmp_path / "o"
    (out / "profile.csv").mkdir(parents=True)  # rename target is occupied by a directory
    cfg = write_config(tmp_path / "run.ini", SMALL_GRID)
    cp = run_cli("--config", cfg, "--out", str(out))
    assert cp.returncode == 1
    assert json.loads(cp.stderr.strip().splitlines()[-1])["error"] == "IOError"
    assert [p.name for p in out.iterdir()] == ["profile.csv"]
    assert (out / "profile.csv").is_dir()


def test_output_path_under_a_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write_config(tmp_path / "run.ini", SMALL_GRID)
    cp = run_cli("--config", cfg, "--out", str(blocker / "sub"))
    assert cp.returncode != 0
    assert "error" in json.loads(cp.stderr.strip().splitlines()[-1])
