import hashlib
import json
import subprocess
import sys

import pytest

from sqrtcorr.cli import run


def read_csv(path):
    lines = path.read_text().split("\n")
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    return meta, header, rows


def test_gen_writes_sequence(tmp_path):
    out = tmp_path / "d"
    assert run(["gen", "--t", "2000", "--out", str(out) + "/"]) == 0
    text = (out / "sequence.txt").read_text()
    lines = text.splitlines()
    assert lines[0] == "# T=2000 c=0.0 N=1956"
    assert len(lines) - 1 == 1956
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"]["sequence.txt"] == hashlib.sha256(text.encode()).hexdigest()
    assert manifest["command"] == "gen" and manifest["params"]["t"] == 2000


def test_gen_to_file(tmp_path):
    path = tmp_path / "seq.txt"
    assert run(["gen", "--t", "10", "--alpha", "0.3333333333333333", "--out", str(path)]) == 0
    assert len(path.read_text().splitlines()) == 11
    assert (tmp_path / "seq.txt.manifest.json").exists()


def test_domain_error_exit(tmp_path, capsys):
    assert run(["gen", "--t", "0", "--out", str(tmp_path) + "/"]) == 2
    assert run(["gen", "--t", "10", "--c", "1.5", "--out", str(tmp_path) + "/"]) == 2
    assert "c must lie" in capsys.readouterr().err


def test_unknown_flag_exit(tmp_path, capsys):
    assert run(["gaps", "--t", "100", "--bogus", "--out", str(tmp_path)]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_command_exit(capsys):
    assert run(["nonsense"]) == 2


def test_gauss_check(tmp_path):
    assert run(["gauss-check", "--c-max", "50", "--n-max", "99", "--out", str(tmp_path)]) == 0
    meta, header, rows = read_csv(tmp_path / "gauss_check.csv")
    assert header == ["c", "n", "abs_error"]
    assert meta["max_abs_error"] < 1e-9
    assert len(rows) > 1000


def test_gauss_check_fails_with_impossible_tolerance(tmp_path):
    assert run(["gauss-check", "--c-max", "20", "--n-max", "9", "--tol", "0", "--out", str(tmp_path)]) == 3


def test_lemma_check(tmp_path):
    assert run(["lemma-check", "--out", str(tmp_path)]) == 0
    _, header, rows = read_csv(tmp_path / "lemma_check.csv")
    assert header[:3] == ["D", "T", "S"] and len(rows) == 80


def test_siegel_check(tmp_path):
    code = run(["siegel-check", "--samples", "20000", "--seed", "4", "--out", str(tmp_path)])
    meta, header, rows = read_csv(tmp_path / "siegel.csv")
    assert meta["seed"] == 4
    assert header == ["quantity", "estimate", "jackknife_se", "target", "z"]
    assert [r[0] for r in rows] == ["second_moment", "cross_moment"]
    assert [float(r[3]) for r in rows] == [2.0, 1.5]
    worst = max(abs(float(r[4])) for r in rows)
    assert code == (3 if worst > 3.0 else 0)
    assert run(["siegel-check", "--samples", "2000", "--z-max", "0", "--out", str(tmp_path)]) == 3


@pytest.mark.property
def test_reproducible_bytes(tmp_path):
    args = ["lattice-sim", "--samples", "5000", "--seed", "12", "--box", "[[0,1],[0.5,2]]"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "lattice_sim.csv").read_bytes()
    assert a == (tmp_path / "b" / "lattice_sim.csv").read_bytes()
    assert b"\r" not in a
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    assert ma == mb


def test_threads_do_not_change_output(tmp_path):
    args = ["lattice-sim", "--samples", "40000", "--seed", "3"]
    assert run(args + ["--threads", "1", "--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--threads", "2", "--out", str(tmp_path / "b")]) == 0
    _, _, ra = read_csv(tmp_path / "a" / "lattice_sim.csv")
    _, _, rb = read_csv(tmp_path / "b" / "lattice_sim.csv")
    assert ra == rb


@pytest.mark.property
@pytest.mark.parametrize(
    "args,name",
    [
        (["gaps", "--t", "5000"], "gaps.csv"),
        (["paircorr", "--t", "5000", "--profile-bins", "4"], "paircorr.csv"),
        (["countdist", "--t", "5000", "--box", "[[0,1],[0,2]]"], "countdist.csv"),
        (["moments", "--t", "5000", "--K", "3", "--s", "2"], "moments.csv"),
        (["escape-mass", "--r-sweep", "4,16", "--v", "1e-3"], "escape_mass.csv"),
    ],
)
def test_csv_header_carries_manifest(tmp_path, args, name):
    assert run(args + ["--out", str(tmp_path)]) == 0
    meta, _, rows = read_csv(tmp_path / name)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("command", "params", "seed", "version"):
        assert meta[key] == manifest[key]
    assert name in manifest["outputs"]
    assert rows


def test_moments_values(tmp_path):
    assert run(["moments", "--t", "5000", "--s", "0", "--out", str(tmp_path)]) == 0
    _, _, rows = read_csv(tmp_path / "moments.csv")
    assert float(rows[0][1]) == 1.0


def test_figures(tmp_path):
    assert run(["figures", "--t", "20000", "--out", str(tmp_path)]) == 0
    for name in ("fig1_gaps_cuberoot.csv", "fig2_gaps_sqrt.csv", "fig3_paircorr_sqrt.csv"):
        _, header, rows = read_csv(tmp_path / name)
        assert header[0] == "s" and rows


def test_env_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv("SQRTCORR_OUT", str(tmp_path / "env"))
    assert run(["gaps", "--t", "500"]) == 0
    assert (tmp_path / "env" / "gaps.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sqrtcorr.cli", "gauss-check", "--c-max", "5", "--n-max", "9", "--out", str(tmp_path)],
        capture_output=True,
    )
    assert proc.returncode == 0
