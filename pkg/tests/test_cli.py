import json
import subprocess
import sys
from pathlib import Path

import pytest

from maplab.cli import main


def run_cli(args):
    return main(args)


def test_certify_cli(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run_cli(["certify", "--n", "2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["pass"] and report["n"] == 2


def test_sample_tree_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run_cli(["sample", "tree", "--n", "6", "--seed", "9", "--out", str(a)]) == 0
    assert run_cli(["sample", "tree", "--n", "6", "--seed", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_bundle(tmp_path):
    out = tmp_path / "inst.json"
    assert run_cli(
        ["sample", "tree", "--n", "4", "--seed", "1", "--format", "bundle", "--out", str(out)]
    ) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "maplab-bundle-v1"
    assert set(doc) >= {"tree", "quad", "map", "eps"}


def test_force_required_to_overwrite(tmp_path):
    out = tmp_path / "t.txt"
    assert run_cli(["sample", "tree", "--n", "3", "--seed", "2", "--out", str(out)]) == 0
    assert run_cli(["sample", "tree", "--n", "3", "--seed", "2", "--out", str(out)]) == 2
    assert (
        run_cli(["sample", "tree", "--n", "3", "--seed", "2", "--out", str(out), "--force"]) == 0
    )


def test_experiment_cli_deterministic_across_threads(tmp_path):
    base1, base2 = tmp_path / "r1", tmp_path / "r2"
    args = ["experiment", "reroot", "--n", "120", "--reps", "300", "--seed", "7"]
    assert run_cli(args + ["--out", str(base1), "--threads", "1"]) == 0
    assert run_cli(args + ["--out", str(base2), "--threads", "4"]) == 0
    assert (base1.with_suffix(".csv")).read_bytes() == (base2.with_suffix(".csv")).read_bytes()
    assert (base1.with_suffix(".json")).read_bytes() == (base2.with_suffix(".json")).read_bytes()


def test_experiment_grid_cli(tmp_path):
    base = tmp_path / "tv"
    code = run_cli(
        ["experiment", "tv", "--n-grid", "50,200", "--reps", "400", "--seed", "3", "--out", str(base)]
    )
    assert code == 0
    header = base.with_suffix(".csv").read_text().splitlines()[0]
    assert header == "n,rep,tv_term"
    summary = json.loads(base.with_suffix(".json").read_text())
    assert summary["experiment"] == "tv"
    assert "runtime" not in summary  # outputs carry no wall-clock noise


def test_enumerate_cli(capsys):
    assert run_cli(["enumerate", "trees", "--n", "3"]) == 0
    assert capsys.readouterr().out.strip() == "135"


def test_convert_roundtrip(tmp_path):
    # identity as rooted maps; the inverse assembles fresh dart ids
    from maplab.core_map import canonical_form, read_map_text

    src = tmp_path / "map.txt"
    quad = tmp_path / "quad.txt"
    back = tmp_path / "back.txt"
    assert run_cli(["sample", "map", "--n", "5", "--seed", "21", "--out", str(src)]) == 0
    assert run_cli(["convert", "map-to-quad", "--in", str(src), "--out", str(quad)]) == 0
    assert run_cli(["convert", "quad-to-map", "--in", str(quad), "--out", str(back)]) == 0
    m1, _ = read_map_text(src.read_text())
    m2, _ = read_map_text(back.read_text())
    assert canonical_form(m1) == canonical_form(m2)


def test_convert_dual_involution(tmp_path):
    src = tmp_path / "m.txt"
    d1 = tmp_path / "d1.txt"
    d2 = tmp_path / "d2.txt"
    assert run_cli(["sample", "map", "--n", "4", "--seed", "2", "--out", str(src)]) == 0
    assert run_cli(["convert", "dual", "--in", str(src), "--out", str(d1)]) == 0
    assert run_cli(["convert", "dual", "--in", str(d1), "--out", str(d2)]) == 0
    assert d2.read_bytes() == src.read_bytes()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "unknown-kind", "--reps", "1", "--seed", "1", "--out", "x"])
    assert exc.value.code == 2


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "maplab.cli", "enumerate", "trees", "--n", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "3"


def test_threads_env_fallback(monkeypatch):
    from maplab.cli import _default_threads

    monkeypatch.setenv("MAPLAB_THREADS", "3")
    assert _default_threads() == 3
    monkeypatch.setenv("MAPLAB_THREADS", "junk")
    assert _default_threads() == 1
    monkeypatch.delenv("MAPLAB_THREADS")
    assert _default_threads() == 1


def test_certify_failure_exit_code_and_bundle(monkeypatch, tmp_path):
    import maplab._fast as F

    monkeypatch.setattr(F, "SIMPLE_GREEN_POSITIONS", (0, 1))
    out = tmp_path / "report.json"
    code = main(["certify", "--n", "2", "--out", str(out), "--force"])
    assert code == 1
    report = json.loads(out.read_text())
    assert not report["pass"]
    assert Path(report["counterexample"]).exists()
