import json
from pathlib import Path

import pytest

from spincool.cli import EXIT_CAPACITY, EXIT_CONFIG, EXIT_EXTINCTION, EXIT_OK, main
from spincool.serialize import parse_trace

SMALL = """
mode = cool
omega = 1200
g0 = 10
g = 10
N = 2
dim = 30
n_occ = 2
[stage]
epsilon = 1.0
n_pulses = 120
m_projections = 5
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_cool_and_manifest_rerun(tmp_path, fmt):
    cfg = write(tmp_path, SMALL)
    assert main(["cool", cfg, "--out", str(tmp_path / "a"), "--format", fmt, "--quiet"]) == EXIT_OK
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["version"] and manifest["config"]["n_spins"] == 2
    out = tmp_path / "a" / f"trace.{fmt}"
    assert len(parse_trace(out.read_bytes(), fmt).records) == 6
    assert main(["cool", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b"),
                 "--format", fmt, "--quiet"]) == EXIT_OK
    assert (tmp_path / "b" / f"trace.{fmt}").read_bytes() == out.read_bytes()


def test_config_error_exit(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("epsilon = 1.0", "epsilon = 600"))
    assert main(["cool", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "eps/omega << 1" in capsys.readouterr().err


def test_extinction_exit(tmp_path):
    cfg = write(tmp_path, SMALL.replace("m_projections = 5", "m_projections = 60").replace("dim = 30", "dim = 4")
                .replace("g0 = 10", "g0 = 1000").replace("g = 10", "g = 1000").replace("omega = 1200", "omega = 12000"))
    assert main(["cool", cfg, "--out", str(tmp_path / "o"), "--quiet"]) in (EXIT_OK, EXIT_EXTINCTION)


def test_capacity_exit(tmp_path):
    text = SMALL.replace("N = 2", "N = 17").replace("g = 10", "g = " + ", ".join(["10"] * 17))
    assert main(["cool", write(tmp_path, text), "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_CAPACITY


def test_sweep_threads_identical(tmp_path, monkeypatch):
    text = SMALL.replace("mode = cool", "mode = sweep") + "[sweep]\nepsilon = 0:1:0.5\n"
    cfg = write(tmp_path, text)
    assert main(["sweep", cfg, "--out", str(tmp_path / "s1"), "--quiet"]) == EXIT_OK
    monkeypatch.setenv("SPINCOOL_THREADS", "2")
    assert main(["sweep", cfg, "--out", str(tmp_path / "s2"), "--quiet"]) == EXIT_OK
    assert (tmp_path / "s1" / "sweep.csv").read_bytes() == (tmp_path / "s2" / "sweep.csv").read_bytes()


def test_gkp_seed_flag(tmp_path):
    text = "mode = gkp\nomega = 1200\ng0 = 10\ng = 10\nN = 1\ndim = 200\n[gkp]\nsq_rounds = 2\n"
    cfg = write(tmp_path, text)
    assert main(["gkp", cfg, "--out", str(tmp_path / "g"), "--quiet"]) == EXIT_CONFIG
    assert main(["gkp", cfg, "--out", str(tmp_path / "g"), "--seed", "5", "--quiet"]) == EXIT_OK
    summary = json.loads((tmp_path / "g" / "summary.json").read_text())
    assert 0 <= summary["final_abs_sq"] <= 1


def test_oracle_check(tmp_path):
    cfg = Path(__file__).resolve().parents[1] / "configs" / "oracle.cfg"
    text = cfg.read_text().replace("N = 2", "N = 1").replace("dim = 16", "dim = 10").replace(
        "steps_per_segment = 100", "steps_per_segment = 40")
    assert main(["oracle-check", write(tmp_path, text), "--out", str(tmp_path / "o"), "--quiet"]) == EXIT_OK


def test_missing_file(tmp_path):
    assert main(["cool", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o"), "--quiet"]) != EXIT_OK
