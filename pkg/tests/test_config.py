from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spincool.config import StageSpec, parse_config, render_config
from spincool.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL = """
omega = 1200
g0 = 10
g = 10
N = 4
[stage]
epsilon = 1.1
n_pulses = 120
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.mode == "cool"
    assert cfg.dim == 100 and cfg.n_occ == 45 and cfg.eta == 0
    assert cfg.stages == (StageSpec(1.1, 120, 1),)


def test_fig2b_config():
    cfg = parse_config((CONFIGS / "fig2b.cfg").read_text())
    assert cfg.n_spins == 14
    assert cfg.stages[0] == StageSpec(1.16, 120, 100)


def test_all_bundled_configs_parse():
    for path in CONFIGS.glob("*.cfg"):
        cfg = parse_config(path.read_text())
        assert parse_config(render_config(cfg)) == cfg


def test_regime_violation():
    with pytest.raises(ConfigError, match="eps/omega << 1") as exc:
        parse_config(MINIMAL.replace("epsilon = 1.1", "epsilon = 600"))
    assert exc.value.key == "epsilon" and exc.value.line == 7


@pytest.mark.parametrize("text, key, line", [
    (MINIMAL + "colour = red\n", "colour", 9),
    (MINIMAL.replace("N = 4", "N = four"), "N", 5),
    (MINIMAL.replace("N = 4", "N = 2.5"), "N", 5),
    (MINIMAL.replace("g0 = 10", "g0 = -1"), "g0", 3),
    (MINIMAL.replace("g = 10", "g = 1, 2"), "g", 4),
    (MINIMAL + "eta = 0.7\n", None, None),
    (MINIMAL.replace("N = 4\n", "N = 4\ndim = 1\n"), "dim", 6),
    (MINIMAL.replace("omega = 1200\n", ""), "omega", None),
])
def test_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    if key is not None:
        assert exc.value.key == key
        assert exc.value.line == line


def test_eta_in_stage_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(MINIMAL + "eta = 0.1\n")


def test_structure_errors():
    with pytest.raises(ConfigError, match="section"):
        parse_config(MINIMAL + "[gkp]\n[gkp]\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "[extra]\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config(MINIMAL + "just words\n")
    with pytest.raises(ConfigError, match="stage"):
        parse_config("omega = 1\ng0 = 0.01\ng = 0.01\nN = 1\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "n_pulses = 3\n")


def test_seed_required():
    text = MINIMAL.replace("N = 4", "N = 4\ncoupling_std = 5")
    with pytest.raises(ConfigError, match="seed"):
        parse_config(text)
    assert parse_config(text, seed=3).seed == 3
    with pytest.raises(ConfigError, match="seed"):
        parse_config(MINIMAL.replace("omega", "mode = gkp\nomega"))


def test_comments_and_lists():
    cfg = parse_config("# header\n" + MINIMAL.replace("g = 10", "g = 9, 10, 11, 12  # per spin"))
    assert cfg.g == (9.0, 10.0, 11.0, 12.0)


def test_sweep_axes():
    cfg = parse_config(MINIMAL.replace("omega", "mode = sweep\nomega") + "[sweep]\nepsilon = 0:2:0.1\nn_spins = 2, 4\n")
    assert cfg.sweep_axes == (("epsilon", "range", 0.0, 2.0, 0.1), ("n_spins", "values", 2.0, 4.0))
    with pytest.raises(ConfigError, match="step"):
        parse_config(MINIMAL + "[sweep]\nepsilon = 2:0:0.1\n")


def test_multiple_stages():
    cfg = parse_config(MINIMAL + "m_projections = 200\n[stage]\nepsilon = 5\nn_pulses = 120\nm_projections = 50\n")
    assert [s.epsilon for s in cfg.stages] == [1.1, 5.0]


@given(eps=st.floats(-100, 100, allow_nan=False), n=st.integers(0, 500), m=st.integers(0, 500),
       n_occ=st.floats(0, 100), eta=st.floats(0, 0.5), dim=st.integers(2, 300))
def test_render_roundtrip(eps, n, m, n_occ, eta, dim):
    text = (f"omega = 1200\ng0 = 10\ng = 10\nN = 3\nn_occ = {n_occ!r}\neta = {eta!r}\ndim = {dim}\n"
            f"[stage]\nepsilon = {eps!r}\nn_pulses = {n}\nm_projections = {m}\n")
    cfg = parse_config(text)
    assert parse_config(render_config(cfg)) == cfg
