import pytest

from basin_atlas.config import (PipelineConfig, dump_config, load_config, parse_config,
                                preset_text)
from basin_atlas.dynamics import ModelParams
from basin_atlas.errors import ConfigError

MINIMAL = """
model.p = 1
model.q = 2
model.r = 2
model.a = 5
model.b = 4
model.c = 3
model.e = 7
model.f = 7
model.g = 10
model.u = 3
model.v = 2
model.w = 1
grid.n = 15
grid.gamma = 6
"""


def test_preset_values():
    cfg = load_config("paper.cfg")
    assert isinstance(cfg, PipelineConfig)
    assert cfg.params == ModelParams.default()
    assert (cfg.grid.n, cfg.grid.gamma) == (15, 6.0)
    assert cfg.bisection_tol == 1e-4
    assert cfg.integrator.rtol == 1e-8 and cfg.integrator.atol == 1e-10
    assert cfg.integrator.capture_radius == 1e-2 and cfg.integrator.t_max == 1000
    assert cfg.kernel.family == "WendlandC6" and cfg.kernel.epsilon == 0.001
    assert cfg.trunc_tol == 1e-14
    assert cfg.cover.preset == "paper-d4"
    assert cfg.mesh_resolution == 40


def test_minimal_file_uses_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.kernel.family == "WendlandC6" and cfg.kernel.epsilon == 1.0
    assert cfg.cover.counts == (4, 4, 4) and cfg.cover.preset is None
    assert cfg.delta is None and cfg.normal_k == 12


def test_empty_file_lists_required_fields():
    with pytest.raises(ConfigError) as exc:
        parse_config("")
    msg = str(exc.value)
    for key in ("model.p", "model.w", "grid.n", "grid.gamma"):
        assert key in msg


def test_invalid_grid_n_names_the_key():
    with pytest.raises(ConfigError, match=r"grid\.n"):
        parse_config(MINIMAL.replace("grid.n = 15", "grid.n = 0"))


@pytest.mark.parametrize("bad, needle", [
    ("model.z = 1", "unknown key"),
    ("model.p = 2", "duplicate key"),
    ("kernel.family = Cubic", "kernel"),
    ("model.bogus", "expected"),
    ("integrator.rtol = -1", "integrator.rtol"),
    ("cover.counts = 1,2", "cover.counts"),
])
def test_errors_carry_line_numbers(bad, needle):
    text = MINIMAL + bad + "\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "x.cfg")
    assert needle in str(exc.value)
    if needle != "kernel":
        assert f"x.cfg:{len(text.splitlines())}" in str(exc.value)


def test_non_positive_model_rate():
    with pytest.raises(ConfigError, match=r"model\.a"):
        parse_config(MINIMAL.replace("model.a = 5", "model.a = 0"))


def test_gamma_beyond_state_bound():
    with pytest.raises(ConfigError, match="gamma"):
        parse_config(MINIMAL.replace("grid.gamma = 6", "grid.gamma = 7"))


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + MINIMAL.replace("grid.n = 15", "grid.n = 9  # trailing"))
    assert cfg.grid.n == 9


@pytest.mark.parametrize("text", [MINIMAL, None])
def test_dump_roundtrip(text):
    cfg = parse_config(text if text is not None else preset_text())
    again = parse_config(dump_config(cfg))
    assert again == cfg
    assert dump_config(again) == dump_config(cfg)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/none.cfg")
