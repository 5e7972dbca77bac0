import pytest

from gensundman.config import Config, ConfigError, load_config, parse_config_text


def test_defaults_round_trip_through_text():
    cfg = Config()
    assert Config(**parse_config_text(cfg.to_text())) == cfg


def test_file_then_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sampling\nseed = 7\nsamples = 64\nh = 0.01\n")
    cfg = load_config(str(path), {"seed": 9, "samples": None}, environ={})
    assert (cfg.seed, cfg.samples, cfg.h) == (9, 64, 0.01)


def test_environment_variable_names_the_file(tmp_path):
    path = tmp_path / "env.cfg"
    path.write_text("reject = 1e-5\n")
    assert load_config(environ={"SUNDMAN_CONFIG": str(path)}).reject == 1e-5
    assert load_config(environ={}).reject == Config().reject


def test_zero_test_settings_follow_the_config():
    zc = Config(seed=3, y_min=-2.0, y_max=-1.0).zero_test()
    assert zc.seed == 3 and zc.box["y"] == (-2.0, -1.0)


@pytest.mark.parametrize(
    "text",
    ["x_min = 3\nx_max = 1\n", "eps_abs = 1e-3\n", "samples = 0\n", "format = xml\n", "colour = red\n", "seed = many\n", "just words\n"],
)
def test_bad_configs_are_rejected(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(str(path), environ={})


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.cfg", environ={})
