import pytest

from config.settings import (
    DEFAULT_CONFIG_PATH,
    Settings,
    apply_overrides,
    load_settings,
    parse_override_args,
    settings_from_dict,
)
from core.errors import ConfigError


def test_shipped_config_matches_defaults():
    assert DEFAULT_CONFIG_PATH.exists()
    assert load_settings() == Settings()


def test_missing_file_gives_defaults(tmp_path):
    assert load_settings(tmp_path / "nope.yaml") == Settings()


def test_partial_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("suite:\n  q_list: [1, 1.5]\n  master_seed: 3\n")
    settings = load_settings(path)
    assert settings.suite.q_list == (1.0, 1.5)
    assert settings.suite.master_seed == 3
    assert settings.sphere == Settings().sphere


def test_overrides():
    settings = apply_overrides(Settings(), parse_override_args(
        ["tail_to_moment_c=3", "sphere.restarts=8", "constants.bernstein_moment_c2=null", "suite.n_range=[2, 3]"]))
    assert settings.constants.tail_to_moment_c == 3.0
    assert settings.sphere.restarts == 8
    assert settings.constants.bernstein_moment_c2 is None
    assert settings.suite.n_range == (2, 3)


@pytest.mark.parametrize("overrides", [
    {"no_such_constant": "1"},
    {"nowhere.restarts": "1"},
    {"sphere.restarts": "-1"},
    {"suite.q_list": "[0.5]"},
    {"suite.n_range": "[4, 2]"},
    {"monte_carlo.replicas": "1.5"},
    {"sphere.max_iter": "null"},
])
def test_bad_overrides(overrides):
    with pytest.raises(ConfigError):
        apply_overrides(Settings(), overrides)


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        settings_from_dict({"plotting": {}})
    with pytest.raises(ConfigError):
        settings_from_dict({"sphere": {"restarts": 4, "colour": "red"}})
    with pytest.raises(ConfigError):
        settings_from_dict({"sphere": 3})
    path = tmp_path / "broken.yaml"
    path.write_text("suite: [unclosed\n")
    with pytest.raises(ConfigError):
        load_settings(path)


def test_override_syntax():
    assert parse_override_args(None) == {}
    with pytest.raises(ConfigError):
        parse_override_args(["justakey"])
    with pytest.raises(ConfigError):
        parse_override_args(["=3"])
