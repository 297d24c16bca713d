import logging

import pytest

from src.core import config
from src.core.errors import ConfigError, InputError, LabError
from src.core.log import TagFormatter


def test_settings_defaults_and_file(tmp_path):
    cfg = config.settings()
    assert cfg["density_cap"] == 8
    assert cfg["oracle"]["starts"] >= 20
    assert cfg["oracle"]["iterations"] >= 5000

    p = tmp_path / "settings.yaml"
    p.write_text("density_cap: 6\noracle:\n  starts: 3\n", encoding="utf-8")
    cfg = config.settings(p)
    assert cfg["density_cap"] == 6
    assert cfg["oracle"]["starts"] == 3
    # остальные ключи вложенного словаря сохраняются
    assert cfg["oracle"]["iterations"] == 5000


def test_load_yaml_accepts_json(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text('{"scenario": "simple", "gamma": [0.0, 1e-4]}', encoding="utf-8")
    assert config.load_yaml(p) == {"scenario": "simple", "gamma": [0.0, 1e-4]}


def test_exponent_numbers_are_floats(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text('{"shots": 5e4, "eta": 5e-1, "gamma": [0, 1e-4]}', encoding="utf-8")
    assert config.load_yaml(p) == {"shots": 50000.0, "eta": 0.5, "gamma": [0, 1e-4]}

    y = tmp_path / "scenario.yaml"
    y.write_text("shots: 5e4\neta: 5e-1\ngamma: [0, 1e-4, 1.0e-3]\nname: run1e5x\n", encoding="utf-8")
    assert config.load_yaml(y) == {"shots": 50000.0, "eta": 0.5, "gamma": [0, 1e-4, 1e-3], "name": "run1e5x"}


def test_json_scenario_resolves(tmp_path):
    from src.experiments.scenarios import resolve_scenario

    p = tmp_path / "scenario.json"
    p.write_text('{"scenario": "simple", "shots": 5e4, "eta": 5e-1, "gamma": [0, 1e-4]}', encoding="utf-8")
    s = resolve_scenario(config.load_yaml(p))
    assert s.shots == 50000 and s.eta == 0.5
    assert s.gammas == (0.0, 1e-4)


def test_load_yaml_errors(tmp_path):
    with pytest.raises(ConfigError):
        config.load_yaml(tmp_path / "missing.yaml")
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config.load_yaml(p)
    bad = tmp_path / "bad.json"
    bad.write_text("{\"shots\": ", encoding="utf-8")
    with pytest.raises(ConfigError):
        config.load_yaml(bad)


def test_density_cap_env(monkeypatch):
    monkeypatch.delenv("VHA_LAB_DENSITY_CAP", raising=False)
    assert config.density_cap() == 8
    monkeypatch.setenv("VHA_LAB_DENSITY_CAP", "12")
    assert config.density_cap() == 12
    monkeypatch.setenv("VHA_LAB_DENSITY_CAP", "many")
    with pytest.raises(ConfigError):
        config.density_cap()
    monkeypatch.setenv("VHA_LAB_DENSITY_CAP", "0")
    with pytest.raises(ConfigError):
        config.density_cap()


def test_error_hierarchy():
    assert issubclass(InputError, ValueError)
    assert issubclass(ConfigError, LabError)
    assert issubclass(LabError, RuntimeError)


def test_tag_formatter():
    fmt = TagFormatter()
    rec = logging.LogRecord("src.x", logging.WARNING, __file__, 1, "cell %s failed", ("ps",), None)
    assert fmt.format(rec) == "[WARN] cell ps failed"
    rec = logging.LogRecord("src.x", logging.INFO, __file__, 1, "done", (), None)
    assert fmt.format(rec) == "[OK] done"
