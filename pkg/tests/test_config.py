import pytest
from config import (
    RunConfig, config_hash, get_settings, hash_document, load_run_config, parse_run_config
)
from utils.errors import ConfigError


# ==================== SETTINGS ====================

def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("BCOPT_THREADS", "3")
    monkeypatch.setenv("BCOPT_LOG_LEVEL", "debug")
    monkeypatch.setenv("BCOPT_OUTPUT_DIR", "runs")
    settings = get_settings()
    assert settings.threads == 3
    assert settings.log_level == "DEBUG"
    assert settings.output_dir == "runs"


def test_settings_defaults(monkeypatch):
    monkeypatch.delenv("BCOPT_THREADS", raising=False)
    monkeypatch.delenv("BCOPT_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("BCOPT_LOG_LEVEL", raising=False)
    settings = get_settings()
    assert settings.threads >= 1
    assert settings.output_dir == "output"
    assert settings.log_level == "INFO"


@pytest.mark.parametrize("value", ["zero", "0", "-2"])
def test_settings_reject_thread_counts(monkeypatch, value):
    monkeypatch.setenv("BCOPT_THREADS", value)
    with pytest.raises(ValueError):
        get_settings()


# ==================== RUN CONFIGURATION ====================

def test_defaults_map_to_optimizer_config():
    run = parse_run_config({"objective": {"ell": 0.5}, "smoothing": {"eps_smooth": 0.1}})
    config = run.opt_config()
    assert config.problem == "conductivity"
    assert config.ell == 0.5
    assert config.eps_smooth == 0.1
    assert config.max_iter == 50


@pytest.mark.parametrize("document, key", [
    ({"mesh": {"bogus": 1}}, "mesh.bogus"),
    ({"mesh": {"target_h": -0.1}}, "mesh.target_h"),
    ({"physics": {"gamma": "sin(x)"}}, "physics.gamma"),
    ({"physics": {"nu": 0.5}}, "physics.nu"),
    ({"region": {"arcs": [[1.0, 1.0]]}}, "region.arcs"),
    ({"optimizer": {"problem": "stokes"}}, "optimizer.problem"),
])
def test_schema_violations_name_their_key(document, key):
    with pytest.raises(ConfigError) as info:
        parse_run_config(document)
    assert info.value.key == key


def test_load_reports_json_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "mesh": {\n    "shape": "disk",\n  }\n}\n')
    with pytest.raises(ConfigError) as info:
        load_run_config(str(path))
    assert "line 4" in info.value.message


def test_load_rejects_missing_and_non_objects(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "missing.json"))
    path = tmp_path / "list.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_run_config(str(path))


def test_load_valid_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"mesh": {"shape": "square", "target_h": 0.25}, "optimizer": {"max_iter": 3}}')
    run = load_run_config(str(path))
    assert run.mesh.shape == "square"
    assert run.opt_config().max_iter == 3


def test_hash_ignores_key_order():
    a = hash_document({"x": 1, "y": [1.0, 2.0]})
    b = hash_document({"y": [1.0, 2.0], "x": 1})
    assert a == b
    assert len(a) == 16
    assert a != hash_document({"x": 2, "y": [1.0, 2.0]})


def test_config_hash_tracks_content():
    assert config_hash(RunConfig()) == config_hash(parse_run_config({}))
    assert config_hash(RunConfig()) != config_hash(parse_run_config({"optimizer": {"tau0": 0.2}}))
