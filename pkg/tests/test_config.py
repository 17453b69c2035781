import json

import pytest

from lgtime.config import ConfigError, ExperimentConfig, load_config, with_overrides


def test_defaults_reference_values():
    cfg = ExperimentConfig()
    assert cfg.kappa_hz == pytest.approx(30.3e6)
    assert cfg.t1 == pytest.approx(200e-9)
    assert cfg.gamma_phi_total == pytest.approx(1.0 / 150e-9 - 0.5 / 200e-9)
    assert cfg.deltaV == pytest.approx(2.0 * (2.61e-6) ** 0.5)


def test_load_from_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"nbar": 1.56, "seed": 7}))
    cfg = load_config(path)
    assert cfg.nbar == 1.56 and cfg.seed == 7
    assert cfg.kappa_hz == pytest.approx(30.3e6)  # untouched default


def test_overrides_beat_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 7}))
    assert load_config(path, seed=9).seed == 9


def test_none_override_ignored(tmp_path):
    assert load_config(None, seed=None).seed == 0


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"kapa_hz": 1e6}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_with_overrides():
    cfg = with_overrides(ExperimentConfig(), nbar=3.9, out_dir=None)
    assert cfg.nbar == 3.9 and cfg.out_dir == "out"


def test_physics_builders():
    cfg = ExperimentConfig()
    tls, cavity = cfg.tls(), cfg.cavity()
    assert tls.gamma1 == pytest.approx(1.0 / cfg.t1)
    assert cavity.kappa == pytest.approx(2.0 * 3.141592653589793 * cfg.kappa_hz)
