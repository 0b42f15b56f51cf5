import pytest

from grushin_riesz.config import ConfigError, get_typed, load_config, resolve


def test_load_parses_json_and_strings(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\ntrials = 3\ndims = [1, 2]\nfamily = bump-mix  # trailing\n\nflag = true\n")
    cfg = load_config(path)
    assert cfg == {"trials": 3, "dims": [1, 2], "family": "bump-mix", "flag": True}


def test_malformed_lines_raise(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("trials 3\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_flags_override_file_values():
    merged = resolve({"seed": 1, "trials": 4}, {"seed": 9, "trials": None})
    assert merged == {"seed": 9, "trials": 4}


def test_typed_access():
    cfg = {"n": "3", "flag": "yes", "bad": "x"}
    assert get_typed(cfg, "n", int, 0) == 3
    assert get_typed(cfg, "flag", bool, False) is True
    assert get_typed(cfg, "missing", float, 1.5) == 1.5
    with pytest.raises(ConfigError):
        get_typed(cfg, "bad", int, 0)
