import json

import pytest
from hypothesis import given, strategies as st

from tensionlab.cache import Cache, cache_key, resolve_dir
from tensionlab.config import RunConfig, config_from_dict, load_config, suggest
from tensionlab.errors import ConfigError


def test_defaults_and_overrides():
    cfg = config_from_dict({"command": "tension", "kind": "fd_m_k", "k": 2})
    assert isinstance(cfg, RunConfig)
    assert cfg.k == 2 and cfg.N == 1024 and cfg.seed == 0


@pytest.mark.parametrize("d,field", [
    ({"command": "tension", "kind": "m_ks", "s": 1.5}, "s"),
    ({"command": "tension", "kind": "bogus"}, "kind"),
    ({"command": "sweep-eps"}, "family"),
    ({"command": "tension", "kind": "fd_m_k", "N": 4}, "N"),
    ({"command": "tension", "kind": "fd_m_k", "k": 2.5}, "k"),
    ({"command": "export"}, "input"),
    ({"kind": "fd_m_k"}, "command"),
])
def test_invalid_values_name_the_field(d, field):
    with pytest.raises(ConfigError, match=f"^{field}:"):
        config_from_dict(d)


def test_unknown_key_suggestion():
    with pytest.raises(ConfigError, match="did you mean 'eps'"):
        config_from_dict({"command": "tension", "kind": "fd_m_k", "epslion": 0.1})
    assert suggest("epsilon") == "eps"
    assert suggest("N_mx") == "N_max"


def test_load_config_reports_position(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"command": "tension",\n "kind": }')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


def test_cache_key_stable_under_ordering():
    a = cache_key({"x": 1, "y": [1, 2]})
    b = cache_key({"y": [1, 2], "x": 1})
    assert a == b
    assert cache_key({"x": 1}, "0.1.0") != cache_key({"x": 1}, "0.2.0")


@given(st.dictionaries(st.text(max_size=5), st.integers() | st.floats(allow_nan=False)))
def test_cache_key_is_hex_digest(d):
    k = cache_key(d)
    assert len(k) == 64 and int(k, 16) >= 0


def test_cache_store_lookup_and_corruption(tmp_path):
    c = Cache(tmp_path)
    key = cache_key({"a": 1})
    assert c.lookup(key) is None
    c.store(key, {"value": 1.5})
    assert c.lookup(key) == {"value": 1.5}
    assert Cache(tmp_path, version="9.9").lookup(key) is None
    (tmp_path / f"{key}.json").write_text("{not json")
    with pytest.warns(UserWarning, match="corrupt"):
        assert c.lookup(key) is None


def test_cache_dir_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("TENSIONLAB_CACHE", str(tmp_path / "env"))
    assert resolve_dir("elsewhere") == tmp_path / "env"
    monkeypatch.delenv("TENSIONLAB_CACHE")
    assert str(resolve_dir("elsewhere")) == "elsewhere"
