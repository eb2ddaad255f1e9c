import pytest

from lsmrum.domain.contracts.config import CleaningFlag, EngineConfig
from lsmrum.domain.curve import Curve
from lsmrum.infrastructure.config_loader import ConfigLoaderError, EngineConfigLoader


def test_load_should_return_defaults_when_nothing_configured():
    assert EngineConfigLoader(environ={}).load() == EngineConfig()


def test_load_should_read_yaml_mapping(tmp_path):
    path = tmp_path / "engine.yaml"
    path.write_text(
        "memory_budget_bytes: 1024\n"
        "cleaning_flags: FM\n"
        "curve: ZOrder\n"
        "world: [0, 0, 10, 10]\n"
        "vacuum_skip_recent: no\n"
    )

    config = EngineConfigLoader(environ={}).load(path)

    assert config.memory_budget_bytes == 1024
    assert config.cleaning_flags == {CleaningFlag.FLUSH, CleaningFlag.MERGE}
    assert config.curve is Curve.ZORDER
    assert config.world == (0.0, 0.0, 10.0, 10.0)
    assert config.vacuum_skip_recent is False


def test_load_should_read_key_value_lines(tmp_path):
    path = tmp_path / "engine.conf"
    path.write_text(
        "# desk-scale run\n"
        "merge_threshold = 3\n"
        "\n"
        "cleaning_flags=BV  # in-memory only\n"
        "strict_validation=on\n"
    )

    config = EngineConfigLoader(environ={}).load(path)

    assert config.merge_threshold == 3
    assert config.cleaning_flags == {CleaningFlag.BUFFERED, CleaningFlag.VACUUM}
    assert config.strict_validation is True


def test_load_should_prefer_env_over_file_and_overrides_over_env(tmp_path):
    path = tmp_path / "engine.yaml"
    path.write_text("merge_threshold: 3\nnode_capacity: 16\nbuffered_threshold: 2\n")
    environ = {"RUM_MERGE_THRESHOLD": "7", "RUM_NODE_CAPACITY": "12", "RUM_WORLD": ""}

    config = EngineConfigLoader(environ=environ).load(
        path, overrides={"node_capacity": 8, "buffered_threshold": None}
    )

    assert config.merge_threshold == 7
    assert config.node_capacity == 8
    assert config.buffered_threshold == 2
    assert config.world == EngineConfig().world


def test_load_should_parse_world_from_env():
    config = EngineConfigLoader(environ={"RUM_WORLD": "0, 0, 100, 50"}).load()

    assert config.world == (0.0, 0.0, 100.0, 50.0)


def test_load_should_raise_when_key_unknown(tmp_path):
    path = tmp_path / "engine.yaml"
    path.write_text("memory_budget: 10\n")

    with pytest.raises(ConfigLoaderError) as exc_info:
        EngineConfigLoader(environ={}).load(path)

    assert "memory_budget" in str(exc_info.value)
    assert "Available:" in str(exc_info.value)


@pytest.mark.parametrize(
    "overrides",
    [
        {"merge_threshold": "abc"},
        {"merge_threshold": 2.5},
        {"merge_threshold": True},
        {"strict_validation": "maybe"},
        {"cleaning_flags": "FX"},
        {"curve": "peano"},
        {"world": "1,2,3"},
        {"node_capacity": 1},
        {"world": "10,0,0,10"},
    ],
)
def test_load_should_raise_when_value_invalid(overrides):
    with pytest.raises(ConfigLoaderError):
        EngineConfigLoader(environ={}).load(overrides=overrides)


def test_load_should_raise_when_file_missing(tmp_path):
    with pytest.raises(ConfigLoaderError):
        EngineConfigLoader(environ={}).load(tmp_path / "missing.yaml")


def test_load_should_raise_with_line_number_when_line_malformed(tmp_path):
    path = tmp_path / "engine.conf"
    path.write_text("merge_threshold=3\njust some words\n")

    with pytest.raises(ConfigLoaderError) as exc_info:
        EngineConfigLoader(environ={}).load(path)

    assert f"{path}:2:" in str(exc_info.value)


def test_engine_config_should_coerce_curve_name_to_enum():
    assert EngineConfig(curve="zorder").curve is Curve.ZORDER  # type: ignore[arg-type]
    assert EngineConfig(curve=Curve.HILBERT).curve is Curve.HILBERT


def test_engine_config_should_raise_when_curve_unknown():
    with pytest.raises(ValueError, match="hilbert, zorder"):
        EngineConfig(curve="peano")  # type: ignore[arg-type]
