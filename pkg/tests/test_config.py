import json
import os

import dotenv
import pytest

from config import settings
from config.settings import AppConfig, ConfigManager, validate_config


@pytest.fixture
def manager(tmp_path):
    return ConfigManager(tmp_path / "settings.json")


class TestDefaults:
    def test_missing_file_is_created(self, tmp_path):
        path = tmp_path / "nested" / "settings.json"
        manager = ConfigManager(path)
        assert path.exists()
        assert manager.active_profile == "default"
        assert manager.config.protocol.seed == 7
        assert manager.config.server.port == 8787

    def test_corrupt_file_is_recreated(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text("{broken", encoding="utf-8")
        manager = ConfigManager(path)
        assert manager.list_profiles() == ["default"]
        assert json.loads(path.read_text(encoding="utf-8"))["active_profile"] == "default"

    def test_partial_sections_use_defaults(self, tmp_path):
        path = tmp_path / "settings.json"
        data = {"active_profile": "x", "profiles": {"x": {"protocol": {"n": 2}}}}
        path.write_text(json.dumps(data), encoding="utf-8")
        config = ConfigManager(path).config
        assert config.protocol.n == 2
        assert config.protocol.convention == "singlet"
        assert config.enumeration.max_n == 3

    def test_defaults_validate(self):
        assert validate_config(AppConfig()) == []


class TestProfiles:
    def test_create_and_switch(self, manager):
        assert manager.create_profile("fast", copy_from="default")
        assert not manager.create_profile("fast")
        assert manager.switch_profile("fast")
        assert not manager.switch_profile("missing")
        assert ConfigManager(manager.config_path).active_profile == "fast"

    def test_delete(self, manager):
        manager.create_profile("a")
        assert manager.delete_profile("a")
        assert manager.list_profiles() == ["default"]
        assert not manager.delete_profile("a")
        assert not manager.delete_profile("default")

    def test_deleting_active_profile_switches(self, manager):
        manager.create_profile("other")
        manager.switch_profile("other")
        manager.delete_profile("other")
        assert manager.active_profile == "default"


class TestUpdates:
    def test_valid_update_is_saved(self, manager):
        assert manager.update_config({"protocol": {"convention": "phiminus"}, "log_level": "info"}) == []
        reloaded = ConfigManager(manager.config_path).config
        assert reloaded.protocol.convention == "phiminus"
        assert reloaded.log_level == "INFO"

    def test_invalid_update_is_rejected(self, manager):
        problems = manager.update_config({"protocol": {"n": 0}, "enumeration": {"max_n": 5}})
        assert len(problems) == 2
        assert manager.config.protocol.n == 1

    def test_unknown_keys_are_ignored(self, manager):
        assert manager.update_config({"protocol": {"colour": "red"}}) == []
        assert "colour" not in manager.get_config_dict()["protocol"]


class TestEffective:
    def test_env_overrides(self, manager, monkeypatch):
        monkeypatch.setenv("HTSIM_SEED", "42")
        monkeypatch.setenv("HTSIM_CONVENTION", "PhiMinus")
        monkeypatch.setenv("HTSIM_API_PORT", "9000")
        config = manager.effective()
        assert config.protocol.seed == 42
        assert config.protocol.convention == "phiminus"
        assert config.server.port == 9000
        assert manager.config.protocol.seed == 7

    def test_invalid_env_value_is_ignored(self, manager, monkeypatch, caplog):
        monkeypatch.setenv("HTSIM_WORKERS", "many")
        assert manager.effective().enumeration.workers == 1
        assert "HTSIM_WORKERS" in caplog.text

    def test_named_profile(self, manager):
        manager.create_profile("big")
        manager.switch_profile("big")
        manager.update_config({"protocol": {"n": 3}})
        assert manager.effective("default").protocol.n == 1
        assert manager.effective().protocol.n == 3

    def test_unknown_profile(self, manager):
        with pytest.raises(KeyError):
            manager.effective("nope")

    def test_dotenv_file(self, tmp_path, monkeypatch):
        env_file = tmp_path / ".env"
        env_file.write_text("HTSIM_SEED=99\nHTSIM_LOG_LEVEL=debug\n", encoding="utf-8")
        monkeypatch.setattr(settings, "load_dotenv", dotenv.load_dotenv)
        try:
            config = ConfigManager(tmp_path / "settings.json", env_file=env_file).effective()
            assert config.protocol.seed == 99
            assert config.log_level == "DEBUG"
        finally:
            os.environ.pop("HTSIM_SEED", None)
            os.environ.pop("HTSIM_LOG_LEVEL", None)

    def test_global_manager(self, tmp_path):
        first = settings.get_config()
        assert settings.get_config() is first
        assert settings.reset_config(tmp_path / "other.json") is not first
