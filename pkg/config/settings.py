"""
Configuration manager for the hybrid teleportation simulator.
Handles loading, saving and validating settings with multi-profile support,
plus non-persisted environment overrides read from an optional .env file.
"""

import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

from dotenv import load_dotenv

DEFAULT_CONFIG_PATH = Path(__file__).parent / "settings.json"
logger = logging.getLogger(__name__)

CONVENTIONS = ("singlet", "phiminus")
MODES = ("product", "general")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class ProtocolConfig:
    """Defaults for a protocol run."""

    n: int = 1
    convention: str = "singlet"
    mode: str = "product"
    seed: int = 7


@dataclass
class EnumerationConfig:
    """Branch enumeration limits."""

    workers: int = 1
    max_n: int = 3


@dataclass
class OutputConfig:
    significant_digits: int = 15
    indent: int = 2


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8787


@dataclass
class AppConfig:
    """Main application configuration (a single profile)."""

    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    enumeration: EnumerationConfig = field(default_factory=EnumerationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    log_level: str = "WARNING"


# ── Environment overrides ─────────────────────────────────────────────

# variable -> (section or None for top level, field, parser)
ENV_OVERRIDES: dict[str, tuple[Optional[str], str, Callable[[str], object]]] = {
    "HTSIM_CONVENTION": ("protocol", "convention", str.lower),
    "HTSIM_MODE": ("protocol", "mode", str.lower),
    "HTSIM_SEED": ("protocol", "seed", int),
    "HTSIM_WORKERS": ("enumeration", "workers", int),
    "HTSIM_LOG_LEVEL": (None, "log_level", str.upper),
    "HTSIM_API_HOST": ("server", "host", str),
    "HTSIM_API_PORT": ("server", "port", int),
}


def validate_config(config: AppConfig) -> list[str]:
    """Return a list of problems; empty when the profile is usable."""
    problems = []
    if config.protocol.n < 1:
        problems.append(f"protocol.n must be at least 1, got {config.protocol.n}")
    if config.protocol.convention not in CONVENTIONS:
        problems.append(f"protocol.convention must be one of {', '.join(CONVENTIONS)}")
    if config.protocol.mode not in MODES:
        problems.append(f"protocol.mode must be one of {', '.join(MODES)}")
    if config.enumeration.workers < 1:
        problems.append("enumeration.workers must be at least 1")
    if not 1 <= config.enumeration.max_n <= 3:
        problems.append("enumeration.max_n must be between 1 and 3")
    if not 1 <= config.output.significant_digits <= 17:
        problems.append("output.significant_digits must be between 1 and 17")
    if config.log_level.upper() not in LOG_LEVELS:
        problems.append(f"log_level must be one of {', '.join(LOG_LEVELS)}")
    return problems


class ConfigManager:
    """Manages application configuration with multi-profile support."""

    def __init__(self, config_path: Optional[Path] = None, env_file: Optional[Path] = None):
        self.config_path = config_path or DEFAULT_CONFIG_PATH
        self.env_file = env_file
        self._active_profile: str = "default"
        self._profiles: dict[str, AppConfig] = {}
        self._load_all()

    @property
    def config(self) -> AppConfig:
        """Get the active profile's config."""
        return self._profiles.get(self._active_profile, AppConfig())

    @property
    def active_profile(self) -> str:
        return self._active_profile

    # ── Loading / Saving ──────────────────────────────────────────────

    def _reset_to_default(self) -> None:
        self._profiles = {"default": AppConfig()}
        self._active_profile = "default"
        self.save()

    def _load_all(self) -> None:
        """Load all profiles from the config file."""
        if not self.config_path.exists():
            self._reset_to_default()
            return

        try:
            with open(self.config_path, "r") as f:
                data = json.load(f)
            profiles = data["profiles"]
            self._profiles = {name: self._dict_to_config(p) for name, p in profiles.items()}
        except (json.JSONDecodeError, OSError, KeyError, TypeError, AttributeError) as exc:
            logger.warning("settings file %s is unreadable (%s); recreating defaults", self.config_path, exc)
            self._reset_to_default()
            return

        self._active_profile = data.get("active_profile", "default")
        if not self._profiles:
            self._profiles = {"default": AppConfig()}
            self._active_profile = "default"
        if self._active_profile not in self._profiles:
            self._active_profile = next(iter(self._profiles))

    def save(self) -> None:
        """Save all profiles to the config file."""
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        data = {
            "active_profile": self._active_profile,
            "profiles": {
                name: self._config_to_dict(cfg)
                for name, cfg in self._profiles.items()
            },
        }
        with open(self.config_path, "w") as f:
            json.dump(data, f, indent=2)

    # ── Profile management ────────────────────────────────────────────

    def list_profiles(self) -> list[str]:
        """Return list of profile names."""
        return list(self._profiles.keys())

    def switch_profile(self, name: str) -> bool:
        """Switch to a different profile. Returns True if successful."""
        if name not in self._profiles:
            return False
        self._active_profile = name
        self.save()
        return True

    def create_profile(self, name: str, copy_from: Optional[str] = None) -> bool:
        """Create a new profile. Optionally copy settings from an existing one."""
        if name in self._profiles:
            return False
        if copy_from and copy_from in self._profiles:
            self._profiles[name] = self._dict_to_config(self._config_to_dict(self._profiles[copy_from]))
        else:
            self._profiles[name] = AppConfig()
        self.save()
        return True

    def delete_profile(self, name: str) -> bool:
        """Delete a profile. Cannot delete if it's the only one."""
        if name not in self._profiles or len(self._profiles) <= 1:
            return False
        del self._profiles[name]
        if self._active_profile == name:
            self._active_profile = next(iter(self._profiles))
        self.save()
        return True

    # ── Config serialization ──────────────────────────────────────────

    def _config_to_dict(self, config: AppConfig) -> dict:
        return asdict(config)

    def _dict_to_config(self, data: dict) -> AppConfig:
        return AppConfig(
            protocol=ProtocolConfig(**data.get("protocol", {})),
            enumeration=EnumerationConfig(**data.get("enumeration", {})),
            output=OutputConfig(**data.get("output", {})),
            server=ServerConfig(**data.get("server", {})),
            log_level=data.get("log_level", "WARNING"),
        )

    # ── Updates ───────────────────────────────────────────────────────

    def update_config(self, data: dict) -> list[str]:
        """
        Bulk update the active profile from a dict of sections.

        Returns the validation problems; the profile is only saved when there
        are none.
        """
        candidate = copy.deepcopy(self.config)
        for section in ("protocol", "enumeration", "output", "server"):
            target = getattr(candidate, section)
            for key, value in data.get(section, {}).items():
                if hasattr(target, key):
                    setattr(target, key, value)
        if "log_level" in data:
            candidate.log_level = str(data["log_level"]).upper()
        problems = validate_config(candidate)
        if problems:
            return problems
        self._profiles[self._active_profile] = candidate
        self.save()
        return []

    def get_config_dict(self) -> dict:
        """Return the active config as a serializable dict."""
        return self._config_to_dict(self.config)

    # ── Effective config ──────────────────────────────────────────────

    def env_overrides(self) -> dict[str, object]:
        """Parsed HTSIM_* overrides from the environment (and .env, if present)."""
        load_dotenv(self.env_file, override=False)
        overrides = {}
        for variable, (section, key, parse) in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if raw is None or raw == "":
                continue
            try:
                overrides[variable] = parse(raw)
            except ValueError:
                logger.warning("ignoring %s=%r: not a valid value", variable, raw)
        return overrides

    def effective(self, profile: Optional[str] = None) -> AppConfig:
        """
        A profile (the active one by default) with environment overrides
        applied; never persisted.
        """
        if profile is not None and profile not in self._profiles:
            raise KeyError(f"unknown profile {profile!r}")
        config = copy.deepcopy(self._profiles[profile] if profile is not None else self.config)
        for variable, value in self.env_overrides().items():
            section, key, _ = ENV_OVERRIDES[variable]
            setattr(getattr(config, section) if section else config, key, value)
        for problem in validate_config(config):
            logger.warning("effective configuration: %s", problem)
        return config


# ── Global singleton ──────────────────────────────────────────────────

_config_manager: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """Get the global configuration manager instance."""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reset_config(config_path: Optional[Path] = None) -> ConfigManager:
    """Reset and return a fresh ConfigManager (useful after profile changes)."""
    global _config_manager
    _config_manager = ConfigManager(config_path)
    return _config_manager
