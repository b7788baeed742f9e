"""
Configuration module for the hybrid teleportation simulator.
"""

from .settings import (
    AppConfig,
    ConfigManager,
    EnumerationConfig,
    OutputConfig,
    ProtocolConfig,
    ServerConfig,
    get_config,
    reset_config,
)

__all__ = [
    "AppConfig",
    "ConfigManager",
    "EnumerationConfig",
    "OutputConfig",
    "ProtocolConfig",
    "ServerConfig",
    "get_config",
    "reset_config",
]
