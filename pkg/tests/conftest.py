import math

import pytest

from config import settings
from simulation.assets import AliceState, BobKnownState, BobQubit, random_alice, random_bob_product


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep every test away from the real settings file, .env and HTSIM_* variables."""
    for variable in settings.ENV_OVERRIDES:
        monkeypatch.delenv(variable, raising=False)
    monkeypatch.setattr(settings, "DEFAULT_CONFIG_PATH", tmp_path / "settings.json")
    monkeypatch.setattr(settings, "load_dotenv", lambda *args, **kwargs: False)
    settings.reset_config(tmp_path / "settings.json")
    yield
    settings._config_manager = None


@pytest.fixture
def alice():
    return random_alice(1, 11)


@pytest.fixture
def bob():
    return random_bob_product(1, 12)


@pytest.fixture
def alice2():
    return random_alice(2, 21)


@pytest.fixture
def bob2():
    return random_bob_product(2, 22)


@pytest.fixture
def real_alice():
    """α = (√0.3, √0.7)."""
    return AliceState(1, [math.sqrt(0.3), math.sqrt(0.7)])


@pytest.fixture
def generic_bob():
    return BobKnownState.product([BobQubit.from_angle(0.7, 1.3)])
