import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.dependencies import DependencyContainer
from domain.services.polar_service import PolarService, build_code_spec
from domain.services.repro_service import REFERENCE_UNFROZEN
from shared.config.settings import settings


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction checks (deselect with -m 'not slow')")


@pytest.fixture
def polar_service():
    return PolarService()


@pytest.fixture
def container():
    """Fresh service container per test"""
    return DependencyContainer()


@pytest.fixture
def reference_spec():
    """The (32,16) code of the reference weight tables"""
    return build_code_spec(5, REFERENCE_UNFROZEN)


@pytest.fixture
def small_spec():
    """(16,8) code with a GA-like unfrozen set"""
    return build_code_spec(4, (7, 9, 10, 11, 12, 13, 14, 15))


@pytest.fixture
def tiny_spec():
    """(8,4) code of the classic example"""
    return build_code_spec(3, (3, 5, 6, 7))


@pytest.fixture
def seeded_interleavers(polar_service):
    """Factory: seeded interleaver set for a given m_exp"""
    def make(m_exp: int, seed: int = 7):
        return polar_service.sample_interleavers(m_exp, seed)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def settings_override():
    """Temporarily change settings fields; restored after the test"""
    saved = {}

    def apply(**values):
        for key, value in values.items():
            if key not in saved:
                saved[key] = getattr(settings, key)
            setattr(settings, key, value)

    yield apply
    for key, value in saved.items():
        setattr(settings, key, value)
