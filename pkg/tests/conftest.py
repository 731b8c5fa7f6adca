import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from services.game_service import build_family
from services.space_service import uniform, weighted

np.seterr(all='warn')

hypothesis.settings.register_profile('fast', max_examples=5)
hypothesis.settings.register_profile('ci', max_examples=50, deadline=None)
hypothesis.settings.register_profile('debugger', report_multiple_bugs=False)
hypothesis.settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'ci'))

ROOT = Path(__file__).resolve().parent.parent
GOLDEN_DIR = ROOT / 'golden'
CONFIG_DIR = ROOT / 'configs'


@pytest.fixture
def u4():
    return uniform(4)


@pytest.fixture
def u8():
    return uniform(8)


@pytest.fixture
def two_point():
    """weighted(2/3, 1/3)"""
    return weighted(['2/3', '1/3'])


@pytest.fixture
def es_game(u8):
    return build_family('es', u8.probability, beta='3/4')


@pytest.fixture
def var_half(u8):
    return build_family('var', u8.probability, gamma='1/2')
