import os

import hypothesis
import pytest
from loguru import logger

from arborlat.app import app
from arborlat.labelled import OrbitStructure, random_tau_legal
from arborlat.lattices import canonical_F240, toy_theta_data
from arborlat.main import main
from arborlat.permkernel import symmetric_group, cyclic_group
from arborlat.settings import settings

hypothesis.settings.register_profile(
    'arborlat', deadline=None, suppress_health_check=[hypothesis.HealthCheck.function_scoped_fixture])
hypothesis.settings.load_profile('arborlat')

OVERRIDABLE = ('SEED', 'CAP_GROUP', 'CAP_VERTICES', 'CAP_TABLE', 'CAP_STABILIZER', 'FIN_CEILING')


@pytest.fixture(autouse=True)
def init():
    settings.TEST = True
    saved = {name: getattr(settings, name) for name in OVERRIDABLE}
    logger.remove()
    app.__init__()
    yield
    for name, value in saved.items():
        setattr(settings, name, value)


@pytest.fixture
def s3():
    return symmetric_group(3)


@pytest.fixture
def c3():
    return cyclic_group(3)


@pytest.fixture
def os3(s3):
    return OrbitStructure.from_group(s3)


@pytest.fixture
def toy_ball():
    """
    n=3, labels equal to addresses and to the labels of the reverse arcs: legal, and tau-legal
    for the single S_3 block.
    """
    return random_tau_legal(OrbitStructure.discrete(3), radius=2, seed=0)


@pytest.fixture
def toy_theta():
    return toy_theta_data(seed=0)


@pytest.fixture(scope='session')
def f240():
    return canonical_F240()


@pytest.fixture
def fixturedir(tmp_path):
    """
    The files written by `arborlat fixtures`.
    """
    out = str(tmp_path / 'fixtures')
    assert main(['fixtures', '--out', out]) == 0
    app.__init__()
    return out


@pytest.fixture
def fixture_path(fixturedir):
    def path(name):
        return os.path.join(fixturedir, name)
    return path
