import numpy as np
import pytest

from config import Config
from extensions import init_extensions
from models import DensityMatrix, PureState
from protocol.state_core import epr_state, ghz_state


@pytest.fixture(autouse=True)
def default_extensions():
    init_extensions(Config)
    yield
    init_extensions(Config)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def epr():
    return epr_state().projector()


@pytest.fixture
def ghz3():
    return ghz_state(3).projector()


def pure(num_qubits, amplitudes):
    return PureState.normalized(num_qubits, amplitudes).projector()


def diag(values):
    values = np.asarray(values, dtype=float)
    return DensityMatrix(int(np.log2(values.size)), np.diag(values).astype(complex))
