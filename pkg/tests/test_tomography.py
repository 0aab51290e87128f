from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArgumentError, ResourceError
from extensions import init_extensions
from models import PauliString
from protocol.state_core import expectation, fidelity, maximally_mixed, random_density_matrix
from protocol.tomography import (
    invert,
    measurement_settings,
    pauli_labels,
    result_to_json,
    setting_probabilities,
    tomograph_exact,
    tomograph_sampled,
)


def test_epr_exact(epr):
    result = tomograph_exact(epr)
    assert result.settings_used == 9
    assert fidelity(result.reconstructed, epr) == pytest.approx(1.0, abs=1e-10)
    assert result.expectations['XX'] == pytest.approx(1.0)
    assert result.expectations['YY'] == pytest.approx(-1.0)
    assert result.expectations['ZZ'] == pytest.approx(1.0)
    assert result.expectations['XI'] == pytest.approx(0.0, abs=1e-12)
    assert result.expectations['II'] == pytest.approx(1.0)


@pytest.mark.parametrize("num_qubits", [1, 2, 3, 4])
def test_exact_reconstruction_is_lossless(rng, num_qubits):
    rho = random_density_matrix(num_qubits, rng=rng)
    result = tomograph_exact(rho)
    assert result.settings_used == 3 ** num_qubits
    assert np.max(np.abs(result.reconstructed.entries - rho.entries)) < 1e-10


def test_settings_and_probabilities(rng):
    settings = measurement_settings(2)
    assert len(settings) == 9 and settings[0] == 'XX' and settings[-1] == 'ZZ'
    rho = random_density_matrix(2, rng=rng)
    for setting in settings:
        probs = setting_probabilities(rho.entries, setting)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert_allclose(setting_probabilities(rho.entries, 'ZZ'), rho.diagonal(), atol=1e-15)


def test_expectations_match_dense_pauli_traces(rng):
    rho = random_density_matrix(3, rng=rng)
    result = tomograph_exact(rho)
    assert len(result.expectations) == 64
    for label, value in result.expectations.items():
        assert value == pytest.approx(expectation(rho, PauliString(label)), abs=1e-12)


def test_invert_single_pauli_string():
    expectations = {label: 0.0 for label in pauli_labels(2)}
    expectations['II'] = 1.0
    expectations['XY'] = 0.5
    expected = (np.eye(4) + 0.5 * PauliString('XY').matrix()) / 4
    assert_allclose(invert(2, expectations), expected, atol=1e-15)


def test_tomography_qubit_limit():
    init_extensions(SimpleNamespace(TOMOGRAPHY_QUBIT_CAP=3))
    with pytest.raises(ResourceError):
        tomograph_exact(maximally_mixed(4))
    assert tomograph_exact(maximally_mixed(3)).settings_used == 27


def test_default_limit_rejects_nine_qubits():
    with pytest.raises(ResourceError):
        tomograph_exact(maximally_mixed(9))


def test_exact_distributions_are_cached_on_disk(tmp_path, epr):
    init_extensions(SimpleNamespace(CACHE_DIR=str(tmp_path)))
    first = tomograph_exact(epr)
    assert any(tmp_path.iterdir())
    second = tomograph_exact(epr)
    assert_allclose(first.reconstructed.entries, second.reconstructed.entries, rtol=0, atol=0)


def test_sampled_is_reproducible(epr):
    first = tomograph_sampled(epr, 500, seed=8)
    second = tomograph_sampled(epr, 500, seed=8)
    assert_allclose(first.reconstructed.entries, second.reconstructed.entries, rtol=0, atol=0)
    assert first.expectations == second.expectations
    assert np.linalg.eigvalsh(first.reconstructed.entries)[0] >= -1e-10


@pytest.mark.slow
def test_sampled_epr_fidelity(epr):
    result = tomograph_sampled(epr, 10 ** 5, seed=1)
    assert fidelity(result.reconstructed, epr) > 0.99


def test_sampled_maximally_mixed_stays_near_identity():
    shots = 20000
    result = tomograph_sampled(maximally_mixed(2), shots, seed=3)
    for label, value in result.expectations.items():
        if label == 'II':
            continue
        averaged_over = 3 ** label.count('I')
        sigma = 1 / np.sqrt(shots * averaged_over)
        assert abs(value) <= 4 * sigma


@pytest.mark.slow
def test_sampled_converges_with_shots(rng):
    rho = random_density_matrix(2, rng=rng)
    infidelity = [1 - fidelity(tomograph_sampled(rho, shots, seed=2).reconstructed, rho)
                  for shots in (100, 1000, 10000)]
    assert infidelity[2] < infidelity[0]


def test_sampled_rejects_zero_shots(epr):
    with pytest.raises(ArgumentError):
        tomograph_sampled(epr, 0)


def test_result_json(epr):
    payload = result_to_json(tomograph_exact(epr))
    assert payload['settings_used'] == 9
    assert payload['reconstructed']['num_qubits'] == 2
    assert not payload['psd_projected']
