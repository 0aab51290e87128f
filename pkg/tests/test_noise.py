import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArgumentError
from models import ElementIndex, NoiseConfig
from protocol.estimator import estimate_exact
from protocol.noise import apply_depolarizing, ghz_resource, make_ghz_supplier, noisy_system
from protocol.state_core import ghz_state, random_density_matrix


def test_depolarizing_limits(epr):
    assert apply_depolarizing(epr, 0.0) is epr
    assert_allclose(apply_depolarizing(epr, 1.0).entries, np.eye(4) / 4)


def test_depolarizing_scales_coherence(epr):
    noisy = apply_depolarizing(epr, 0.2)
    assert noisy.element(0, 3) == pytest.approx(0.8 * 0.5)
    assert np.trace(noisy.entries).real == pytest.approx(1.0)


@pytest.mark.parametrize("strength", [-0.01, 1.5])
def test_depolarizing_rejects_out_of_range(epr, strength):
    with pytest.raises(ArgumentError):
        apply_depolarizing(epr, strength)


def test_purity_decreases_with_strength(rng):
    rho = random_density_matrix(2, rank=2, rng=rng)
    purities = [apply_depolarizing(rho, s).purity() for s in np.linspace(0, 1, 11)]
    assert all(a >= b - 1e-12 for a, b in zip(purities, purities[1:]))


def test_noise_config_validation():
    assert NoiseConfig().noiseless
    assert not NoiseConfig(ghz_werner_p=0.9).noiseless
    with pytest.raises(ArgumentError):
        NoiseConfig(ghz_werner_p=1.2)
    with pytest.raises(ArgumentError):
        NoiseConfig(system_depolarizing=-0.1)


def test_ghz_supplier_builds_werner_resources():
    supplier = make_ghz_supplier(NoiseConfig(ghz_werner_p=0.5))
    resource = supplier(3)
    assert resource.num_qubits == 3
    ideal = ghz_state(3).projector().entries
    assert_allclose(resource.entries, 0.5 * ideal + 0.5 * np.eye(8) / 8)
    assert_allclose(ghz_resource(2, NoiseConfig()).entries, ghz_state(2).projector().entries)


def test_protocol_reads_the_depolarized_state(rng):
    rho = random_density_matrix(2, rng=rng)
    noisy = noisy_system(rho, NoiseConfig(system_depolarizing=0.3))
    element = ElementIndex(2, 0, 3)
    assert estimate_exact(noisy, element).value == pytest.approx(noisy.element(0, 3), abs=1e-10)
    assert noisy.element(0, 3) == pytest.approx(0.7 * rho.element(0, 3))
