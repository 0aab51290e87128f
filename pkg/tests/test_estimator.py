from types import SimpleNamespace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArgumentError, InsufficientStatisticsError
from extensions import init_extensions
from models import ElementIndex, ElementEstimate, TeleporterClass
from protocol.estimator import (
    accepted_branch_ids,
    correct_for_noise,
    estimate_class_exact,
    estimate_class_sampled,
    estimate_exact,
    estimate_populations,
    estimate_sampled,
    sample_shots,
)
from protocol.plan_compiler import compile_plan, off_diagonal_pairs
from protocol.state_core import basis_state, ghz_state, maximally_mixed, random_density_matrix, werner_ghz
from protocol.teleport_engine import run_exact
from tests.conftest import diag, pure

EPR_ELEMENT = ElementIndex.from_bitstrings('00', '11')


def test_epr_coherence(epr):
    estimate = estimate_exact(epr, EPR_ELEMENT)
    assert estimate.value == pytest.approx(0.5 + 0j, abs=1e-12)
    assert estimate.population_sum == pytest.approx(1.0, abs=1e-12)
    assert estimate.exact and estimate.stderr_re == 0.0


def test_phase_convention_reads_the_stored_entry():
    rho = pure(2, [1, 0, 0, np.exp(1j * np.pi / 4)])
    estimate = estimate_exact(rho, EPR_ELEMENT)
    assert estimate.value == pytest.approx(0.5 * np.exp(-1j * np.pi / 4), abs=1e-12)
    assert estimate.value == pytest.approx(rho.element(0, 3), abs=1e-12)
    swapped = estimate_exact(rho, EPR_ELEMENT.swapped())
    assert swapped.value == pytest.approx(rho.element(3, 0), abs=1e-12)


@pytest.mark.parametrize("element", off_diagonal_pairs(2), ids=lambda e: e.label)
def test_maximally_mixed_has_no_coherence(element):
    assert estimate_exact(maximally_mixed(2), element).value == pytest.approx(0.0, abs=1e-12)


def test_basis_state_pair_is_fully_accepted():
    estimate = estimate_exact(basis_state(2, 0).projector(), EPR_ELEMENT)
    assert estimate.population_sum == pytest.approx(1.0, abs=1e-12)
    assert estimate.value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.slow
def test_exact_recovery_on_random_states(rng):
    checked = 0
    for trial in range(200):
        num_qubits = 2 + trial % 2
        rho = random_density_matrix(num_qubits, rank=int(rng.integers(1, 2 ** num_qubits + 1)), rng=rng)
        populations = rho.diagonal()
        for element in off_diagonal_pairs(num_qubits):
            if populations[element.m] + populations[element.n] <= 1e-6:
                continue
            estimate = estimate_exact(rho, element)
            assert abs(estimate.value - rho.element(element.m, element.n)) < 1e-9
            checked += 1
    assert checked > 0


def test_identity_postselection_matches_subspace(rng):
    rho = random_density_matrix(3, rng=rng)
    element = ElementIndex.from_bitstrings('001', '110')
    strict = estimate_exact(rho, element, postselect='identity')
    assert strict.value == pytest.approx(rho.element(element.m, element.n), abs=1e-10)
    assert strict.postselect == 'identity'

    plan = compile_plan(element)
    table = run_exact(rho, plan, ghz_state(plan.ghz_width).projector())
    assert len(accepted_branch_ids(table, 'identity')) == 1
    with pytest.raises(ArgumentError):
        accepted_branch_ids(table, 'feed-forward')


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75, 1.0])
def test_werner_noise_scales_and_correction_restores(rng, p):
    rho = random_density_matrix(2, rng=rng)
    for element in off_diagonal_pairs(2):
        width = element.hamming_distance + 1
        raw = estimate_exact(rho, element, werner_ghz(width, p))
        truth = rho.element(element.m, element.n)
        assert abs(raw.value - p * truth) < 1e-9
        restored = correct_for_noise(raw, p)
        assert abs(restored.value - truth) < 1e-9
        assert restored.p_correction == pytest.approx(p)


def _estimate(value):
    return ElementEstimate(
        element=EPR_ELEMENT, value=value, normalized_value=value, x_mean=0.0, y_mean=0.0,
        stderr_re=0.1, stderr_im=0.1, shots_used=0, accepted_shots=0, population_sum=1.0,
    )


def test_correct_for_noise_divides():
    corrected = correct_for_noise(_estimate(0.3 + 0j), 0.6)
    assert corrected.value == pytest.approx(0.5)
    assert corrected.stderr_re == pytest.approx(0.1 / 0.6)
    assert correct_for_noise(_estimate(0.3 + 0j), 1.0) == _estimate(0.3 + 0j)
    for p in (0.0, -0.5):
        with pytest.raises(ArgumentError):
            correct_for_noise(_estimate(0.3 + 0j), p)


def test_sampled_runs_are_reproducible(rng):
    rho = random_density_matrix(2, rng=rng)
    element = ElementIndex(2, 1, 2)
    first = estimate_sampled(rho, element, shots=5000, seed=11)
    again = estimate_sampled(rho, element, shots=5000, seed=11)
    other = estimate_sampled(rho, element, shots=5000, seed=12)
    assert first == again
    assert first != other


def test_chunking_and_workers_do_not_change_results(epr):
    init_extensions(SimpleNamespace(N_JOBS=1, SHOT_CHUNK=1000))
    serial = estimate_sampled(epr, EPR_ELEMENT, shots=4500, seed=3)
    init_extensions(SimpleNamespace(N_JOBS=2, SHOT_CHUNK=1000))
    parallel = estimate_sampled(epr, EPR_ELEMENT, shots=4500, seed=3)
    assert serial == parallel


@pytest.mark.slow
def test_epr_sampled_convergence(epr):
    estimate = estimate_sampled(epr, EPR_ELEMENT, shots=10 ** 6, seed=7)
    assert estimate.accepted_shots == 10 ** 6
    assert estimate.population_sum == 1.0
    assert abs(estimate.value.real - 0.5) <= 3 * estimate.stderr_re + 1e-12
    assert abs(estimate.value.imag) <= 3 * estimate.stderr_im + 1e-12


@pytest.mark.slow
def test_stderr_scales_as_inverse_sqrt_shots(epr):
    errors = [estimate_sampled(epr, EPR_ELEMENT, shots=10 ** k, seed=5).stderr_im for k in range(3, 7)]
    for coarse, fine in zip(errors, errors[1:]):
        assert np.sqrt(10) / 2 <= coarse / fine <= 2 * np.sqrt(10)


@pytest.mark.slow
def test_acceptance_fraction_tracks_pair_population(rng):
    rho = random_density_matrix(2, rng=rng)
    element = ElementIndex(2, 0, 1)
    shots = 10 ** 5
    estimate = estimate_sampled(rho, element, shots=shots, seed=21)
    expected = rho.diagonal()[0] + rho.diagonal()[1]
    sigma = np.sqrt(expected * (1 - expected) / shots)
    assert abs(estimate.population_sum - expected) <= 3 * sigma


def test_no_accepted_shots_raises():
    rho = basis_state(2, 1).projector()
    with pytest.raises(InsufficientStatisticsError) as info:
        estimate_sampled(rho, EPR_ELEMENT, shots=10, seed=0)
    assert info.value.accepted_shots == 0


def test_single_basis_coverage_raises(epr):
    with pytest.raises(InsufficientStatisticsError) as info:
        estimate_sampled(epr, EPR_ELEMENT, shots=1, seed=0)
    assert info.value.accepted_shots == 1


def test_shot_records(epr):
    plan = compile_plan(EPR_ELEMENT)
    table = run_exact(epr, plan, ghz_state(3).projector())
    batch = sample_shots(table, 200, seed=4, labels=(0, 2, 0, 3))
    records = list(batch.records(table))
    assert len(records) == 200
    assert {r.prober_basis for r in records} <= {'X', 'Y'}
    assert {r.prober_result for r in records} <= {-1, 1}
    assert all(len(r.bell_outcomes) == 2 for r in records)


def test_populations(epr):
    assert_allclose(estimate_populations(epr), [0.5, 0, 0, 0.5], atol=1e-15)
    assert_allclose(estimate_populations(maximally_mixed(2)), [0.25] * 4)
    sampled = estimate_populations(diag([0.1, 0.2, 0.3, 0.4]), shots=1000, seed=9)
    assert sampled.sum() == pytest.approx(1.0)
    assert_allclose(sampled, estimate_populations(diag([0.1, 0.2, 0.3, 0.4]), shots=1000, seed=9))
    with pytest.raises(ArgumentError):
        estimate_populations(epr, shots=-5)


def test_class_reuse_exact(rng):
    rho = random_density_matrix(2, rng=rng)
    estimates = estimate_class_exact(rho, TeleporterClass(2, 0b01))
    assert set(estimates) == {ElementIndex(2, 0, 1), ElementIndex(2, 2, 3)}
    for element, estimate in estimates.items():
        assert estimate.value == pytest.approx(rho.element(element.m, element.n), abs=1e-10)


def test_class_reuse_sampled_splits_the_shots(rng):
    rho = random_density_matrix(2, rng=rng)
    cls = TeleporterClass(2, 0b01)
    estimates = estimate_class_sampled(rho, cls, shots=20000, seed=2)
    assert set(estimates) == set(cls.members())
    assert sum(e.accepted_shots for e in estimates.values()) == 20000
    assert estimates == estimate_class_sampled(rho, cls, shots=20000, seed=2)


def test_recovery_is_hermitian(rng):
    for trial in range(20):
        num_qubits = 2 + trial % 2
        rho = random_density_matrix(num_qubits, rng=rng)
        for element in off_diagonal_pairs(num_qubits):
            forward = estimate_exact(rho, element).value
            backward = estimate_exact(rho, element.swapped()).value
            assert backward == pytest.approx(np.conj(forward), abs=1e-10)


def test_recovered_coherence_respects_population_bound(rng):
    for trial in range(20):
        num_qubits = 2 + trial % 2
        rho = random_density_matrix(num_qubits, rank=1 + trial % 3, rng=rng)
        populations = rho.diagonal()
        for element in off_diagonal_pairs(num_qubits):
            bound = np.sqrt(populations[element.m] * populations[element.n])
            assert abs(estimate_exact(rho, element).value) <= bound + 1e-10
