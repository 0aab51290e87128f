import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import ArgumentError
from models import ElementIndex, NoiseConfig, TeleporterClass
from protocol.benchmark import (
    average_gate_fidelity,
    benchmark_frame,
    benchmark_to_json,
    chi_from_ptm,
    fit_class_scaling,
    fit_werner_p,
    logical_test_states,
    run_benchmark,
    run_class_benchmarks,
)
from protocol.plan_compiler import enumerate_classes

CLASSES = list(enumerate_classes(2))


def test_test_states_embed_the_logical_pair():
    cls = TeleporterClass(2, 0b11)
    states = {s.label: s for s in logical_test_states(cls)}
    assert set(states) == {'0_L', '1_L', '+_L', 'R_L'}
    assert states['0_L'].element == ElementIndex(2, 0, 3)
    assert_allclose(states['+_L'].embedding.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert_allclose(states['R_L'].embedding.amplitudes, np.array([1, 0, 0, 1j]) / np.sqrt(2))
    assert states['R_L'].bloch == (0, 1, 0)


def test_test_states_reject_foreign_element():
    with pytest.raises(ArgumentError):
        logical_test_states(TeleporterClass(2, 0b01), ElementIndex(2, 0, 3))


@pytest.mark.parametrize("cls", CLASSES, ids=lambda c: c.label)
def test_ideal_teleporter_is_identity(cls):
    benchmark = run_benchmark(cls)
    assert benchmark.process_fidelity == pytest.approx(1.0, abs=1e-10)
    for label, value in benchmark.output_fidelities.items():
        assert value == pytest.approx(1.0, abs=1e-10), label
    assert_allclose(benchmark.ptm, np.eye(4), atol=1e-10)
    expected_chi = np.zeros((4, 4))
    expected_chi[0, 0] = 1.0
    assert_allclose(benchmark.chi, expected_chi, atol=1e-10)
    assert average_gate_fidelity(benchmark) == pytest.approx(1.0, abs=1e-10)


def test_non_default_member_of_a_class():
    benchmark = run_benchmark(TeleporterClass(2, 0b01), element=ElementIndex(2, 2, 3))
    assert benchmark.element == ElementIndex(2, 2, 3)
    assert benchmark.process_fidelity == pytest.approx(1.0, abs=1e-10)


def test_werner_noise_is_phase_damping():
    benchmark = run_benchmark(TeleporterClass(2, 0b10), NoiseConfig(ghz_werner_p=0.75))
    assert_allclose(benchmark.expectations['+_L'], (0.75, 0, 0), atol=1e-9)
    assert_allclose(benchmark.expectations['R_L'], (0, 0.75, 0), atol=1e-9)
    assert_allclose(benchmark.expectations['0_L'], (0, 0, 1), atol=1e-9)
    assert_allclose(benchmark.expectations['1_L'], (0, 0, -1), atol=1e-9)
    assert_allclose(benchmark.ptm, np.diag([1, 0.75, 0.75, 1]), atol=1e-9)
    assert benchmark.average_fidelity == pytest.approx((3 + 0.75) / 4, abs=1e-9)


def test_chi_of_a_pauli_channel():
    chi = chi_from_ptm(np.diag([1.0, 1.0, -1.0, -1.0]))
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0
    assert_allclose(chi, expected, atol=1e-12)


def test_condition_number_is_finite():
    benchmark = run_benchmark(CLASSES[0])
    assert 1.0 <= benchmark.condition_number < 10.0


def test_fit_single_werner_p():
    fit = fit_werner_p(0.88, CLASSES)
    assert fit['p'] == pytest.approx(0.52, abs=1e-9)
    assert abs(fit['residual']) < 1e-9


def test_fidelity_is_monotone_in_p():
    fidelities = [run_benchmark(CLASSES[2], NoiseConfig(ghz_werner_p=p)).average_fidelity
                  for p in np.linspace(0, 1, 6)]
    assert all(a < b for a, b in zip(fidelities, fidelities[1:]))


def test_fit_rejects_unreachable_target():
    with pytest.raises(ArgumentError):
        fit_werner_p(0.5, CLASSES)


def test_fit_class_scaling():
    fits = fit_class_scaling({'01': [0.8, 0.82, 0.78], '11': [0.9]})
    assert fits['01']['p'] == pytest.approx(0.8)
    assert fits['01']['rms_residual'] == pytest.approx(np.sqrt(0.0008 / 3))
    assert fits['11'] == {'p': 0.9, 'rms_residual': 0.0}
    with pytest.raises(ArgumentError):
        fit_class_scaling({'10': []})


def test_sampled_error_bars_are_reproducible():
    first = run_benchmark(CLASSES[0], shots=2000, seed=6)
    second = run_benchmark(CLASSES[0], shots=2000, seed=6)
    assert first.sampled == second.sampled
    means, errors = first.sampled['+_L']
    assert means[0] == 1.0 and errors[0] == 0.0
    assert all(0 <= e <= 1 / np.sqrt(2000) + 1e-12 for e in errors)


def test_reports():
    benchmarks = run_class_benchmarks(2)
    assert [b.teleporter_class.label for b in benchmarks] == ['01', '10', '11']
    payload = benchmark_to_json(benchmarks[0])
    assert payload['class'] == '01'
    assert payload['process_fidelity'] == pytest.approx(1.0)
    frame = benchmark_frame(benchmarks)
    assert len(frame) == 12
    assert set(frame['state']) == {'0_L', '1_L', '+_L', 'R_L'}
