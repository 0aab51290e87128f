"""
Teleporter characterisation with four logical test states.

Each teleporter class is fed |m>, |n>, (|m>+|n>)/sqrt2 and (|m>+i|n>)/sqrt2.
The logical Z component comes from the Z^N populations of the pair, X and Y
from the corrected, probability-weighted prober. Four input/output Bloch
pairs fix an affine qubit channel, which gives the Pauli transfer matrix, the
chi matrix and the process fidelity to the identity channel.
"""

import itertools
import logging

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from errors import ArgumentError, DegenerateStateError
from extensions import workers
from models import (
    PAULI_MATRICES,
    ElementIndex,
    LogicalTestState,
    NoiseConfig,
    PureState,
    TeleporterBenchmark,
)
from protocol.estimator import shot_generator
from protocol.noise import ghz_resource, noisy_system
from protocol.plan_compiler import classify, compile_plan, enumerate_classes
from protocol.teleport_engine import run_exact, weighted_bloch

logger = logging.getLogger(__name__)

TEST_STATE_LABELS = ('0_L', '1_L', '+_L', 'R_L')
BENCHMARK_STREAM = 4

# M[(i, j), (a, b)] = tr(s_i s_a s_j s_b) / 2 maps chi to the transfer matrix
_PAULIS = [PAULI_MATRICES[p] for p in 'IXYZ']
_CHI_TO_PTM = np.array([
    [np.trace(si @ sa @ sj @ sb) / 2 for sa, sb in itertools.product(_PAULIS, _PAULIS)]
    for si, sj in itertools.product(_PAULIS, _PAULIS)
])


def logical_test_states(teleporter_class, element=None):
    element = element or ElementIndex(teleporter_class.num_qubits, 0, teleporter_class.parity_pattern)
    if classify(element) != teleporter_class:
        raise ArgumentError(f"Element {element.label} is not in class {teleporter_class.label}")

    dim = 2 ** element.num_qubits
    coefficients = {
        '0_L': (1.0, 0.0),
        '1_L': (0.0, 1.0),
        '+_L': (1 / np.sqrt(2), 1 / np.sqrt(2)),
        'R_L': (1 / np.sqrt(2), 1j / np.sqrt(2)),
    }
    axes = {'0_L': (0, 0, 1), '1_L': (0, 0, -1), '+_L': (1, 0, 0), 'R_L': (0, 1, 0)}

    states = []
    for label in TEST_STATE_LABELS:
        amps = np.zeros(dim, dtype=complex)
        amps[element.m], amps[element.n] = coefficients[label]
        states.append(LogicalTestState(label, element, PureState(element.num_qubits, amps), axes[label]))
    return states


def logical_bloch(rho, table):
    """Logical Bloch vector read out for the table's element."""
    element = table.plan.element
    populations = rho.diagonal()
    total = populations[element.m] + populations[element.n]
    if total <= 0.0:
        raise DegenerateStateError(f"Logical pair {element.label} carries no population")
    x, y, _ = weighted_bloch(table, first_index=element.m) / total
    z = (populations[element.m] - populations[element.n]) / total
    return np.array([x, y, z])


def _transfer_matrix(outputs):
    """Affine channel r -> T r + t from the outputs of 0_L, 1_L, +_L, R_L."""
    r0, r1, rp, rr = (outputs[label] for label in TEST_STATE_LABELS)
    shift = (r0 + r1) / 2
    linear = np.column_stack([rp - shift, rr - shift, (r0 - r1) / 2])
    ptm = np.eye(4)
    ptm[1:, 0] = shift
    ptm[1:, 1:] = linear
    return ptm


def chi_from_ptm(ptm):
    chi = linalg.solve(_CHI_TO_PTM, ptm.astype(complex).reshape(16))
    chi = chi.reshape(4, 4)
    return (chi + chi.conj().T) / 2


def input_condition_number(states):
    rows = [[1.0, *s.bloch] for s in states]
    return float(np.linalg.cond(np.array(rows)))


def _sample_axes(bloch, shots, seed, labels):
    rng = shot_generator(seed, labels)
    means = 2 * rng.binomial(shots, (1 + np.clip(bloch, -1, 1)) / 2) / shots - 1
    stderr = np.sqrt(np.clip(1 - means ** 2, 0, None) / shots)
    return tuple(float(v) for v in means), tuple(float(v) for v in stderr)


def run_benchmark(teleporter_class, noise=None, element=None, shots=0, seed=0):
    noise = noise or NoiseConfig()
    states = logical_test_states(teleporter_class, element)
    element = states[0].element
    plan = compile_plan(element)
    ghz = ghz_resource(plan.ghz_width, noise)

    outputs, fidelities, sampled = {}, {}, {}
    for index, state in enumerate(states):
        rho = noisy_system(state.embedding.projector(), noise)
        table = run_exact(rho, plan, ghz)
        out = logical_bloch(rho, table)
        outputs[state.label] = out
        fidelities[state.label] = float((1 + out @ np.array(state.bloch)) / 2)
        if shots:
            labels = (BENCHMARK_STREAM, element.num_qubits, teleporter_class.parity_pattern, index)
            sampled[state.label] = _sample_axes(out, shots, seed, labels)

    ptm = _transfer_matrix(outputs)
    condition = input_condition_number(states)
    if condition > 1e6:
        logger.warning("Benchmark input set is ill-conditioned (cond %.3e)", condition)
    benchmark = TeleporterBenchmark(
        teleporter_class=teleporter_class,
        element=element,
        noise=noise,
        expectations={label: tuple(float(v) for v in out) for label, out in outputs.items()},
        output_fidelities=fidelities,
        process_fidelity=float((1 + np.trace(ptm[1:, 1:])) / 4),
        average_fidelity=float(np.mean(list(fidelities.values()))),
        ptm=ptm,
        chi=chi_from_ptm(ptm),
        condition_number=condition,
        sampled=sampled,
    )
    logger.info("Teleporter %s: process fidelity %.6f", teleporter_class.label, benchmark.process_fidelity)
    return benchmark


def average_gate_fidelity(benchmark):
    return (2 * benchmark.process_fidelity + 1) / 3


def _benchmark_job(job):
    return run_benchmark(*job)


def run_class_benchmarks(num_qubits=2, noise=None, shots=0, seed=0):
    jobs = [(cls, noise, None, shots, seed) for cls in enumerate_classes(num_qubits)]
    return workers.map(_benchmark_job, jobs)


def _mean_output_fidelity(p, classes):
    noise = NoiseConfig(ghz_werner_p=p)
    return float(np.mean([run_benchmark(cls, noise).average_fidelity for cls in classes]))


def fit_werner_p(target_fidelity, classes=None):
    """Single Werner p whose mean output fidelity over the classes hits the target."""
    classes = list(classes or enumerate_classes(2))
    low, high = _mean_output_fidelity(0.0, classes), _mean_output_fidelity(1.0, classes)
    if not low <= target_fidelity <= high:
        raise ArgumentError(
            f"Target fidelity {target_fidelity} outside the reachable range [{low:.6f}, {high:.6f}]")

    p = optimize.brentq(lambda q: _mean_output_fidelity(q, classes) - target_fidelity, 0.0, 1.0, xtol=1e-12)
    residual = _mean_output_fidelity(p, classes) - target_fidelity
    return {'p': float(p), 'residual': float(residual), 'target': float(target_fidelity)}


def fit_class_scaling(factors):
    """Least-squares p per class from measured/ideal coherence ratios."""
    fits = {}
    for label, values in factors.items():
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise ArgumentError(f"No scaling factors given for class {label}")
        p = float(values.mean())
        fits[label] = {'p': p, 'rms_residual': float(np.sqrt(np.mean((values - p) ** 2)))}
    return fits


def benchmark_to_json(benchmark):
    return {
        'class': benchmark.teleporter_class.label,
        'm': benchmark.element.m_bits,
        'n': benchmark.element.n_bits,
        'noise': benchmark.noise.to_json(),
        'expectations': {k: list(v) for k, v in benchmark.expectations.items()},
        'output_fidelities': benchmark.output_fidelities,
        'average_fidelity': benchmark.average_fidelity,
        'process_fidelity': benchmark.process_fidelity,
        'average_gate_fidelity': average_gate_fidelity(benchmark),
        'ptm': benchmark.ptm.tolist(),
        'chi': [[[z.real, z.imag] for z in row] for row in benchmark.chi],
        'condition_number': benchmark.condition_number,
        'sampled': {k: {'mean': list(v[0]), 'stderr': list(v[1])} for k, v in benchmark.sampled.items()},
    }


def benchmark_frame(benchmarks):
    rows = []
    for b in benchmarks:
        for label in TEST_STATE_LABELS:
            x, y, z = b.expectations[label]
            row = {'class': b.teleporter_class.label, 'state': label, 'x': x, 'y': y, 'z': z,
                   'fidelity': b.output_fidelities[label], 'process_fidelity': b.process_fidelity}
            if label in b.sampled:
                row.update({f'stderr_{axis}': s for axis, s in zip('xyz', b.sampled[label][1])})
            rows.append(row)
    return pd.DataFrame(rows)
