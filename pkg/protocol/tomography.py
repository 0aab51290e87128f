"""
Standard Pauli-basis state tomography by linear inversion.

Every qubit is measured in X, Y or Z, giving 3^N settings. A Pauli string's
expectation is the outcome parity over its non-identity qubits, averaged over
every setting that measures those qubits in the right bases; the state is
then sum_P <P> P / 2^N.

Nothing here builds a 2^N x 2^N Pauli operator: parities, the averaging over
compatible settings and the inversion are all applied one qubit axis at a time.
"""

import itertools
import logging

import numpy as np

from errors import ArgumentError, ResourceError
from extensions import cache, numeric, workers
from models import PAULI_MATRICES, DensityMatrix, TomographyResult
from protocol.estimator import shot_generator
from protocol.state_core import check_qubit_cap, project_psd

logger = logging.getLogger(__name__)

TOMOGRAPHY_STREAM = 3

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
# rotate the measured axis onto Z before a computational-basis read-out
BASIS_CHANGE = {
    'X': _HADAMARD,
    'Y': _HADAMARD @ np.diag([1, -1j]),
    'Z': np.eye(2, dtype=complex),
}

# per qubit: outcome bit -> parity sign
_PARITY = np.array([[1.0, 1.0], [1.0, -1.0]])

# per qubit: (setting letter, parity bit) pair -> Pauli letter in IXYZ order.
# I averages the three settings' trivial parity; X/Y/Z take the matching setting.
_SETTING_TO_PAULI = np.zeros((4, 3, 2))
_SETTING_TO_PAULI[0, :, 0] = 1 / 3
for _letter in range(3):
    _SETTING_TO_PAULI[_letter + 1, _letter, 1] = 1.0
_SETTING_TO_PAULI = _SETTING_TO_PAULI.reshape(4, 6)

_PAULI_STACK = np.stack([PAULI_MATRICES[p] for p in 'IXYZ'])


def check_tomography_cap(num_qubits):
    check_qubit_cap(num_qubits)
    if num_qubits > numeric.tomography_cap:
        raise ResourceError(
            f"Tomography of {num_qubits} qubits needs 3^{num_qubits} settings; "
            f"the limit is {numeric.tomography_cap} qubits")


def measurement_settings(num_qubits):
    return [''.join(s) for s in itertools.product('XYZ', repeat=num_qubits)]


def pauli_labels(num_qubits):
    return [''.join(p) for p in itertools.product('IXYZ', repeat=num_qubits)]


def _apply_on_axis(op, tensor, axis):
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [axis])), 0, axis)


def setting_probabilities(rho_entries, setting):
    n = len(setting)
    t = np.asarray(rho_entries).reshape((2,) * (2 * n))
    for q, basis in enumerate(setting):
        if basis == 'Z':
            continue
        u = BASIS_CHANGE[basis]
        t = _apply_on_axis(u, t, q)
        t = _apply_on_axis(u.conj(), t, n + q)
    probs = np.real(np.diagonal(t.reshape(2 ** n, 2 ** n)))
    return np.clip(probs, 0.0, None)


def _settings_block(job):
    rho_entries, settings = job
    return np.array([setting_probabilities(rho_entries, s) for s in settings])


@cache.cached
def setting_distributions(rho_entries):
    """Outcome distribution of every setting; rows follow measurement_settings order."""
    num_qubits = int(np.log2(len(rho_entries)))
    settings = measurement_settings(num_qubits)
    blocks = np.array_split(np.arange(len(settings)), min(len(settings), 4 * workers.n_jobs))
    jobs = [(rho_entries, [settings[i] for i in block]) for block in blocks]
    return np.concatenate(workers.map(_settings_block, jobs))


def _sample_distributions(distributions, shots, seed):
    num_qubits = int(np.log2(distributions.shape[1]))
    sampled = np.empty_like(distributions)
    for index, probs in enumerate(distributions):
        rng = shot_generator(seed, (TOMOGRAPHY_STREAM, num_qubits, index))
        sampled[index] = rng.multinomial(shots, probs / probs.sum()) / shots
    return sampled


def _parities(distributions, num_qubits):
    """Row s, column subset mask (qubit 1 = MSB) -> parity expectation in setting s."""
    t = distributions.reshape((len(distributions),) + (2,) * num_qubits)
    for q in range(num_qubits):
        t = _apply_on_axis(_PARITY, t, q + 1)
    return t.reshape(len(distributions), -1)


def pauli_expectations(num_qubits, distributions):
    """Pauli label -> expectation from the (3^N, 2^N) table of setting distributions."""
    parities = _parities(np.asarray(distributions, dtype=float), num_qubits)
    t = parities.reshape((3,) * num_qubits + (2,) * num_qubits)
    interleaved = [axis for q in range(num_qubits) for axis in (q, num_qubits + q)]
    t = t.transpose(interleaved).reshape((6,) * num_qubits)
    for q in range(num_qubits):
        t = _apply_on_axis(_SETTING_TO_PAULI, t, q)
    return dict(zip(pauli_labels(num_qubits), (float(v) for v in t.reshape(-1))))


def invert(num_qubits, expectations):
    t = np.array([expectations[label] for label in pauli_labels(num_qubits)]).reshape((4,) * num_qubits)
    for _ in range(num_qubits):
        t = np.tensordot(t, _PAULI_STACK, axes=([0], [0]))
    order = list(range(0, 2 * num_qubits, 2)) + list(range(1, 2 * num_qubits, 2))
    dim = 2 ** num_qubits
    return t.transpose(order).reshape(dim, dim) / dim


def _tomograph(rho, shots, seed):
    num_qubits = rho.num_qubits
    check_tomography_cap(num_qubits)
    settings = measurement_settings(num_qubits)
    distributions = setting_distributions(rho.entries)
    if shots:
        distributions = _sample_distributions(distributions, shots, seed)

    expectations = pauli_expectations(num_qubits, distributions)
    entries = invert(num_qubits, expectations)
    entries = (entries + entries.conj().T) / 2

    psd_projected = False
    if shots and np.linalg.eigvalsh(entries)[0] < -numeric.psd_tol:
        entries = project_psd(entries)
        psd_projected = True
        logger.info("Tomography reconstruction projected onto PSD matrices")
    return {
        'reconstructed': DensityMatrix(num_qubits, entries, check=False),
        'settings_used': len(settings),
        'expectations': expectations,
        'setting_probabilities': dict(zip(settings, distributions)),
        'shots_per_setting': shots,
        'psd_projected': psd_projected,
    }


def tomograph_exact(rho):
    return TomographyResult(**_tomograph(rho, 0, 0))


def tomograph_sampled(rho, shots_per_setting, seed=0):
    if shots_per_setting < 1:
        raise ArgumentError(f"shots_per_setting must be >= 1, got {shots_per_setting}")
    return TomographyResult(**_tomograph(rho, shots_per_setting, seed))


def result_to_json(result):
    return {
        'num_qubits': result.reconstructed.num_qubits,
        'settings_used': result.settings_used,
        'shots_per_setting': result.shots_per_setting,
        'psd_projected': result.psd_projected,
        'expectations': result.expectations,
        'reconstructed': result.reconstructed.to_json(),
    }
