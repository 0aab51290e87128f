"""
Dense linear-algebra substrate: tensor products, partial traces, Pauli
expectations, fidelity and the named states the protocol runs on.

Qubit 1 is the most significant bit of every basis index; tensor(a, b) places
a's qubits first.
"""

import logging
import string

import numpy as np
from scipy import linalg

from errors import ArgumentError, NumericalIntegrityError, ResourceError
from extensions import numeric
from models import DensityMatrix, PureState

logger = logging.getLogger(__name__)


def check_qubit_cap(total_qubits):
    if total_qubits > numeric.qubit_cap:
        raise ResourceError(
            f"{total_qubits} qubits exceed the dense-simulation cap of {numeric.qubit_cap}")


def tensor(a, b):
    check_qubit_cap(a.num_qubits + b.num_qubits)
    # product of valid states is valid
    return DensityMatrix(a.num_qubits + b.num_qubits, np.kron(a.entries, b.entries), check=False)


def partial_trace(rho, keep):
    """Reduced state on the 1-based qubit positions in `keep` (output in ascending order)."""
    keep = sorted(set(keep))
    if not keep:
        raise ArgumentError("partial_trace needs at least one qubit to keep")
    n = rho.num_qubits
    if keep[0] < 1 or keep[-1] > n:
        raise ArgumentError(f"Qubit positions {keep} outside 1..{n}")

    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = [letters[n + q] if (q + 1) in keep else rows[q] for q in range(n)]
    out = [rows[q - 1] for q in keep] + [cols[q - 1] for q in keep]
    subscripts = f"{''.join(rows)}{''.join(cols)}->{''.join(out)}"

    reduced = np.einsum(subscripts, rho.entries.reshape((2,) * (2 * n)))
    dim = 2 ** len(keep)
    return DensityMatrix(len(keep), reduced.reshape(dim, dim), check=False)


def basis_state(num_qubits, index):
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[index] = 1.0
    return PureState(num_qubits, amps)


def ghz_state(width):
    if width < 2:
        raise ArgumentError(f"GHZ width must be >= 2, got {width}")
    amps = np.zeros(2 ** width, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(width, amps)


def epr_state():
    return ghz_state(2)


def maximally_mixed(num_qubits):
    dim = 2 ** num_qubits
    return DensityMatrix(num_qubits, np.eye(dim) / dim, check=False)


def werner_ghz(width, p):
    """p |GHZ><GHZ| + (1 - p) I / 2^width."""
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"Werner parameter must lie in [0, 1], got {p}")
    ghz = ghz_state(width).projector().entries
    mixed = maximally_mixed(width).entries
    return DensityMatrix(width, p * ghz + (1 - p) * mixed, check=False)


def random_density_matrix(num_qubits, rank=None, rng=None):
    """Ginibre-ensemble mixed state of the given rank (full rank by default)."""
    rng = np.random.default_rng() if rng is None else rng
    dim = 2 ** num_qubits
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ArgumentError(f"rank must lie in [1, {dim}], got {rank}")
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(num_qubits, rho / np.trace(rho).real)


def expectation(rho, obs):
    if rho.num_qubits != obs.num_qubits:
        raise ArgumentError(
            f"Observable acts on {obs.num_qubits} qubits, state has {rho.num_qubits}")
    value = complex(np.trace(rho.entries @ obs.matrix()))
    if abs(value.imag) > numeric.imag_tol:
        raise NumericalIntegrityError(
            f"<{obs}> has imaginary residue {value.imag:.3e}; operator or state is not Hermitian")
    return value.real


def _psd_sqrt(matrix):
    w, v = linalg.eigh((matrix + matrix.conj().T) / 2)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def fidelity(a, b):
    """Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2; the overlap <psi|a|psi> when b is pure."""
    if a.num_qubits != b.num_qubits:
        raise ArgumentError("fidelity needs states of equal dimension")
    for rho in (a, b):
        if rho.min_eigenvalue() < -numeric.psd_tol:
            raise ArgumentError("fidelity is only defined for positive semidefinite inputs")

    for first, second in ((a, b), (b, a)):
        if abs(second.purity() - 1.0) < 1e-12:
            w, v = linalg.eigh(second.entries)
            psi = v[:, -1]
            overlap = float(np.real(np.vdot(psi, first.entries @ psi)))
            return float(np.clip(overlap, 0.0, 1.0))

    root = _psd_sqrt(a.entries)
    inner = _psd_sqrt(root @ b.entries @ root)
    return float(np.clip(np.real(np.trace(inner)) ** 2, 0.0, 1.0))


def project_psd(matrix):
    """Nearest PSD unit-trace matrix by eigenvalue clipping."""
    hermitian = (np.asarray(matrix) + np.asarray(matrix).conj().T) / 2
    w, v = linalg.eigh(hermitian)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise NumericalIntegrityError("PSD projection removed the whole spectrum")
    w = w / w.sum()
    projected = (v * w) @ v.conj().T
    return (projected + projected.conj().T) / 2


def apply_pauli(rho, pauli):
    """P rho P for a Pauli string P."""
    op = pauli.matrix()
    return DensityMatrix(rho.num_qubits, op @ rho.entries @ op.conj().T, check=False)
