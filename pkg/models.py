"""
Domain types for the teleportation read-out simulator.

Conventions used everywhere:
- qubit 1 is the most significant bit of a basis index (m = m1 m2 ... mN);
- qubit positions in public APIs are 1-based;
- every value object is immutable; numpy payloads are flagged read-only.
"""

import functools
from dataclasses import InitVar, dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from config import Config
from errors import ArgumentError
from extensions import numeric

PAULI_MATRICES = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}

for _matrix in PAULI_MATRICES.values():
    _matrix.setflags(write=False)


def _readonly(values, dtype=complex):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def bitstring(index, num_qubits):
    return format(index, f'0{num_qubits}b')


def parse_bitstring(bits):
    if not bits or any(c not in '01' for c in bits):
        raise ArgumentError(f"Invalid bitstring {bits!r}: expected characters 0/1")
    return int(bits, 2)


def to_pairs(values):
    """Complex array -> nested lists of [re, im] pairs (row-major)."""
    arr = np.asarray(values, dtype=complex)
    pairs = np.stack([arr.real, arr.imag], axis=-1)
    return pairs.tolist()


def from_pairs(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.shape[-1] != 2:
        raise ArgumentError("Complex values must be given as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _check_num_qubits(num_qubits):
    if int(num_qubits) != num_qubits or num_qubits < 1:
        raise ArgumentError(f"num_qubits must be an integer >= 1, got {num_qubits}")


# -----------------------------------------------------------------------------
# state-core
# -----------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class PureState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        amps = _readonly(self.amplitudes).reshape(-1)
        if amps.size != 2 ** self.num_qubits:
            raise ArgumentError(
                f"Expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > numeric.trace_tol:
            raise ArgumentError(f"State is not normalised (norm^2 = {norm!r})")
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def normalized(cls, num_qubits, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ArgumentError("Cannot normalise the zero vector")
        return cls(num_qubits, amps / norm)

    def projector(self):
        a = self.amplitudes
        return DensityMatrix(self.num_qubits, np.outer(a, a.conj()), check=False)

    def to_json(self):
        return {'num_qubits': self.num_qubits, 'amplitudes': to_pairs(self.amplitudes)}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    num_qubits: int
    entries: np.ndarray
    check: InitVar[bool] = True

    def __post_init__(self, check):
        _check_num_qubits(self.num_qubits)
        dim = 2 ** self.num_qubits
        entries = _readonly(self.entries)
        if entries.shape != (dim, dim):
            raise ArgumentError(f"Expected a {dim}x{dim} matrix, got shape {entries.shape}")
        object.__setattr__(self, 'entries', entries)
        if check:
            self.validate()

    @property
    def dim(self):
        return 2 ** self.num_qubits

    def validate(self):
        """Raise ArgumentError unless Hermitian, unit trace and PSD within the numeric policy."""
        asym = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if asym > numeric.hermitian_tol:
            raise ArgumentError(f"Matrix is not Hermitian (max deviation {asym:.3e})")
        trace = complex(np.trace(self.entries))
        if abs(trace - 1.0) > numeric.trace_tol:
            raise ArgumentError(f"Trace must be 1, got {trace!r}")
        smallest = self.min_eigenvalue()
        if smallest < -numeric.psd_tol:
            raise ArgumentError(f"Matrix is not positive semidefinite (smallest eigenvalue {smallest:.3e})")
        return self

    def min_eigenvalue(self):
        hermitian = (self.entries + self.entries.conj().T) / 2
        return float(linalg.eigvalsh(hermitian, subset_by_index=[0, 0])[0])

    def diagonal(self):
        return np.real(np.diag(self.entries)).copy()

    def element(self, m, n):
        return complex(self.entries[m, n])

    def purity(self):
        return float(np.real(np.trace(self.entries @ self.entries)))

    def bloch(self):
        """(<X>, <Y>, <Z>) of a one-qubit state."""
        if self.num_qubits != 1:
            raise ArgumentError("Bloch vector is only defined for one qubit")
        return tuple(float(np.real(np.trace(self.entries @ PAULI_MATRICES[p]))) for p in 'XYZ')

    def to_json(self):
        return {'num_qubits': self.num_qubits, 'matrix': to_pairs(self.entries)}

    @classmethod
    def from_json(cls, payload):
        """Accept either {"num_qubits", "matrix"} or {"num_qubits", "amplitudes"}."""
        if 'num_qubits' not in payload:
            raise ArgumentError("State JSON needs a 'num_qubits' field")
        num_qubits = int(payload['num_qubits'])
        if 'matrix' in payload:
            return cls(num_qubits, from_pairs(payload['matrix']))
        if 'amplitudes' in payload:
            return PureState(num_qubits, from_pairs(payload['amplitudes'])).projector()
        raise ArgumentError("State JSON needs either 'matrix' or 'amplitudes'")


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        letters = str(self.letters).upper()
        if not letters or any(c not in PAULI_MATRICES for c in letters):
            raise ArgumentError(f"Invalid Pauli string {self.letters!r}")
        object.__setattr__(self, 'letters', letters)

    @property
    def num_qubits(self):
        return len(self.letters)

    @classmethod
    def identity(cls, num_qubits):
        return cls('I' * num_qubits)

    @classmethod
    def from_xz(cls, x_bits, z_bits):
        """Letter per qubit from X and Z exponents (Y stands for XZ up to phase)."""
        table = {(0, 0): 'I', (1, 0): 'X', (0, 1): 'Z', (1, 1): 'Y'}
        return cls(''.join(table[(int(x), int(z))] for x, z in zip(x_bits, z_bits)))

    @property
    def is_identity(self):
        return set(self.letters) == {'I'}

    def matrix(self):
        return functools.reduce(np.kron, (PAULI_MATRICES[c] for c in self.letters))

    def apply(self, state):
        if state.num_qubits != self.num_qubits:
            raise ArgumentError("Pauli string and state have different qubit counts")
        psi = np.array(state.amplitudes).reshape((2,) * self.num_qubits)
        for axis, letter in enumerate(self.letters):
            if letter != 'I':
                psi = np.moveaxis(np.tensordot(PAULI_MATRICES[letter], psi, axes=([1], [axis])), 0, axis)
        return PureState(state.num_qubits, psi.reshape(-1))

    def __str__(self):
        return self.letters


# -----------------------------------------------------------------------------
# plan-compiler
# -----------------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class ElementIndex:
    num_qubits: int
    m: int
    n: int

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        limit = 2 ** self.num_qubits
        for name, value in (('m', self.m), ('n', self.n)):
            if not 0 <= value < limit:
                raise ArgumentError(f"Index {name}={value} outside [0, {limit}) for {self.num_qubits} qubits")

    @classmethod
    def from_bitstrings(cls, m_bits, n_bits):
        if len(m_bits) != len(n_bits):
            raise ArgumentError(f"Bitstrings {m_bits!r} and {n_bits!r} have different lengths")
        return cls(len(m_bits), parse_bitstring(m_bits), parse_bitstring(n_bits))

    @property
    def is_diagonal(self):
        return self.m == self.n

    @property
    def mask(self):
        return self.m ^ self.n

    @property
    def hamming_distance(self):
        return bin(self.mask).count('1')

    @property
    def m_bits(self):
        return bitstring(self.m, self.num_qubits)

    @property
    def n_bits(self):
        return bitstring(self.n, self.num_qubits)

    def bit(self, index, position):
        """Bit of `index` at 1-based qubit `position`."""
        return (index >> (self.num_qubits - position)) & 1

    def swapped(self):
        return ElementIndex(self.num_qubits, self.n, self.m)

    @property
    def label(self):
        return f"{self.m_bits},{self.n_bits}"


@dataclass(frozen=True)
class ZRole:
    expected_bit: int

    @property
    def label(self):
        return f"Z:{self.expected_bit}"


@dataclass(frozen=True)
class BellRole:
    ancilla_slot: int

    @property
    def label(self):
        return f"Bell:{self.ancilla_slot}"


@dataclass(frozen=True)
class MeasurementPlan:
    element: ElementIndex
    roles: Tuple[object, ...]
    k: int
    ghz_width: int
    z_set: Tuple[int, ...]
    bell_set: Tuple[int, ...]

    @property
    def num_qubits(self):
        return self.element.num_qubits

    @property
    def total_qubits(self):
        return self.num_qubits + self.ghz_width

    def to_json(self):
        return {
            'm': self.element.m_bits,
            'n': self.element.n_bits,
            'roles': [role.label for role in self.roles],
            'k': self.k,
            'ghz_width': self.ghz_width,
            'z_set': list(self.z_set),
            'bell_set': list(self.bell_set),
        }


@dataclass(frozen=True, order=True)
class TeleporterClass:
    num_qubits: int
    parity_pattern: int

    @property
    def label(self):
        return bitstring(self.parity_pattern, self.num_qubits)

    def members(self):
        """Unordered off-diagonal elements (m < n) sharing this parity pattern."""
        return tuple(
            ElementIndex(self.num_qubits, m, m ^ self.parity_pattern)
            for m in range(2 ** self.num_qubits)
            if m < m ^ self.parity_pattern
        )


# -----------------------------------------------------------------------------
# teleport-engine
# -----------------------------------------------------------------------------
BELL_NAMES = {(0, 0): 'Phi+', (0, 1): 'Phi-', (1, 0): 'Psi+', (1, 1): 'Psi-'}


@dataclass(frozen=True)
class BellOutcome:
    """(I (x) X^a Z^b) (|00> + |11>)/sqrt2 on (system qubit, ancilla)."""
    a: int
    b: int

    @property
    def label(self):
        return BELL_NAMES[(self.a, self.b)]


@dataclass(frozen=True, eq=False)
class Branch:
    branch_id: int
    z_outcomes: Tuple[int, ...]
    bell_outcomes: Tuple[BellOutcome, ...]
    probability: float
    correction: PauliString
    subspace: Tuple[int, int]
    phase_flip: bool
    prober_state: Optional[DensityMatrix]

    @property
    def defined(self):
        return self.prober_state is not None

    def to_json(self, num_qubits):
        return {
            'id': self.branch_id,
            'z': list(self.z_outcomes),
            'bell': [o.label for o in self.bell_outcomes],
            'probability': self.probability,
            'correction': self.correction.letters,
            'subspace': [bitstring(self.subspace[0], num_qubits), bitstring(self.subspace[1], num_qubits)],
        }


@dataclass(frozen=True, eq=False)
class BranchTable:
    plan: MeasurementPlan
    branches: Tuple[Branch, ...]
    target_branch_ids: Tuple[int, ...]

    @property
    def target_branches(self):
        return tuple(self.branches[i] for i in self.target_branch_ids)

    @property
    def target_probability(self):
        return float(sum(b.probability for b in self.target_branches))

    def probabilities(self):
        return np.array([b.probability for b in self.branches])

    def to_json(self):
        n = self.plan.num_qubits
        return {
            'plan': self.plan.to_json(),
            'target_branch_ids': list(self.target_branch_ids),
            'branches': [b.to_json(n) for b in self.branches],
        }


# -----------------------------------------------------------------------------
# estimator
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ElementEstimate:
    element: ElementIndex
    value: complex
    normalized_value: complex
    x_mean: float
    y_mean: float
    stderr_re: float
    stderr_im: float
    shots_used: int
    accepted_shots: int
    population_sum: float
    p_correction: float = 1.0
    postselect: str = 'subspace'

    @property
    def exact(self):
        return self.shots_used == 0

    def to_json(self):
        return {
            'm': self.element.m_bits,
            'n': self.element.n_bits,
            're': self.value.real,
            'im': self.value.imag,
            'stderr_re': self.stderr_re,
            'stderr_im': self.stderr_im,
            'shots': self.shots_used,
            'accepted': self.accepted_shots,
            'p': self.p_correction,
            'normalized_re': self.normalized_value.real,
            'normalized_im': self.normalized_value.imag,
            'x_mean': self.x_mean,
            'y_mean': self.y_mean,
            'population_sum': self.population_sum,
            'postselect': self.postselect,
        }


@dataclass(frozen=True)
class ShotRecord:
    branch_id: int
    z_outcomes: Tuple[int, ...]
    bell_outcomes: Tuple[BellOutcome, ...]
    prober_basis: str
    prober_result: int


# -----------------------------------------------------------------------------
# noise-models
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class NoiseConfig:
    ghz_werner_p: float = 1.0
    system_depolarizing: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.ghz_werner_p <= 1.0:
            raise ArgumentError(f"ghz_werner_p must lie in [0, 1], got {self.ghz_werner_p}")
        if not 0.0 <= self.system_depolarizing <= 1.0:
            raise ArgumentError(f"system_depolarizing must lie in [0, 1], got {self.system_depolarizing}")

    @property
    def noiseless(self):
        return self.ghz_werner_p == 1.0 and self.system_depolarizing == 0.0

    def to_json(self):
        return {'ghz_werner_p': self.ghz_werner_p, 'system_depolarizing': self.system_depolarizing}


# -----------------------------------------------------------------------------
# sparse-scan / tomo-oracle
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ScanConfig:
    population_threshold: float = Config.POPULATION_THRESHOLD
    shots_per_setting: int = 0
    p_correction: float = 1.0
    reuse_branches: bool = False
    seed: int = 0
    postselect: str = 'subspace'

    def __post_init__(self):
        if not 0.0 <= self.population_threshold < 1.0:
            raise ArgumentError(f"population_threshold must lie in [0, 1), got {self.population_threshold}")
        if self.shots_per_setting < 0:
            raise ArgumentError("shots_per_setting must be >= 0 (0 = exact mode)")
        if not 0.0 < self.p_correction <= 1.0:
            raise ArgumentError(f"p_correction must lie in (0, 1], got {self.p_correction}")

    @property
    def exact(self):
        return self.shots_per_setting == 0

    @property
    def effective_threshold(self):
        if self.exact:
            return self.population_threshold
        return max(self.population_threshold, 5.0 / self.shots_per_setting)


@dataclass(frozen=True, eq=False)
class ScanReport:
    num_qubits: int
    populations: np.ndarray
    support: Tuple[int, ...]
    candidates: Tuple[ElementIndex, ...]
    estimates: Tuple[ElementEstimate, ...]
    settings_used: int
    tomography_settings: int
    reconstructed: DensityMatrix
    psd_projected: bool
    skipped: Tuple[ElementIndex, ...] = ()


@dataclass(frozen=True, eq=False)
class TomographyResult:
    reconstructed: DensityMatrix
    settings_used: int
    expectations: Dict[str, float]
    setting_probabilities: Dict[str, np.ndarray] = field(default_factory=dict)
    shots_per_setting: int = 0
    psd_projected: bool = False


# -----------------------------------------------------------------------------
# benchmark-classes
# -----------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class LogicalTestState:
    label: str
    element: ElementIndex
    embedding: PureState
    bloch: Tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class TeleporterBenchmark:
    teleporter_class: TeleporterClass
    element: ElementIndex
    noise: NoiseConfig
    expectations: Dict[str, Tuple[float, float, float]]
    output_fidelities: Dict[str, float]
    process_fidelity: float
    average_fidelity: float
    ptm: np.ndarray
    chi: np.ndarray
    condition_number: float
    sampled: Dict[str, Tuple[Tuple[float, float, float], Tuple[float, float, float]]] = field(default_factory=dict)
