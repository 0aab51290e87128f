"""
Exact simulation of one logical-qubit teleportation.

Register layout of the joint state: system qubits 1..N, then GHZ ancillas
1..k, then the prober. For every joint outcome (Z results on the Z-role
qubits, Bell results on each system/ancilla pair) the engine computes the
outcome probability and the conditional prober state by contracting the
joint density matrix with the outcome's product-of-projectors vector.

Outcome algebra: Bell result (a, b) on pair j means the system qubit was
found with bit a_j relative to the prober's |0> branch, and b_j contributes a
relative phase. The teleported ordered subspace is (m', n') with m' carrying
the Z results and the a_j bits, n' = m' xor (m xor n); the prober holds
[[rho_m'm', s rho_m'n'], [s rho_n'm', rho_n'n']] with s = (-1)^(sum b_j).
"""

import itertools
import logging

import numpy as np

from errors import ArgumentError, UnmeasurableElementError
from extensions import numeric
from models import (
    PAULI_MATRICES,
    BellOutcome,
    Branch,
    BranchTable,
    DensityMatrix,
    PauliString,
)
from protocol.state_core import check_qubit_cap, tensor

logger = logging.getLogger(__name__)

BRANCH_CHUNK = 256


def bell_outcomes():
    return tuple(BellOutcome(a, b) for a in (0, 1) for b in (0, 1))


def bell_vector(outcome):
    """Bell state on (system, ancilla) as a 4-vector: (-1)^(b x) / sqrt2 on |x, x xor a>."""
    vec = np.zeros(4, dtype=complex)
    for x in (0, 1):
        vec[2 * x + (x ^ outcome.a)] = (-1) ** (outcome.b * x) / np.sqrt(2)
    return vec


def enumerate_outcomes(plan):
    """Joint outcomes in branch-id order: Z results outermost, then Bell results per pair."""
    z_space = itertools.product((0, 1), repeat=len(plan.z_set))
    for z_outcomes in z_space:
        for bell in itertools.product(bell_outcomes(), repeat=plan.k):
            yield tuple(z_outcomes), tuple(bell)


def correction_for(z_outcomes, bell, plan):
    """Pauli correction P and teleported ordered subspace (P|m>, P|n>) for one outcome."""
    if len(z_outcomes) != len(plan.z_set) or len(bell) != plan.k:
        raise ArgumentError(
            f"Outcome arity ({len(z_outcomes)} Z, {len(bell)} Bell) does not match the plan "
            f"({len(plan.z_set)} Z, {plan.k} Bell)")

    element = plan.element
    n_qubits = element.num_qubits
    m_prime = element.m
    z_bits = [0] * n_qubits
    for position, bit in zip(plan.z_set, z_outcomes):
        m_prime = _set_bit(m_prime, n_qubits, position, bit)
    for position, outcome in zip(plan.bell_set, bell):
        m_prime = _set_bit(m_prime, n_qubits, position, outcome.a)
        z_bits[position - 1] = outcome.b

    flips = element.m ^ m_prime
    x_bits = [(flips >> (n_qubits - p)) & 1 for p in range(1, n_qubits + 1)]
    correction = PauliString.from_xz(x_bits, z_bits)
    return correction, (m_prime, m_prime ^ element.mask)


def _set_bit(index, n_qubits, position, bit):
    shift = n_qubits - position
    return (index & ~(1 << shift)) | (bit << shift)


def _register_bits(total_measured):
    idx = np.arange(2 ** total_measured)
    return np.array([(idx >> (total_measured - 1 - q)) & 1 for q in range(total_measured)])


def _branch_vectors(plan, bits, outcomes):
    """Rows are the (real) projection vectors of each outcome on the measured qubits."""
    n_qubits = plan.num_qubits
    count = len(outcomes)
    z = np.array([o[0] for o in outcomes], dtype=int).reshape(count, len(plan.z_set))
    a = np.array([[bo.a for bo in o[1]] for o in outcomes], dtype=int).reshape(count, plan.k)
    b = np.array([[bo.b for bo in o[1]] for o in outcomes], dtype=int).reshape(count, plan.k)

    phi = np.ones((count, bits.shape[1]))
    for col, position in enumerate(plan.z_set):
        s = bits[position - 1][None, :]
        phi *= (s == z[:, col:col + 1])
    for j, position in enumerate(plan.bell_set):
        s = bits[position - 1][None, :]
        ancilla = bits[n_qubits + j][None, :]
        match = ancilla == (s ^ a[:, j:j + 1])
        sign = np.where((b[:, j:j + 1] & s) == 1, -1.0, 1.0)
        phi *= match * sign / np.sqrt(2)
    return phi


def run_exact(rho, plan, ghz):
    n_qubits, k = plan.num_qubits, plan.k
    if rho.num_qubits != n_qubits:
        raise ArgumentError(f"Plan is for {n_qubits} system qubits, state has {rho.num_qubits}")
    if ghz.num_qubits != plan.ghz_width:
        raise ArgumentError(f"Plan needs a GHZ register of width {plan.ghz_width}, got {ghz.num_qubits}")
    check_qubit_cap(n_qubits + plan.ghz_width)

    joint = tensor(rho, ghz)
    measured_dim = 2 ** (n_qubits + k)
    r4 = joint.entries.reshape(measured_dim, 2, measured_dim, 2)
    bits = _register_bits(n_qubits + k)

    outcomes = list(enumerate_outcomes(plan))

    element = plan.element
    target = {element.m, element.n}
    branches, target_ids = [], []
    for start in range(0, len(outcomes), BRANCH_CHUNK):
        chunk = outcomes[start:start + BRANCH_CHUNK]
        phi = _branch_vectors(plan, bits, chunk)
        half = np.tensordot(phi.conj(), r4, axes=([1], [0]))
        probers = np.einsum('bidj,bd->bij', half, phi)

        for offset, ((z_outcomes, bell), block) in enumerate(zip(chunk, probers)):
            branch_id = start + offset
            block = (block + block.conj().T) / 2
            probability = float(np.real(np.trace(block)))
            prober = None
            if probability >= numeric.negligible_prob:
                prober = DensityMatrix(1, block / probability, check=False)
            else:
                probability = max(probability, 0.0)
            correction, subspace = correction_for(z_outcomes, bell, plan)
            branches.append(Branch(
                branch_id=branch_id,
                z_outcomes=z_outcomes,
                bell_outcomes=bell,
                probability=probability,
                correction=correction,
                subspace=subspace,
                phase_flip=bool(sum(o.b for o in bell) % 2),
                prober_state=prober,
            ))
            if set(subspace) == target:
                target_ids.append(branch_id)

    table = BranchTable(plan=plan, branches=tuple(branches), target_branch_ids=tuple(target_ids))
    logger.debug("Branch table for %s: %d branches, target probability %.6f",
                 element.label, len(branches), table.target_probability)
    return table


def prober_correction(branch, first_index):
    """Prober-side Pauli mapping the branch's prober onto the logical qubit with |0> <-> first_index."""
    swap = int(branch.subspace[0] != first_index)
    return PauliString.from_xz([swap], [int(branch.phase_flip)])


def corrected_bloch(branch, first_index):
    letter = prober_correction(branch, first_index).letters
    raw = branch.prober_state.bloch()
    return np.array([
        -value if letter not in ('I', axis) else value
        for axis, value in zip('XYZ', raw)
    ])


def weighted_bloch(table, branch_ids=None, first_index=None):
    """Sum over branches of probability x corrected prober Bloch vector (target branches by default)."""
    branch_ids = table.target_branch_ids if branch_ids is None else branch_ids
    first_index = table.plan.element.m if first_index is None else first_index
    total = np.zeros(3)
    for branch_id in branch_ids:
        branch = table.branches[branch_id]
        if branch.defined:
            total += branch.probability * corrected_bloch(branch, first_index)
    return total


def target_prober_state(table):
    """Probability-weighted, corrected prober state over the target branches."""
    element = table.plan.element
    accumulated = np.zeros((2, 2), dtype=complex)
    total = 0.0
    for branch in table.target_branches:
        if not branch.defined:
            continue
        fix = PAULI_MATRICES[prober_correction(branch, element.m).letters]
        accumulated += branch.probability * (fix @ branch.prober_state.entries @ fix.conj().T)
        total += branch.probability
    if total < numeric.negligible_prob:
        raise UnmeasurableElementError(
            f"Element {element.label} cannot be teleported: rho_mm + rho_nn is negligible")
    return DensityMatrix(1, accumulated / total)
