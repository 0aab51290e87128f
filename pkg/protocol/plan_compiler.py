"""
Element index -> measurement plan.

Qubit i goes to a Z measurement when m_i == n_i and to a Bell measurement with
an ancilla when m_i != n_i. Ancilla slots are handed out in ascending qubit
position; the prober is the last qubit of the GHZ register (width k + 1).
"""

import itertools
import logging
from collections import defaultdict

from errors import ArgumentError, DiagonalElementError
from models import BellRole, ElementIndex, MeasurementPlan, TeleporterClass, ZRole

logger = logging.getLogger(__name__)


def compile_plan(element):
    if element.is_diagonal:
        raise DiagonalElementError()

    roles, z_set, bell_set = [], [], []
    for position in range(1, element.num_qubits + 1):
        m_bit = element.bit(element.m, position)
        n_bit = element.bit(element.n, position)
        if m_bit == n_bit:
            roles.append(ZRole(expected_bit=m_bit))
            z_set.append(position)
        else:
            bell_set.append(position)
            roles.append(BellRole(ancilla_slot=len(bell_set)))

    k = len(bell_set)
    plan = MeasurementPlan(
        element=element,
        roles=tuple(roles),
        k=k,
        ghz_width=k + 1,
        z_set=tuple(z_set),
        bell_set=tuple(bell_set),
    )
    logger.debug("Compiled plan for %s: roles=%s ghz_width=%d",
                 element.label, [r.label for r in roles], plan.ghz_width)
    return plan


def classify(element):
    if element.is_diagonal:
        raise DiagonalElementError()
    return TeleporterClass(element.num_qubits, element.mask)


def off_diagonal_pairs(num_qubits):
    """All unordered off-diagonal elements (m < n) in index order."""
    return [ElementIndex(num_qubits, m, n)
            for m, n in itertools.combinations(range(2 ** num_qubits), 2)]


def enumerate_classes(num_qubits):
    """Teleporter classes of an N-qubit register, each with its member elements."""
    groups = defaultdict(list)
    for element in off_diagonal_pairs(num_qubits):
        groups[classify(element)].append(element)
    return {cls: tuple(members) for cls, members in sorted(groups.items())}


def group_by_class(elements):
    groups = defaultdict(list)
    for element in elements:
        groups[classify(element)].append(element)
    return {cls: tuple(sorted(members)) for cls, members in sorted(groups.items())}


def settings_for_tomography(num_qubits):
    if num_qubits < 1:
        raise ArgumentError(f"num_qubits must be >= 1, got {num_qubits}")
    return 3 ** num_qubits
