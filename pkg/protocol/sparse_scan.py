"""
Two-step full-state read-out.

Step 1 reads the populations with one Z^N setting and keeps the basis states
above threshold (the support). Step 2 estimates one off-diagonal element per
unordered support pair, either one teleporter setting per pair or one per
teleporter class when branch reuse is on. The matrix is assembled from the
measured diagonal and the Hermitian-completed estimates; anything outside the
support pairs stays zero.
"""

import itertools
import logging

import numpy as np
import pandas as pd

from errors import ArgumentError, DegenerateStateError, InsufficientStatisticsError, UnmeasurableElementError
from extensions import numeric, workers
from models import DensityMatrix, ElementIndex, PureState, ScanReport, bitstring
from protocol.estimator import (
    correct_for_noise,
    estimate_class_exact,
    estimate_class_sampled,
    estimate_exact,
    estimate_populations,
    estimate_sampled,
)
from protocol.plan_compiler import group_by_class, settings_for_tomography
from protocol.state_core import epr_state, ghz_state, project_psd

logger = logging.getLogger(__name__)


def ideal_ghz_supplier(width):
    return ghz_state(width).projector()


def _rotation(theta, phi):
    """Rz(phi) Ry(theta), angles in degrees."""
    t, p = np.radians(theta) / 2, np.radians(phi) / 2
    ry = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], dtype=complex)
    rz = np.diag([np.exp(-1j * p), np.exp(1j * p)])
    return rz @ ry


def prepare_fig5_state(theta, phi):
    """(U(theta, phi) x I)|EPR> with U = Rz(phi) Ry(theta) on qubit 1."""
    op = np.kron(_rotation(theta, phi), np.eye(2))
    return PureState.normalized(2, op @ epr_state().amplitudes).projector()


def settings_accounting(num_qubits, support_size):
    dim = 2 ** num_qubits
    if not 1 <= support_size <= dim:
        raise ArgumentError(f"Support size must lie in [1, {dim}], got {support_size}")
    pairs = support_size * (support_size - 1) // 2
    return {
        'scan': 1 + pairs,
        'tomography': settings_for_tomography(num_qubits),
        'ordered_elements': 2 * pairs,
    }


def find_support(populations, threshold):
    support = tuple(int(i) for i in np.flatnonzero(np.asarray(populations) > threshold))
    if not support:
        raise DegenerateStateError(f"No population exceeds the threshold {threshold:g}")
    return support


def candidate_pairs(num_qubits, support):
    return tuple(ElementIndex(num_qubits, m, n) for m, n in itertools.combinations(sorted(support), 2))


def _width(element):
    return element.hamming_distance + 1


def _estimate_candidate(job):
    rho, element, ghz, cfg = job
    try:
        if cfg.exact:
            return estimate_exact(rho, element, ghz, postselect=cfg.postselect)
        return estimate_sampled(rho, element, ghz, shots=cfg.shots_per_setting,
                                seed=cfg.seed, postselect=cfg.postselect)
    except (InsufficientStatisticsError, UnmeasurableElementError) as exc:
        logger.warning("Skipping %s: %s", element.label, exc)
        return None


def _estimate_class(job):
    rho, teleporter_class, ghz, cfg = job
    if cfg.exact:
        return estimate_class_exact(rho, teleporter_class, ghz)
    return estimate_class_sampled(rho, teleporter_class, ghz, shots=cfg.shots_per_setting, seed=cfg.seed)


def _estimate_all(rho, candidates, cfg, ghz_supplier):
    if cfg.reuse_branches:
        groups = group_by_class(candidates)
        jobs = [(rho, cls, ghz_supplier(bin(cls.parity_pattern).count('1') + 1), cfg) for cls in groups]
        found = {}
        for per_class in workers.map(_estimate_class, jobs):
            found.update(per_class)
        return [found.get(element) for element in candidates], 1 + len(groups)

    jobs = [(rho, element, ghz_supplier(_width(element)), cfg) for element in candidates]
    return workers.map(_estimate_candidate, jobs), 1 + len(candidates)


def scan(rho, cfg, ghz_supplier=None):
    ghz_supplier = ghz_supplier or ideal_ghz_supplier
    num_qubits = rho.num_qubits

    if cfg.exact:
        populations = estimate_populations(rho)
    else:
        populations = estimate_populations(rho, shots=cfg.shots_per_setting, seed=cfg.seed)

    support = find_support(populations, cfg.effective_threshold)
    candidates = candidate_pairs(num_qubits, support)
    logger.info("Scan support: %d of %d basis states, %d candidate pairs",
                len(support), 2 ** num_qubits, len(candidates))

    results, settings_used = _estimate_all(rho, candidates, cfg, ghz_supplier)

    entries = np.diag(populations).astype(complex)
    estimates, skipped = [], []
    for element, estimate in zip(candidates, results):
        if estimate is None:
            skipped.append(element)
            continue
        if cfg.p_correction != 1.0:
            estimate = correct_for_noise(estimate, cfg.p_correction)
        entries[element.m, element.n] = estimate.value
        entries[element.n, element.m] = np.conj(estimate.value)
        estimates.append(estimate)

    entries = (entries + entries.conj().T) / 2
    psd_projected = False
    if np.linalg.eigvalsh(entries)[0] < -numeric.psd_tol:
        logger.info("Reconstruction is not PSD; projecting")
        entries = project_psd(entries)
        psd_projected = True

    return ScanReport(
        num_qubits=num_qubits,
        populations=populations,
        support=support,
        candidates=candidates,
        estimates=tuple(estimates),
        settings_used=settings_used,
        tomography_settings=settings_for_tomography(num_qubits),
        reconstructed=DensityMatrix(num_qubits, entries, check=False),
        psd_projected=psd_projected,
        skipped=tuple(skipped),
    )


def report_to_json(report):
    n = report.num_qubits
    return {
        'num_qubits': n,
        'populations': [float(p) for p in report.populations],
        'support': [bitstring(i, n) for i in report.support],
        'candidates': [[e.m_bits, e.n_bits] for e in report.candidates],
        'estimates': [e.to_json() for e in report.estimates],
        'skipped': [[e.m_bits, e.n_bits] for e in report.skipped],
        'settings_used': report.settings_used,
        'tomography_settings': report.tomography_settings,
        'psd_projected': report.psd_projected,
        'reconstructed': report.reconstructed.to_json(),
    }


def populations_frame(report):
    n = report.num_qubits
    support = set(report.support)
    return pd.DataFrame({
        'basis': [bitstring(i, n) for i in range(2 ** n)],
        'population': report.populations,
        'in_support': [i in support for i in range(2 ** n)],
    })
