"""compare: sparse scan against tomography on the same state; exit 1 past --tol."""

import logging

import numpy as np
import pandas as pd

from commands.scan import scan_config
from commands.tomo import tomograph
from commands.utils import (
    add_common_args,
    add_noise_args,
    add_sampling_args,
    add_state_args,
    ghz_supplier,
    load_state,
    write_report,
)
from models import bitstring
from protocol.sparse_scan import scan
from protocol.state_core import fidelity

logger = logging.getLogger(__name__)

NAME = 'compare'

# coherences smaller than this carry no meaningful phase
PHASE_FLOOR = 1e-9


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Diff the scan and tomography reconstructions")
    add_state_args(parser)
    add_sampling_args(parser)
    add_noise_args(parser)
    parser.add_argument('--threshold', type=float, default=None)
    parser.add_argument('--reuse', action='store_true', default=None)
    parser.add_argument('--tol', type=float, default=None, help="Maximum entrywise deviation")
    add_common_args(parser)
    return parser


def phase_deviation(scan_entries, tomo_entries, estimates):
    """Mean absolute phase difference over the recovered coherences."""
    deltas = []
    for estimate in estimates:
        m, n = estimate.element.m, estimate.element.n
        if min(abs(scan_entries[m, n]), abs(tomo_entries[m, n])) < PHASE_FLOOR:
            continue
        deltas.append(abs(np.angle(scan_entries[m, n] / tomo_entries[m, n])))
    return float(np.mean(deltas)) if deltas else 0.0


def run(cfg):
    rho = load_state(cfg)
    report = scan(rho, scan_config(cfg), ghz_supplier(cfg))
    tomo = tomograph(rho, cfg)

    scan_entries = report.reconstructed.entries
    tomo_entries = tomo.reconstructed.entries
    deviation = np.abs(scan_entries - tomo_entries)
    max_deviation = float(deviation.max())
    n = report.num_qubits

    payload = {
        'num_qubits': n,
        'max_deviation': max_deviation,
        'tol': cfg.tol,
        'passed': max_deviation <= cfg.tol,
        'fidelity': fidelity(report.reconstructed, tomo.reconstructed),
        'phase_deviation': phase_deviation(scan_entries, tomo_entries, report.estimates),
        'settings': {'scan': report.settings_used, 'tomography': tomo.settings_used},
        'psd_projected': {'scan': report.psd_projected, 'tomography': tomo.psd_projected},
    }
    rows, cols = np.indices(deviation.shape)
    frame = pd.DataFrame({
        'm': [bitstring(i, n) for i in rows.ravel()],
        'n': [bitstring(j, n) for j in cols.ravel()],
        'scan_re': scan_entries.real.ravel(),
        'scan_im': scan_entries.imag.ravel(),
        'tomo_re': tomo_entries.real.ravel(),
        'tomo_im': tomo_entries.imag.ravel(),
        'deviation': deviation.ravel(),
    })
    write_report(payload, cfg, NAME, frame=frame)

    if not payload['passed']:
        logger.error("Max deviation %.3e exceeds tolerance %.3e", max_deviation, cfg.tol)
        return 1
    return 0
