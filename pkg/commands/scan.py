"""scan: two-step full-state read-out with settings accounting."""

import logging

from commands.utils import (
    add_common_args,
    add_noise_args,
    add_sampling_args,
    add_state_args,
    ghz_supplier,
    load_state,
    write_report,
)
from models import ScanConfig
from protocol.estimator import POSTSELECT_MODES
from protocol.sparse_scan import populations_frame, report_to_json, scan, settings_accounting
from protocol.state_core import fidelity

logger = logging.getLogger(__name__)

NAME = 'scan'


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Populations, support, then every support coherence")
    add_state_args(parser)
    add_sampling_args(parser)
    add_noise_args(parser)
    parser.add_argument('--threshold', type=float, default=None, help="Population threshold for the support")
    parser.add_argument('--reuse', action='store_true', default=None,
                        help="One teleporter setting per class instead of per element")
    parser.add_argument('--postselect', choices=POSTSELECT_MODES, default=None)
    add_common_args(parser)
    return parser


def scan_config(cfg):
    return ScanConfig(
        population_threshold=cfg.threshold,
        shots_per_setting=cfg.shots if cfg.sampled else 0,
        p_correction=cfg.p,
        reuse_branches=cfg.reuse,
        seed=cfg.seed,
        postselect=cfg.postselect,
    )


def run(cfg):
    rho = load_state(cfg)
    report = scan(rho, scan_config(cfg), ghz_supplier(cfg))

    payload = report_to_json(report)
    payload['fidelity'] = fidelity(report.reconstructed, rho)
    payload['accounting'] = settings_accounting(report.num_qubits, len(report.support))
    logger.info("Scan used %d settings (tomography: %d)", report.settings_used, report.tomography_settings)
    write_report(payload, cfg, NAME, frame=populations_frame(report))
    return 0
