"""measure: recover one off-diagonal element, exactly or from simulated shots."""

import logging

import pandas as pd

from commands.utils import (
    add_common_args,
    add_element_args,
    add_noise_args,
    add_sampling_args,
    add_state_args,
    ghz_supplier,
    load_state,
    parse_element,
    write_report,
)
from protocol.estimator import POSTSELECT_MODES, correct_for_noise, estimate_exact, estimate_sampled
from protocol.plan_compiler import compile_plan
from protocol.teleport_engine import run_exact

logger = logging.getLogger(__name__)

NAME = 'measure'


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Measure one density-matrix element by teleportation")
    add_state_args(parser)
    add_element_args(parser)
    add_sampling_args(parser)
    add_noise_args(parser)
    parser.add_argument('--postselect', choices=POSTSELECT_MODES, default=None)
    parser.add_argument('--dump-branches', dest='dump_branches', action='store_true', default=None,
                        help="Include the full branch table in the report")
    add_common_args(parser)
    return parser


def run(cfg):
    rho = load_state(cfg)
    element = parse_element(cfg, rho.num_qubits)
    plan = compile_plan(element)
    ghz = ghz_supplier(cfg)(plan.ghz_width)

    if cfg.sampled:
        estimate = estimate_sampled(rho, element, ghz, shots=cfg.shots, seed=cfg.seed, postselect=cfg.postselect)
    else:
        estimate = estimate_exact(rho, element, ghz, postselect=cfg.postselect)
    if cfg.p != 1.0:
        estimate = correct_for_noise(estimate, cfg.p)
    logger.info("Recovered rho[%s] = %s", element.label, estimate.value)

    payload = {'plan': plan.to_json(), 'estimate': estimate.to_json(), 'noise': cfg.noise.to_json()}
    if cfg.dump_branches:
        payload['branches'] = run_exact(rho, plan, ghz).to_json()['branches']
    write_report(payload, cfg, NAME, frame=pd.DataFrame([estimate.to_json()]))
    return 0
