"""tomo: Pauli-basis linear-inversion tomography baseline."""

import pandas as pd

from commands.utils import add_common_args, add_noise_args, add_sampling_args, add_state_args, load_state, write_report
from protocol.state_core import fidelity
from protocol.tomography import result_to_json, tomograph_exact, tomograph_sampled

NAME = 'tomo'


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Standard 3^N-setting state tomography")
    add_state_args(parser)
    add_sampling_args(parser)
    add_noise_args(parser)
    add_common_args(parser)
    return parser


def tomograph(rho, cfg):
    if cfg.sampled:
        return tomograph_sampled(rho, cfg.shots, cfg.seed)
    return tomograph_exact(rho)


def run(cfg):
    rho = load_state(cfg)
    result = tomograph(rho, cfg)
    payload = result_to_json(result)
    payload['fidelity'] = fidelity(result.reconstructed, rho)
    frame = pd.DataFrame({'pauli': list(result.expectations), 'expectation': list(result.expectations.values())})
    write_report(payload, cfg, NAME, frame=frame)
    return 0
