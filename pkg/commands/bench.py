"""bench: teleporter-class characterisation and Werner-p fits."""

import logging

from commands.utils import add_common_args, add_noise_args, write_report
from errors import ArgumentError
from models import TeleporterClass, parse_bitstring
from protocol.benchmark import benchmark_frame, benchmark_to_json, fit_werner_p, run_benchmark, run_class_benchmarks

logger = logging.getLogger(__name__)

NAME = 'bench'


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Benchmark teleporter classes with the four logical test states")
    parser.add_argument('--n', dest='num_qubits', type=int, default=None, help="Number of system qubits (default 2)")
    parser.add_argument('--class', dest='teleporter_class', default=None,
                        help="Parity pattern bitstring of one class (default: all classes)")
    parser.add_argument('--shots', type=int, default=None, help="Shots per axis for simulated error bars")
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--fit-target', dest='fit_target', type=float, default=None,
                        help="Fit one Werner p to this mean output fidelity")
    add_noise_args(parser)
    add_common_args(parser)
    return parser


def run(cfg):
    num_qubits = cfg.num_qubits or 2
    if cfg.teleporter_class:
        if len(cfg.teleporter_class) != num_qubits:
            raise ArgumentError(f"Class pattern {cfg.teleporter_class!r} does not have {num_qubits} bits")
        pattern = parse_bitstring(cfg.teleporter_class)
        if pattern == 0:
            raise ArgumentError("Class pattern 0 is the diagonal: use populations")
        cls = TeleporterClass(num_qubits, pattern)
        benchmarks = [run_benchmark(cls, cfg.noise, shots=cfg.shots, seed=cfg.seed)]
    else:
        benchmarks = run_class_benchmarks(num_qubits, cfg.noise, shots=cfg.shots, seed=cfg.seed)

    payload = {'benchmarks': [benchmark_to_json(b) for b in benchmarks]}
    if cfg.fit_target is not None:
        fit = fit_werner_p(cfg.fit_target, [b.teleporter_class for b in benchmarks])
        logger.info("Fitted Werner p = %.6f (residual %.2e)", fit['p'], fit['residual'])
        payload['fit'] = fit
    write_report(payload, cfg, NAME, frame=benchmark_frame(benchmarks))
    return 0
